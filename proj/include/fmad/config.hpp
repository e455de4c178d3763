#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "fmad/classifiers.hpp"
#include "fmad/features.hpp"
#include "fmad/mrf.hpp"
#include "fmad/regions.hpp"

namespace fmad {

enum class RegionMode {
  kAuto,       // landmarks when the record has them, presets otherwise
  kPreset,     // always presets
  kLandmarks,  // landmarks required
};

std::string_view region_mode_name(RegionMode mode);
RegionMode region_mode_from_name(std::string_view name);

// Every tunable constant of the detector. Serialized whole into each bundle.
struct DetectorConfig {
  std::size_t image_size = 500;
  double std_epsilon = kDefaultStdEpsilon;
  std::size_t global_pca_dim = kDefaultPcaDim;
  std::size_t region_pca_dim = kDefaultPcaDim;

  std::size_t patch_size = kDefaultPatchSize;
  RegionMode region_mode = RegionMode::kAuto;
  std::array<RegionSpec, kRegionCount> region_specs = default_region_specs();
  std::array<PresetBox, kRegionCount> preset_boxes = default_preset_boxes();

  SvmParams svm;
  LogisticParams logistic;

  double prob_epsilon = kDefaultProbEpsilon;
  double beta = kDefaultBeta;
  double lambda = kDefaultLambda;
  std::size_t max_regions = kDefaultMaxRegions;

  bool balance_classes = true;
  std::uint64_t seed = 0;
  std::size_t threads = 0;       // 0 = hardware concurrency
  std::size_t batch_size = 128;  // images per extraction batch; no numerical effect
};

nlohmann::json config_to_json(const DetectorConfig& config);

// Missing keys keep their defaults; unknown keys and bad values throw FormatError.
DetectorConfig config_from_json(const nlohmann::json& json);

DetectorConfig load_config(const std::filesystem::path& path);

// Throws InvalidInputError on out-of-range values.
void validate_config(const DetectorConfig& config);

}  // namespace fmad
