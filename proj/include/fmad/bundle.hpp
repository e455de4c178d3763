#pragma once

#include <array>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "fmad/classifiers.hpp"
#include "fmad/config.hpp"
#include "fmad/features.hpp"
#include "fmad/mrf.hpp"
#include "fmad/regions.hpp"

namespace fmad {

inline constexpr int kBundleFormatVersion = 1;
inline constexpr std::string_view kBundleFormatName = "fmad-detector-bundle";

struct GlobalStream {
  Standardizer standardizer;
  PcaModel pca;
  KernelSvmModel svm;
};

struct RegionStream {
  RegionSpec spec;
  Standardizer standardizer;
  PcaModel pca;
  LogisticModel model;
};

struct DetectorBundle {
  int format_version = kBundleFormatVersion;
  std::size_t image_size = 500;
  GlobalStream global;
  std::array<RegionStream, kRegionCount> regions;
  MrfModel mrf;
  FusionConfig fusion;
  DetectorConfig config;
  nlohmann::json metadata = nlohmann::json::object();
};

// Throws FormatError when component dimensions disagree.
void validate_bundle(const DetectorBundle& bundle);

nlohmann::json bundle_to_json(const DetectorBundle& bundle);
DetectorBundle bundle_from_json(const nlohmann::json& json);

// Text encoding of bundle_to_json (2-space indent, sorted keys, trailing newline).
std::string serialize_bundle(const DetectorBundle& bundle);
DetectorBundle deserialize_bundle(const std::string& text);

void save_bundle(const std::filesystem::path& path, const DetectorBundle& bundle);
DetectorBundle load_bundle(const std::filesystem::path& path);

}  // namespace fmad
