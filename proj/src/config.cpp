#include "fmad/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "fmad/error.hpp"

namespace fmad {

using nlohmann::json;

namespace {

constexpr std::string_view kBandCountRule = "floor(min(H,W)/2*sqrt(2))";
constexpr std::string_view kLogBase = "e";

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw FormatError("unknown configuration key '" + where + "." + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError("bad value for '" + where + "." + key + "': " + e.what());
  }
}

}  // namespace

std::string_view region_mode_name(RegionMode mode) {
  switch (mode) {
    case RegionMode::kAuto: return "auto";
    case RegionMode::kPreset: return "preset";
    case RegionMode::kLandmarks: return "landmarks";
  }
  return "auto";
}

RegionMode region_mode_from_name(std::string_view name) {
  if (name == "auto") return RegionMode::kAuto;
  if (name == "preset") return RegionMode::kPreset;
  if (name == "landmarks") return RegionMode::kLandmarks;
  throw FormatError("region_mode must be auto, preset or landmarks");
}

json config_to_json(const DetectorConfig& c) {
  json regions = json::object();
  for (std::size_t i = 0; i < kRegionCount; ++i) {
    const RegionSpec& spec = c.region_specs[i];
    const PresetBox& preset = c.preset_boxes[i];
    regions[std::string(region_name(spec.region_id))] = {
        {"landmark_indices", spec.landmark_indices},
        {"margin_fraction", spec.margin_fraction},
        {"preset",
         {{"center_x", preset.center_x},
          {"center_y", preset.center_y},
          {"half_side", preset.half_side}}},
    };
  }
  return {
      {"image_size", c.image_size},
      {"band_count_rule", kBandCountRule},
      {"log_base", kLogBase},
      {"std_epsilon", c.std_epsilon},
      {"global_pca_dim", c.global_pca_dim},
      {"region_pca_dim", c.region_pca_dim},
      {"patch_size", c.patch_size},
      {"region_mode", region_mode_name(c.region_mode)},
      {"regions", regions},
      {"svm",
       {{"C", c.svm.penalty},
        {"gamma", c.svm.kernel_width},
        {"tolerance", c.svm.tolerance},
        {"max_iterations", c.svm.max_iterations},
        {"calibration_fraction", c.svm.calibration_fraction}}},
      {"logistic",
       {{"l2_strength", c.logistic.l2_strength},
        {"gradient_tolerance", c.logistic.gradient_tolerance},
        {"max_iterations", c.logistic.max_iterations}}},
      {"prob_epsilon", c.prob_epsilon},
      {"beta", c.beta},
      {"lambda", c.lambda},
      {"max_regions", c.max_regions},
      {"balance_classes", c.balance_classes},
      {"seed", c.seed},
      {"threads", c.threads},
      {"batch_size", c.batch_size},
  };
}

DetectorConfig config_from_json(const json& j) {
  DetectorConfig c;
  reject_unknown(j,
                 {"image_size", "band_count_rule", "log_base", "std_epsilon", "global_pca_dim",
                  "region_pca_dim", "patch_size", "region_mode", "regions", "svm", "logistic",
                  "prob_epsilon", "beta", "lambda", "max_regions", "balance_classes", "seed",
                  "threads", "batch_size"},
                 "config");
  const std::string root = "config";
  if (j.contains("band_count_rule") && j.at("band_count_rule") != kBandCountRule) {
    throw FormatError("unsupported band_count_rule");
  }
  if (j.contains("log_base") && j.at("log_base") != kLogBase) {
    throw FormatError("unsupported log_base");
  }
  read(j, "image_size", c.image_size, root);
  read(j, "std_epsilon", c.std_epsilon, root);
  read(j, "global_pca_dim", c.global_pca_dim, root);
  read(j, "region_pca_dim", c.region_pca_dim, root);
  read(j, "patch_size", c.patch_size, root);
  if (j.contains("region_mode")) {
    std::string mode;
    read(j, "region_mode", mode, root);
    c.region_mode = region_mode_from_name(mode);
  }
  if (j.contains("regions")) {
    const json& regions = j.at("regions");
    reject_unknown(regions, {"left_eye", "right_eye", "nose", "mouth"}, "config.regions");
    for (std::size_t i = 0; i < kRegionCount; ++i) {
      const std::string name(region_name(kAllRegions[i]));
      if (!regions.contains(name)) continue;
      const json& r = regions.at(name);
      const std::string where = "config.regions." + name;
      reject_unknown(r, {"landmark_indices", "margin_fraction", "preset"}, where);
      read(r, "landmark_indices", c.region_specs[i].landmark_indices, where);
      read(r, "margin_fraction", c.region_specs[i].margin_fraction, where);
      if (r.contains("preset")) {
        const json& p = r.at("preset");
        reject_unknown(p, {"center_x", "center_y", "half_side"}, where + ".preset");
        read(p, "center_x", c.preset_boxes[i].center_x, where + ".preset");
        read(p, "center_y", c.preset_boxes[i].center_y, where + ".preset");
        read(p, "half_side", c.preset_boxes[i].half_side, where + ".preset");
      }
    }
  }
  if (j.contains("svm")) {
    const json& s = j.at("svm");
    reject_unknown(s, {"C", "gamma", "tolerance", "max_iterations", "calibration_fraction"},
                   "config.svm");
    read(s, "C", c.svm.penalty, "config.svm");
    read(s, "gamma", c.svm.kernel_width, "config.svm");
    read(s, "tolerance", c.svm.tolerance, "config.svm");
    read(s, "max_iterations", c.svm.max_iterations, "config.svm");
    read(s, "calibration_fraction", c.svm.calibration_fraction, "config.svm");
  }
  if (j.contains("logistic")) {
    const json& l = j.at("logistic");
    reject_unknown(l, {"l2_strength", "gradient_tolerance", "max_iterations"}, "config.logistic");
    read(l, "l2_strength", c.logistic.l2_strength, "config.logistic");
    read(l, "gradient_tolerance", c.logistic.gradient_tolerance, "config.logistic");
    read(l, "max_iterations", c.logistic.max_iterations, "config.logistic");
  }
  read(j, "prob_epsilon", c.prob_epsilon, root);
  read(j, "beta", c.beta, root);
  read(j, "lambda", c.lambda, root);
  read(j, "max_regions", c.max_regions, root);
  read(j, "balance_classes", c.balance_classes, root);
  read(j, "seed", c.seed, root);
  read(j, "threads", c.threads, root);
  read(j, "batch_size", c.batch_size, root);
  c.svm.seed = c.seed;
  validate_config(c);
  return c;
}

DetectorConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void validate_config(const DetectorConfig& c) {
  auto fail = [](const std::string& msg) { throw InvalidInputError("config: " + msg); };
  if (c.image_size < 32) fail("image_size must be >= 32");
  if (c.patch_size < 8) fail("patch_size must be >= 8");
  if (!(c.std_epsilon > 0.0)) fail("std_epsilon must be positive");
  if (c.global_pca_dim == 0 || c.region_pca_dim == 0) fail("PCA dimensions must be positive");
  for (const auto& spec : c.region_specs) {
    if (spec.landmark_indices.empty()) fail("every region needs landmark indices");
    for (std::size_t idx : spec.landmark_indices) {
      if (idx >= kLandmarkCount) fail("landmark index out of range");
    }
    if (!(spec.margin_fraction >= 0.0)) fail("margin_fraction must be >= 0");
  }
  for (const auto& p : c.preset_boxes) {
    if (!(p.half_side > 0.0)) fail("preset half_side must be positive");
  }
  if (!(c.svm.penalty > 0.0)) fail("svm.C must be positive");
  if (!(c.svm.tolerance > 0.0)) fail("svm.tolerance must be positive");
  if (!(c.svm.calibration_fraction > 0.0 && c.svm.calibration_fraction < 1.0)) {
    fail("svm.calibration_fraction must lie in (0, 1)");
  }
  if (!(c.logistic.l2_strength >= 0.0)) fail("logistic.l2_strength must be >= 0");
  if (!(c.prob_epsilon > 0.0 && c.prob_epsilon < 0.5)) fail("prob_epsilon must lie in (0, 0.5)");
  if (!(c.beta >= 0.0)) fail("beta must be >= 0");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) fail("lambda must lie in [0, 1]");
  if (c.max_regions < kRegionCount) fail("max_regions must be >= 4");
}

}  // namespace fmad
