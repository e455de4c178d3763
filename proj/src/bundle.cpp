#include "fmad/bundle.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "fmad/error.hpp"

namespace fmad {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows)) {
    throw FormatError("matrix row count mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = data.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    if (row.size() != static_cast<std::size_t>(cols)) throw FormatError("matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

json standardizer_to_json(const Standardizer& s) {
  return {{"means", s.means}, {"std_devs", s.std_devs}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.means = j.at("means").get<std::vector<double>>();
  s.std_devs = j.at("std_devs").get<std::vector<double>>();
  return s;
}

json pca_to_json(const PcaModel& p) {
  return {{"components", matrix_to_json(p.components)},
          {"explained_variance", p.explained_variance}};
}

PcaModel pca_from_json(const json& j) {
  PcaModel p;
  p.components = matrix_from_json(j.at("components"));
  p.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  return p;
}

json svm_to_json(const KernelSvmModel& m) {
  return {{"support_features", matrix_to_json(m.support_features)},
          {"dual_coefficients", m.dual_coefficients},
          {"bias", m.bias},
          {"kernel_width", m.kernel_width},
          {"penalty", m.penalty},
          {"platt_slope", m.platt_slope},
          {"platt_offset", m.platt_offset},
          {"seed", m.seed}};
}

KernelSvmModel svm_from_json(const json& j) {
  KernelSvmModel m;
  m.support_features = matrix_from_json(j.at("support_features"));
  m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.kernel_width = j.at("kernel_width").get<double>();
  m.penalty = j.at("penalty").get<double>();
  m.platt_slope = j.at("platt_slope").get<double>();
  m.platt_offset = j.at("platt_offset").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

json logistic_to_json(const LogisticModel& m) {
  return {{"weights", m.weights}, {"bias", m.bias}, {"l2_strength", m.l2_strength}};
}

LogisticModel logistic_from_json(const json& j) {
  LogisticModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.l2_strength = j.at("l2_strength").get<double>();
  return m;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw FormatError("inconsistent bundle: " + what);
}

}  // namespace

void validate_bundle(const DetectorBundle& b) {
  check(b.format_version == kBundleFormatVersion, "unsupported format version");
  const std::size_t global_dim = 3 * band_count(b.image_size);
  check(b.global.standardizer.dim() == global_dim, "global standardizer dimension");
  check(b.global.standardizer.std_devs.size() == global_dim, "global std_devs length");
  check(b.global.pca.input_dim() == global_dim, "global PCA input dimension");
  check(b.global.svm.dim() == b.global.pca.output_dim(), "SVM dimension vs PCA output");
  check(b.global.svm.dual_coefficients.size() ==
            static_cast<std::size_t>(b.global.svm.support_features.rows()),
        "SVM coefficient count");
  const std::size_t region_dim = 3 * band_count(b.config.patch_size);
  for (const RegionStream& r : b.regions) {
    check(r.standardizer.dim() == region_dim, "region standardizer dimension");
    check(r.standardizer.std_devs.size() == region_dim, "region std_devs length");
    check(r.pca.input_dim() == region_dim, "region PCA input dimension");
    check(r.model.weights.size() == r.pca.output_dim(), "logistic dimension vs PCA output");
  }
  check(b.mrf.region_count == kRegionCount, "MRF region count");
  check(b.image_size == b.config.image_size, "image size vs config");
  check(b.fusion.lambda >= 0.0 && b.fusion.lambda <= 1.0, "lambda range");
  check(b.mrf.beta >= 0.0, "beta range");
}

json bundle_to_json(const DetectorBundle& b) {
  json regions = json::array();
  for (const RegionStream& r : b.regions) {
    regions.push_back({{"region", region_name(r.spec.region_id)},
                       {"landmark_indices", r.spec.landmark_indices},
                       {"margin_fraction", r.spec.margin_fraction},
                       {"standardizer", standardizer_to_json(r.standardizer)},
                       {"pca", pca_to_json(r.pca)},
                       {"logistic", logistic_to_json(r.model)}});
  }
  return {{"format", kBundleFormatName},
          {"version", b.format_version},
          {"image_size", b.image_size},
          {"global",
           {{"standardizer", standardizer_to_json(b.global.standardizer)},
            {"pca", pca_to_json(b.global.pca)},
            {"svm", svm_to_json(b.global.svm)}}},
          {"regions", regions},
          {"mrf",
           {{"region_count", b.mrf.region_count},
            {"beta", b.mrf.beta},
            {"max_regions", b.mrf.max_regions}}},
          {"fusion", {{"lambda", b.fusion.lambda}}},
          {"config", config_to_json(b.config)},
          {"metadata", b.metadata}};
}

DetectorBundle bundle_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kBundleFormatName) {
      throw FormatError("not a detector bundle");
    }
    DetectorBundle b;
    b.format_version = j.at("version").get<int>();
    if (b.format_version != kBundleFormatVersion) {
      throw FormatError("unsupported bundle version " + std::to_string(b.format_version));
    }
    b.image_size = j.at("image_size").get<std::size_t>();
    const json& g = j.at("global");
    b.global.standardizer = standardizer_from_json(g.at("standardizer"));
    b.global.pca = pca_from_json(g.at("pca"));
    b.global.svm = svm_from_json(g.at("svm"));
    const json& regions = j.at("regions");
    if (regions.size() != kRegionCount) throw FormatError("bundle must hold four regions");
    for (std::size_t i = 0; i < kRegionCount; ++i) {
      const json& r = regions.at(i);
      RegionStream& s = b.regions[i];
      s.spec.region_id = region_from_name(r.at("region").get<std::string>());
      if (s.spec.region_id != kAllRegions[i]) throw FormatError("bundle regions out of order");
      s.spec.landmark_indices = r.at("landmark_indices").get<std::vector<std::size_t>>();
      s.spec.margin_fraction = r.at("margin_fraction").get<double>();
      s.standardizer = standardizer_from_json(r.at("standardizer"));
      s.pca = pca_from_json(r.at("pca"));
      s.model = logistic_from_json(r.at("logistic"));
    }
    const json& mrf = j.at("mrf");
    b.mrf.region_count = mrf.at("region_count").get<std::size_t>();
    b.mrf.beta = mrf.at("beta").get<double>();
    b.mrf.max_regions = mrf.at("max_regions").get<std::size_t>();
    b.fusion.lambda = j.at("fusion").at("lambda").get<double>();
    b.config = config_from_json(j.at("config"));
    b.metadata = j.at("metadata");
    validate_bundle(b);
    return b;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed bundle: ") + e.what());
  }
}

std::string serialize_bundle(const DetectorBundle& bundle) {
  return bundle_to_json(bundle).dump(2) + "\n";
}

DetectorBundle deserialize_bundle(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bundle is not valid JSON: ") + e.what());
  }
  return bundle_from_json(j);
}

void save_bundle(const std::filesystem::path& path, const DetectorBundle& bundle) {
  validate_bundle(bundle);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write bundle '" + path.string() + "'");
  out << serialize_bundle(bundle);
  if (!out) throw IoError("failed writing bundle '" + path.string() + "'");
}

DetectorBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open bundle '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_bundle(ss.str());
}

}  // namespace fmad
