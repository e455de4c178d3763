#include "fmad/detector.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "fmad/error.hpp"
#include "fmad/image_io.hpp"
#include "fmad/mrf.hpp"
#include "random.hpp"

namespace fmad {
namespace {

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs fn(i) for i in [0, count) on a pool; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  const std::size_t workers = worker_count(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void require_both_classes(std::span<const int> labels) {
  const auto ones = std::count(labels.begin(), labels.end(), 1);
  const auto zeros = std::count(labels.begin(), labels.end(), 0);
  if (ones == 0 || zeros == 0) {
    throw SingleClassError("training data needs both bona fide and morph samples");
  }
}

LabeledSet make_labeled_set(const std::vector<FeatureVector>& reduced, std::span<const int> labels) {
  LabeledSet set;
  const std::size_t dim = reduced.front().size();
  set.features.resize(static_cast<Eigen::Index>(reduced.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      set.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = reduced[i][j];
    }
  }
  set.labels.assign(labels.begin(), labels.end());
  return set;
}

// Standardize + PCA on one stream; returns reduced training features.
std::vector<FeatureVector> fit_stream(const std::vector<FeatureVector>& raw, std::size_t pca_dim,
                                      double std_epsilon, Standardizer& standardizer,
                                      PcaModel& pca) {
  standardizer = fit_standardizer(raw, std_epsilon);
  std::vector<FeatureVector> standardized;
  standardized.reserve(raw.size());
  for (const auto& f : raw) standardized.push_back(standardizer.apply(f));
  pca = fit_pca(standardized, default_pca_dim(pca_dim, raw.front().size(), raw.size()));
  std::vector<FeatureVector> reduced;
  reduced.reserve(raw.size());
  for (const auto& f : raw) reduced.push_back(transform(f, standardizer, pca));
  return reduced;
}

}  // namespace

ImageFeatures extract_features(const Image& image, const LandmarkSet* landmarks,
                               const DetectorConfig& config) {
  for (const auto& ch : image.channels) validate_channel(ch);
  if (image.channels[1].height != image.height() || image.channels[2].height != image.height() ||
      image.channels[1].width != image.width() || image.channels[2].width != image.width()) {
    throw InvalidInputError("image channels differ in size");
  }
  LetterboxGeometry geometry;
  const Image canvas = letterbox(image, config.image_size, &geometry);

  std::optional<LandmarkSet> mapped;
  if (landmarks && config.region_mode != RegionMode::kPreset) {
    validate_landmarks(*landmarks);
    mapped = *landmarks;
    for (Point& p : mapped->points) {
      p.x = geometry.scale * p.x + geometry.offset_x;
      p.y = geometry.scale * p.y + geometry.offset_y;
    }
  }
  if (config.region_mode == RegionMode::kLandmarks && !mapped) {
    throw InvalidInputError("region_mode 'landmarks' requires a landmark file for every image");
  }

  ImageFeatures features;
  features.global = image_feature(canvas);
  const auto patches = extract_regions(canvas, mapped ? &*mapped : nullptr, config.region_specs,
                                       config.preset_boxes, config.patch_size);
  for (std::size_t i = 0; i < kRegionCount; ++i) features.regions[i] = image_feature(patches[i].image);
  return features;
}

std::vector<ImageFeatures> extract_all(std::span<const SampleRecord> records,
                                       const DetectorConfig& config) {
  std::vector<ImageFeatures> out(records.size());
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  for (std::size_t start = 0; start < records.size(); start += batch) {
    const std::size_t count = std::min(batch, records.size() - start);
    parallel_for(count, config.threads, [&](std::size_t k) {
      const SampleRecord& rec = records[start + k];
      try {
        const LoadedSample sample = rec.load();
        out[start + k] = extract_features(sample.image,
                                          sample.landmarks ? &*sample.landmarks : nullptr, config);
      } catch (const Error& e) {
        throw Error(rec.id + ": " + e.what());
      }
    });
  }
  return out;
}

std::vector<std::size_t> balanced_indices(std::span<const int> labels, std::uint64_t seed) {
  require_both_classes(labels);
  std::vector<std::size_t> bonafide;
  std::vector<std::size_t> morph;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? bonafide : morph).push_back(i);
  std::vector<std::size_t>& major = bonafide.size() > morph.size() ? bonafide : morph;
  const std::size_t keep = std::min(bonafide.size(), morph.size());
  if (major.size() > keep) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    detail::seeded_shuffle(major, rng);
    major.resize(keep);
  }
  std::vector<std::size_t> out = bonafide;
  out.insert(out.end(), morph.begin(), morph.end());
  std::sort(out.begin(), out.end());
  return out;
}

DetectorBundle train_from_features(std::span<const ImageFeatures> features,
                                   std::span<const int> labels, const DetectorConfig& config) {
  validate_config(config);
  if (features.size() != labels.size()) throw DimensionMismatchError("features and labels differ");
  require_both_classes(labels);

  DetectorBundle bundle;
  bundle.image_size = config.image_size;
  bundle.config = config;
  bundle.config.svm.seed = config.seed;

  std::vector<FeatureVector> global_raw;
  global_raw.reserve(features.size());
  for (const auto& f : features) global_raw.push_back(f.global);
  const std::vector<FeatureVector> global_reduced =
      fit_stream(global_raw, config.global_pca_dim, config.std_epsilon,
                 bundle.global.standardizer, bundle.global.pca);
  bundle.global.svm = train_svm_rbf(make_labeled_set(global_reduced, labels), bundle.config.svm);

  for (std::size_t r = 0; r < kRegionCount; ++r) {
    RegionStream& stream = bundle.regions[r];
    stream.spec = config.region_specs[r];
    stream.spec.region_id = kAllRegions[r];
    std::vector<FeatureVector> raw;
    raw.reserve(features.size());
    for (const auto& f : features) raw.push_back(f.regions[r]);
    const std::vector<FeatureVector> reduced = fit_stream(
        raw, config.region_pca_dim, config.std_epsilon, stream.standardizer, stream.pca);
    stream.model = train_logistic(make_labeled_set(reduced, labels), config.logistic);
  }

  bundle.mrf = MrfModel{kRegionCount, config.beta, config.max_regions};
  bundle.fusion = FusionConfig{config.lambda};
  const auto n_bona = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  bundle.metadata["training"] = {{"bonafide", n_bona},
                                 {"morph", labels.size() - n_bona},
                                 {"seed", config.seed},
                                 {"global_feature_dim", bundle.global.standardizer.dim()},
                                 {"global_pca_dim", bundle.global.pca.output_dim()},
                                 {"region_feature_dim", bundle.regions[0].standardizer.dim()},
                                 {"region_pca_dim", bundle.regions[0].pca.output_dim()},
                                 {"support_vectors", bundle.global.svm.dual_coefficients.size()}};
  validate_bundle(bundle);
  return bundle;
}

DetectorBundle train(std::span<const SampleRecord> records, const DetectorConfig& config) {
  validate_config(config);
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  require_both_classes(labels);

  std::vector<std::size_t> selected(records.size());
  for (std::size_t i = 0; i < selected.size(); ++i) selected[i] = i;
  if (config.balance_classes) selected = balanced_indices(labels, config.seed);

  std::vector<SampleRecord> chosen;
  std::vector<int> chosen_labels;
  chosen.reserve(selected.size());
  for (std::size_t i : selected) {
    chosen.push_back(records[i]);
    chosen_labels.push_back(labels[i]);
  }
  const std::vector<ImageFeatures> features = extract_all(chosen, config);
  DetectorBundle bundle = train_from_features(features, chosen_labels, config);
  bundle.metadata["training"]["manifest_records"] = records.size();
  return bundle;
}

StreamScores stream_scores(const DetectorBundle& bundle, const ImageFeatures& features) {
  const double eps = bundle.config.prob_epsilon;
  StreamScores s;
  const FeatureVector g = transform(features.global, bundle.global.standardizer, bundle.global.pca);
  s.s_global = predict_svm(bundle.global.svm, g, eps);
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    const RegionStream& stream = bundle.regions[r];
    const FeatureVector x = transform(features.regions[r], stream.standardizer, stream.pca);
    s.region_probabilities[r] = predict_logistic(stream.model, x, eps);
  }
  return s;
}

ScoreResult combine_scores(const StreamScores& streams, double beta, double lambda,
                           double prob_epsilon, std::size_t max_regions) {
  ScoreResult out;
  out.s_global = streams.s_global;
  out.region_probabilities = streams.region_probabilities;
  const UnaryPotentials unaries = unary_from_probabilities(streams.region_probabilities, prob_epsilon);
  const MrfModel model{kRegionCount, beta, max_regions};
  out.s_local = std::clamp(local_score(exact_posterior(unaries, model)), 0.0, 1.0);
  out.s_fused = fuse(out.s_global, out.s_local, FusionConfig{lambda});
  return out;
}

ScoreResult score_features(const DetectorBundle& bundle, const ImageFeatures& features,
                           std::optional<double> lambda_override) {
  const double lambda = lambda_override.value_or(bundle.fusion.lambda);
  return combine_scores(stream_scores(bundle, features), bundle.mrf.beta, lambda,
                        bundle.config.prob_epsilon, bundle.mrf.max_regions);
}

ScoreResult score_image(const DetectorBundle& bundle, const Image& image,
                        const LandmarkSet* landmarks, std::optional<double> lambda_override) {
  return score_features(bundle, extract_features(image, landmarks, bundle.config), lambda_override);
}

std::vector<StreamScores> score_streams(const DetectorBundle& bundle,
                                        std::span<const SampleRecord> records) {
  const std::vector<ImageFeatures> features = extract_all(records, bundle.config);
  std::vector<StreamScores> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    StreamScores s = stream_scores(bundle, features[i]);
    s.label = records[i].label;
    s.attack_type = records[i].attack_type;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScoredSample> fused_samples(std::span<const StreamScores> streams, double beta,
                                        double lambda, double prob_epsilon) {
  std::vector<ScoredSample> out;
  out.reserve(streams.size());
  for (const auto& s : streams) {
    out.push_back({combine_scores(s, beta, lambda, prob_epsilon).s_fused, s.label, s.attack_type});
  }
  return out;
}

TuningResult tune_parameters(std::span<const StreamScores> streams,
                             std::span<const double> beta_grid,
                             std::span<const double> lambda_grid, double prob_epsilon) {
  if (beta_grid.empty() || lambda_grid.empty()) throw InvalidInputError("tuning grids are empty");
  std::vector<int> labels;
  for (const auto& s : streams) labels.push_back(s.label);
  require_both_classes(labels);

  TuningResult best;
  bool have_best = false;
  for (double beta : beta_grid) {
    if (!(beta >= 0.0)) throw InvalidInputError("beta grid values must be >= 0");
    std::vector<double> local(streams.size());
    for (std::size_t i = 0; i < streams.size(); ++i) {
      const UnaryPotentials u = unary_from_probabilities(streams[i].region_probabilities, prob_epsilon);
      local[i] = std::clamp(local_score(exact_posterior(u, MrfModel{kRegionCount, beta})), 0.0, 1.0);
    }
    for (double lambda : lambda_grid) {
      std::vector<ScoredSample> samples;
      samples.reserve(streams.size());
      for (std::size_t i = 0; i < streams.size(); ++i) {
        samples.push_back({fuse(streams[i].s_global, local[i], FusionConfig{lambda}),
                           streams[i].label, streams[i].attack_type});
      }
      const double eer = compute_eer(samples).eer;
      best.grid.push_back({beta, lambda, eer});
      const bool better =
          !have_best || eer < best.eer ||
          (eer == best.eer && (beta < best.beta || (beta == best.beta && lambda < best.lambda)));
      if (better) {
        best.beta = beta;
        best.lambda = lambda;
        best.eer = eer;
        have_best = true;
      }
    }
  }
  return best;
}

DetectorBundle tune(const DetectorBundle& bundle, std::span<const SampleRecord> records,
                    std::span<const double> beta_grid, std::span<const double> lambda_grid) {
  const std::vector<StreamScores> streams = score_streams(bundle, records);
  const TuningResult result =
      tune_parameters(streams, beta_grid, lambda_grid, bundle.config.prob_epsilon);
  DetectorBundle out = bundle;
  out.mrf.beta = result.beta;
  out.fusion.lambda = result.lambda;
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& e : result.grid) grid.push_back({{"beta", e.beta}, {"lambda", e.lambda}, {"eer", e.eer}});
  out.metadata["tuning"] = {{"beta", result.beta},
                            {"lambda", result.lambda},
                            {"validation_eer", result.eer},
                            {"beta_grid", std::vector<double>(beta_grid.begin(), beta_grid.end())},
                            {"lambda_grid",
                             std::vector<double>(lambda_grid.begin(), lambda_grid.end())},
                            {"validation_records", records.size()},
                            {"grid", grid}};
  return out;
}

std::vector<SampleRecord> records_from_manifest(const Manifest& manifest) {
  std::vector<SampleRecord> out;
  out.reserve(manifest.records.size());
  for (const ManifestRecord& rec : manifest.records) {
    SampleRecord s;
    s.id = rec.image_path.string();
    s.label = rec.label;
    s.attack_type = rec.attack_type;
    s.load = [image_path = rec.image_path, landmark_path = rec.landmark_path] {
      LoadedSample sample;
      sample.image = read_image(image_path);
      if (!landmark_path.empty()) sample.landmarks = read_landmarks(landmark_path);
      return sample;
    };
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SampleRecord> synthetic_records(const SyntheticSetSpec& spec) {
  if (!(spec.alpha_min >= 0.0 && spec.alpha_min <= spec.alpha_max)) {
    throw InvalidInputError("synthetic alpha range is invalid");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<SampleRecord> out;
  out.reserve(2 * spec.pairs);
  char name[64];
  for (std::size_t i = 0; i < spec.pairs; ++i) {
    SynthSpec base;
    base.size = spec.size;
    base.alpha = spec.alpha_min + (spec.alpha_max - spec.alpha_min) * detail::uniform01(rng);
    base.seed = rng();
    SynthSpec perturbed = base;
    perturbed.perturbation = spec.perturbation;

    std::snprintf(name, sizeof(name), "synth_bonafide_%05zu", i);
    out.push_back({name, 1, "", [base] { return LoadedSample{power_law_image(base), std::nullopt}; }});
    std::snprintf(name, sizeof(name), "synth_morph_%05zu", i);
    out.push_back({name, 0, spec.attack_type,
                   [perturbed] { return LoadedSample{power_law_image(perturbed), std::nullopt}; }});
  }
  return out;
}

}  // namespace fmad
