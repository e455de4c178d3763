#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fmad/bundle.hpp"
#include "fmad/config.hpp"
#include "fmad/evaluation.hpp"
#include "fmad/image.hpp"
#include "fmad/manifest.hpp"
#include "fmad/regions.hpp"
#include "fmad/synth.hpp"

namespace fmad {

struct LoadedSample {
  Image image;
  std::optional<LandmarkSet> landmarks;
};

// A sample whose pixels are produced on demand, so large sets never have to sit
// in memory at once.
struct SampleRecord {
  std::string id;
  int label = 0;  // 1 bona fide, 0 morph
  std::string attack_type;
  std::function<LoadedSample()> load;
};

struct ImageFeatures {
  FeatureVector global;
  std::array<FeatureVector, kRegionCount> regions;
};

struct ScoreResult {
  double s_global = 0.0;
  double s_local = 0.0;
  double s_fused = 0.0;
  std::array<double, kRegionCount> region_probabilities{};
};

// Letterboxes to config.image_size (landmarks follow the same mapping), cuts
// the four regions and computes the raw residual features.
ImageFeatures extract_features(const Image& image, const LandmarkSet* landmarks,
                               const DetectorConfig& config);

// Parallel over records; result i always belongs to record i.
std::vector<ImageFeatures> extract_all(std::span<const SampleRecord> records,
                                       const DetectorConfig& config);

// Seeded downsampling of the majority class. Returns sorted record indices.
std::vector<std::size_t> balanced_indices(std::span<const int> labels, std::uint64_t seed);

DetectorBundle train_from_features(std::span<const ImageFeatures> features,
                                   std::span<const int> labels, const DetectorConfig& config);

// Balances, extracts and fits. Throws SingleClassError before any work when a
// class is missing.
DetectorBundle train(std::span<const SampleRecord> records, const DetectorConfig& config);

// Global probability and the four region probabilities; no MRF yet.
struct StreamScores {
  double s_global = 0.0;
  std::array<double, kRegionCount> region_probabilities{};
  int label = 0;
  std::string attack_type;
};

StreamScores stream_scores(const DetectorBundle& bundle, const ImageFeatures& features);

// MRF + fusion on top of stream scores.
ScoreResult combine_scores(const StreamScores& streams, double beta, double lambda,
                           double prob_epsilon, std::size_t max_regions = kDefaultMaxRegions);

ScoreResult score_features(const DetectorBundle& bundle, const ImageFeatures& features,
                           std::optional<double> lambda_override = std::nullopt);

ScoreResult score_image(const DetectorBundle& bundle, const Image& image,
                        const LandmarkSet* landmarks,
                        std::optional<double> lambda_override = std::nullopt);

std::vector<StreamScores> score_streams(const DetectorBundle& bundle,
                                        std::span<const SampleRecord> records);

std::vector<ScoredSample> fused_samples(std::span<const StreamScores> streams, double beta,
                                        double lambda, double prob_epsilon);

struct TuningEntry {
  double beta = 0.0;
  double lambda = 0.0;
  double eer = 0.0;  // fraction
};

struct TuningResult {
  double beta = 0.0;
  double lambda = 0.0;
  double eer = 0.0;
  std::vector<TuningEntry> grid;
};

// Exhaustive grid search for the lowest EER of the fused score. Ties go to the
// smaller beta, then the smaller lambda.
TuningResult tune_parameters(std::span<const StreamScores> streams,
                             std::span<const double> beta_grid,
                             std::span<const double> lambda_grid, double prob_epsilon);

// Scores the validation records, runs tune_parameters and stores the choice and
// the grid in bundle.metadata["tuning"].
DetectorBundle tune(const DetectorBundle& bundle, std::span<const SampleRecord> records,
                    std::span<const double> beta_grid, std::span<const double> lambda_grid);

// Records backed by image files listed in a manifest.
std::vector<SampleRecord> records_from_manifest(const Manifest& manifest);

struct SyntheticSetSpec {
  std::size_t pairs = 200;  // bona fide images; each gets a perturbed counterpart
  std::size_t size = 500;
  double alpha_min = 1.6;
  double alpha_max = 2.2;
  BandPerturbation perturbation;
  std::string attack_type = "synthetic";
  std::uint64_t seed = 0;
};

// Alpha and phase seed of pair i are drawn from a seeded generator; record 2i is
// the bona fide image and 2i + 1 its perturbed counterpart.
std::vector<SampleRecord> synthetic_records(const SyntheticSetSpec& spec);

}  // namespace fmad
