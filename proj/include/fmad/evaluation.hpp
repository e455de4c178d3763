#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fmad {

inline constexpr std::array<double, 2> kDefaultApcerTargets = {0.01, 0.20};

// Higher score = more bona fide. Label 1 = bona fide, 0 = morph.
struct ScoredSample {
  double score = 0.0;
  int label = 0;
  std::string attack_type;
};

struct ErrorRates {
  double apcer = 0.0;  // fraction of morphs with score >= t
  double bpcer = 0.0;  // fraction of bona fide with score < t
};

struct EerResult {
  double eer = 0.0;        // fraction
  double threshold = 0.0;  // may be +/-inf at degenerate sweeps
};

struct DetPoint {
  double apcer = 0.0;
  double bpcer = 0.0;
};

// Rates are percentages in [0, 100].
struct MetricsReport {
  double eer = 0.0;
  double eer_threshold = 0.0;
  std::map<double, double> bpcer_at_apcer;  // target APCER (%) -> BPCER (%)
  std::vector<DetPoint> det_points;         // percentages
  std::size_t bonafide_count = 0;
  std::size_t attack_count = 0;
  std::map<std::string, std::size_t> attack_counts;
};

// All rates below are fractions in [0, 1]. Every function throws
// SingleClassError when either class is missing.
ErrorRates compute_rates(std::span<const ScoredSample> samples, double threshold);

// Sweeps every distinct score plus +/-inf. When no sweep point has
// APCER == BPCER, the rate is interpolated linearly between the last point with
// APCER > BPCER and the first point with APCER < BPCER.
EerResult compute_eer(std::span<const ScoredSample> samples);

// BPCER at the lowest threshold whose APCER does not exceed the target. Falls
// back to 1 when only rejecting everything meets the target.
double bpcer_at_apcer(std::span<const ScoredSample> samples, double apcer_target);

// One point per distinct threshold (every distinct score and +inf), duplicates
// removed, ordered by increasing APCER and decreasing BPCER.
std::vector<DetPoint> det_curve(std::span<const ScoredSample> samples);

// Full report in percentages with BPCER at the given APCER targets (fractions).
MetricsReport compute_metrics(std::span<const ScoredSample> samples,
                              std::span<const double> apcer_targets = kDefaultApcerTargets);

}  // namespace fmad
