#include "fmad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fmad/error.hpp"

namespace fmad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sorted scores per class; rates at any threshold by binary search.
struct SplitScores {
  std::vector<double> bonafide;
  std::vector<double> morph;

  explicit SplitScores(std::span<const ScoredSample> samples) {
    for (const auto& s : samples) {
      if (!std::isfinite(s.score)) throw InvalidInputError("scores must be finite");
      if (s.label == 1) bonafide.push_back(s.score);
      else if (s.label == 0) morph.push_back(s.score);
      else throw InvalidInputError("labels must be 0 or 1");
    }
    if (bonafide.empty() || morph.empty()) {
      throw SingleClassError("metrics need both bona fide and morph samples");
    }
    std::sort(bonafide.begin(), bonafide.end());
    std::sort(morph.begin(), morph.end());
  }

  ErrorRates at(double t) const {
    const auto morph_below = std::lower_bound(morph.begin(), morph.end(), t) - morph.begin();
    const auto bona_below = std::lower_bound(bonafide.begin(), bonafide.end(), t) - bonafide.begin();
    return {static_cast<double>(morph.size() - static_cast<std::size_t>(morph_below)) /
                static_cast<double>(morph.size()),
            static_cast<double>(bona_below) / static_cast<double>(bonafide.size())};
  }

  // Ascending: -inf, every distinct score, +inf.
  std::vector<double> thresholds() const {
    std::vector<double> t;
    t.reserve(bonafide.size() + morph.size() + 2);
    t.push_back(-kInf);
    t.insert(t.end(), bonafide.begin(), bonafide.end());
    t.insert(t.end(), morph.begin(), morph.end());
    t.push_back(kInf);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
  }
};

constexpr double kTargetSlack = 1e-12;

}  // namespace

ErrorRates compute_rates(std::span<const ScoredSample> samples, double threshold) {
  return SplitScores(samples).at(threshold);
}

EerResult compute_eer(std::span<const ScoredSample> samples) {
  const SplitScores split(samples);
  const std::vector<double> thresholds = split.thresholds();
  ErrorRates prev = split.at(thresholds.front());
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    const ErrorRates cur = split.at(thresholds[i]);
    const double d_prev = prev.apcer - prev.bpcer;
    const double d_cur = cur.apcer - cur.bpcer;
    if (d_cur == 0.0) return {cur.apcer, thresholds[i]};
    if (d_cur < 0.0) {
      const double s = d_prev / (d_prev - d_cur);
      const double eer = prev.apcer + s * (cur.apcer - prev.apcer);
      double t;
      if (std::isfinite(thresholds[i - 1]) && std::isfinite(thresholds[i])) {
        t = thresholds[i - 1] + s * (thresholds[i] - thresholds[i - 1]);
      } else {
        t = std::isfinite(thresholds[i]) ? thresholds[i] : thresholds[i - 1];
      }
      return {eer, t};
    }
    prev = cur;
  }
  // Unreachable: the +inf threshold always has APCER 0 < BPCER 1.
  return {prev.apcer, kInf};
}

double bpcer_at_apcer(std::span<const ScoredSample> samples, double apcer_target) {
  if (!(apcer_target >= 0.0 && apcer_target <= 1.0)) {
    throw InvalidInputError("APCER target must lie in [0, 1]");
  }
  const SplitScores split(samples);
  for (double t : split.thresholds()) {
    const ErrorRates r = split.at(t);
    if (r.apcer <= apcer_target + kTargetSlack) return r.bpcer;
  }
  return 1.0;
}

std::vector<DetPoint> det_curve(std::span<const ScoredSample> samples) {
  const SplitScores split(samples);
  std::vector<double> thresholds = split.thresholds();
  thresholds.erase(thresholds.begin());  // -inf duplicates the lowest score
  std::vector<DetPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    const ErrorRates r = split.at(t);
    points.push_back({r.apcer, r.bpcer});
  }
  std::sort(points.begin(), points.end(), [](const DetPoint& a, const DetPoint& b) {
    return a.apcer != b.apcer ? a.apcer < b.apcer : a.bpcer > b.bpcer;
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const DetPoint& a, const DetPoint& b) {
                             return a.apcer == b.apcer && a.bpcer == b.bpcer;
                           }),
               points.end());
  return points;
}

MetricsReport compute_metrics(std::span<const ScoredSample> samples,
                              std::span<const double> apcer_targets) {
  MetricsReport report;
  const EerResult eer = compute_eer(samples);
  report.eer = 100.0 * eer.eer;
  report.eer_threshold = eer.threshold;
  for (double target : apcer_targets) {
    report.bpcer_at_apcer[100.0 * target] = 100.0 * bpcer_at_apcer(samples, target);
  }
  for (const DetPoint& p : det_curve(samples)) {
    report.det_points.push_back({100.0 * p.apcer, 100.0 * p.bpcer});
  }
  for (const auto& s : samples) {
    if (s.label == 1) {
      ++report.bonafide_count;
    } else {
      ++report.attack_count;
      ++report.attack_counts[s.attack_type];
    }
  }
  return report;
}

}  // namespace fmad
