#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fmad {

inline constexpr double kDefaultProbEpsilon = 1e-12;
inline constexpr double kDefaultBeta = 0.9;
inline constexpr double kDefaultLambda = 0.6;
inline constexpr std::size_t kDefaultMaxRegions = 24;

// psi_r(z) = -log p_r(z). Index 0 holds the morph label, 1 the bona fide label.
struct UnaryPotentials {
  std::vector<double> morph;     // psi_r(0)
  std::vector<double> bonafide;  // psi_r(1)

  std::size_t size() const { return bonafide.size(); }
};

// Fully connected binary MRF with Ising agreement term beta * |z_i - z_j|.
struct MrfModel {
  std::size_t region_count = 4;
  double beta = kDefaultBeta;
  std::size_t max_regions = kDefaultMaxRegions;

  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
};

// Configuration z is encoded as a bit mask: bit r set means z_r = 1.
struct PosteriorTable {
  std::size_t region_count = 0;
  std::vector<double> probabilities;  // size 2^R

  // P(z_r = 1)
  double marginal(std::size_t region) const;
};

struct FusionConfig {
  double lambda = kDefaultLambda;
};

double clamp_probability(double p, double epsilon = kDefaultProbEpsilon);

UnaryPotentials unary_from_probabilities(std::span<const double> probs,
                                         double epsilon = kDefaultProbEpsilon);

// Sum of unaries plus beta times the number of disagreeing pairs.
double energy(std::span<const int> labels, const UnaryPotentials& unaries, const MrfModel& model);
double energy(std::uint64_t mask, const UnaryPotentials& unaries, const MrfModel& model);

// Exact enumeration over 2^R states. Energies are shifted by their minimum
// before exponentiation. Throws CapacityError when R exceeds max_regions.
PosteriorTable exact_posterior(const UnaryPotentials& unaries, const MrfModel& model);

// Expected fraction of bona fide labels.
double local_score(const PosteriorTable& posterior);

// lambda * s_global + (1 - lambda) * s_local; throws InvalidInputError when
// a score or lambda leaves [0, 1].
double fuse(double s_global, double s_local, const FusionConfig& config);

struct BenchmarkRow {
  std::size_t region_count = 0;
  double mean_ns = 0.0;
  double std_ns = 0.0;
  std::size_t repetitions = 0;
};

// Times exact_posterior + local_score on seeded random unaries for every R in
// [min_r, max_r]. Repetitions adapt so each R runs for at least min_seconds.
std::vector<BenchmarkRow> inference_benchmark(std::size_t min_r, std::size_t max_r,
                                              double beta = kDefaultBeta,
                                              double min_seconds = 0.05,
                                              std::uint64_t seed = 7);

// Columns R,mean_ns,std_ns,repetitions.
std::string benchmark_csv(std::span<const BenchmarkRow> rows);

}  // namespace fmad
