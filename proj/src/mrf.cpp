#include "fmad/mrf.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "fmad/error.hpp"
#include "random.hpp"

namespace fmad {

std::vector<std::pair<std::size_t, std::size_t>> MrfModel::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(region_count * (region_count - (region_count > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < region_count; ++i) {
    for (std::size_t j = i + 1; j < region_count; ++j) out.emplace_back(i, j);
  }
  return out;
}

double PosteriorTable::marginal(std::size_t region) const {
  if (region >= region_count) throw InvalidInputError("region index out of range");
  const std::uint64_t bit = std::uint64_t{1} << region;
  double m = 0.0;
  for (std::size_t z = 0; z < probabilities.size(); ++z) {
    if (z & bit) m += probabilities[z];
  }
  return m;
}

double clamp_probability(double p, double epsilon) {
  if (std::isnan(p)) throw InvalidInputError("probability is NaN");
  return std::clamp(p, epsilon, 1.0 - epsilon);
}

UnaryPotentials unary_from_probabilities(std::span<const double> probs, double epsilon) {
  UnaryPotentials u;
  u.morph.reserve(probs.size());
  u.bonafide.reserve(probs.size());
  for (double p : probs) {
    const double c = clamp_probability(p, epsilon);
    u.bonafide.push_back(-std::log(c));
    u.morph.push_back(-std::log1p(-c));
  }
  return u;
}

namespace {

void check_model(const UnaryPotentials& unaries, const MrfModel& model) {
  if (unaries.morph.size() != unaries.bonafide.size() || unaries.size() != model.region_count) {
    throw DimensionMismatchError("unary count must equal the MRF region count");
  }
  if (!(model.beta >= 0.0) || !std::isfinite(model.beta)) {
    throw InvalidInputError("beta must be finite and non-negative");
  }
}

}  // namespace

double energy(std::uint64_t mask, const UnaryPotentials& unaries, const MrfModel& model) {
  check_model(unaries, model);
  const std::size_t r_count = model.region_count;
  double e = 0.0;
  for (std::size_t r = 0; r < r_count; ++r) {
    e += (mask >> r) & 1u ? unaries.bonafide[r] : unaries.morph[r];
  }
  // Every (one, zero) pair disagrees exactly once.
  const auto ones = static_cast<std::size_t>(std::popcount(mask));
  return e + model.beta * static_cast<double>(ones * (r_count - ones));
}

double energy(std::span<const int> labels, const UnaryPotentials& unaries,
              const MrfModel& model) {
  if (labels.size() != model.region_count) {
    throw DimensionMismatchError("configuration length must equal the region count");
  }
  if (labels.size() > 64) throw CapacityError("at most 64 regions can be encoded");
  std::uint64_t mask = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] != 0 && labels[r] != 1) throw InvalidInputError("labels must be 0 or 1");
    if (labels[r]) mask |= std::uint64_t{1} << r;
  }
  return energy(mask, unaries, model);
}

PosteriorTable exact_posterior(const UnaryPotentials& unaries, const MrfModel& model) {
  check_model(unaries, model);
  const std::size_t r_count = model.region_count;
  if (r_count == 0) throw InvalidInputError("MRF needs at least one region");
  if (r_count > model.max_regions || r_count > 30) {
    throw CapacityError("exact inference over " + std::to_string(r_count) +
                        " regions exceeds the limit of " + std::to_string(model.max_regions));
  }
  const std::size_t states = std::size_t{1} << r_count;

  // Unary part: table over the low and high halves of the mask so each state
  // costs one addition instead of R.
  const std::size_t low_bits = r_count / 2;
  const std::size_t high_bits = r_count - low_bits;
  auto half_table = [&](std::size_t offset, std::size_t bits) {
    std::vector<double> t(std::size_t{1} << bits);
    for (std::size_t m = 0; m < t.size(); ++m) {
      double e = 0.0;
      for (std::size_t b = 0; b < bits; ++b) {
        e += (m >> b) & 1u ? unaries.bonafide[offset + b] : unaries.morph[offset + b];
      }
      t[m] = e;
    }
    return t;
  };
  const std::vector<double> low = half_table(0, low_bits);
  const std::vector<double> high = half_table(low_bits, high_bits);
  std::vector<double> pair_term(r_count + 1);
  for (std::size_t k = 0; k <= r_count; ++k) {
    pair_term[k] = model.beta * static_cast<double>(k * (r_count - k));
  }

  PosteriorTable table;
  table.region_count = r_count;
  table.probabilities.resize(states);
  const std::size_t low_mask = (std::size_t{1} << low_bits) - 1;
  double min_energy = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < states; ++z) {
    const double e = low[z & low_mask] + high[z >> low_bits] +
                     pair_term[static_cast<std::size_t>(std::popcount(z))];
    table.probabilities[z] = e;
    min_energy = std::min(min_energy, e);
  }
  double partition = 0.0;
  for (double& p : table.probabilities) {
    p = std::exp(-(p - min_energy));
    partition += p;
  }
  for (double& p : table.probabilities) p /= partition;
  return table;
}

double local_score(const PosteriorTable& posterior) {
  if (posterior.region_count == 0 ||
      posterior.probabilities.size() != (std::size_t{1} << posterior.region_count)) {
    throw InvalidInputError("malformed posterior table");
  }
  std::vector<double> by_ones(posterior.region_count + 1, 0.0);
  for (std::size_t z = 0; z < posterior.probabilities.size(); ++z) {
    by_ones[static_cast<std::size_t>(std::popcount(z))] += posterior.probabilities[z];
  }
  double s = 0.0;
  for (std::size_t k = 0; k < by_ones.size(); ++k) s += static_cast<double>(k) * by_ones[k];
  return s / static_cast<double>(posterior.region_count);
}

double fuse(double s_global, double s_local, const FusionConfig& config) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(config.lambda)) throw InvalidInputError("fusion weight must lie in [0, 1]");
  if (!in_unit(s_global) || !in_unit(s_local)) throw InvalidInputError("scores must lie in [0, 1]");
  return config.lambda * s_global + (1.0 - config.lambda) * s_local;
}

std::vector<BenchmarkRow> inference_benchmark(std::size_t min_r, std::size_t max_r, double beta,
                                              double min_seconds, std::uint64_t seed) {
  if (min_r == 0 || min_r > max_r) throw InvalidInputError("invalid benchmark range");
  if (max_r > kDefaultMaxRegions) {
    throw CapacityError("benchmark range exceeds R_max = " + std::to_string(kDefaultMaxRegions));
  }
  using clock = std::chrono::steady_clock;
  std::mt19937_64 rng(seed);
  std::vector<BenchmarkRow> rows;
  volatile double sink = 0.0;
  for (std::size_t r = min_r; r <= max_r; ++r) {
    std::vector<double> probs(r);
    for (double& p : probs) p = 0.05 + 0.9 * detail::uniform01(rng);
    const UnaryPotentials unaries = unary_from_probabilities(probs);
    const MrfModel model{r, beta, kDefaultMaxRegions};

    sink = sink + local_score(exact_posterior(unaries, model));  // warm-up
    std::vector<double> samples;
    const auto start = clock::now();
    while (samples.size() < 5 ||
           std::chrono::duration<double>(clock::now() - start).count() < min_seconds) {
      const auto t0 = clock::now();
      sink = sink + local_score(exact_posterior(unaries, model));
      const auto t1 = clock::now();
      samples.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size());
    rows.push_back({r, mean, std::sqrt(var), samples.size()});
  }
  return rows;
}

std::string benchmark_csv(std::span<const BenchmarkRow> rows) {
  std::ostringstream out;
  out << "R,mean_ns,std_ns,repetitions\n";
  out.precision(10);
  for (const auto& row : rows) {
    out << row.region_count << ',' << row.mean_ns << ',' << row.std_ns << ',' << row.repetitions
        << '\n';
  }
  return out.str();
}

}  // namespace fmad
