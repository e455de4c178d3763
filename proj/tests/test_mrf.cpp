#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "fmad/error.hpp"
#include "fmad/mrf.hpp"

using namespace fmad;

namespace {

PosteriorTable posterior(const std::vector<double>& p, double beta) {
  return exact_posterior(unary_from_probabilities(p), MrfModel{p.size(), beta});
}

}  // namespace

TEST_CASE("unary potentials") {
  const UnaryPotentials half = unary_from_probabilities(std::vector<double>{0.5});
  CHECK(half.bonafide[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(half.morph[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const UnaryPotentials sure = unary_from_probabilities(std::vector<double>{1.0});
  CHECK(sure.bonafide[0] == doctest::Approx(-std::log1p(-1e-12)).epsilon(1e-6));
  CHECK(std::isfinite(sure.morph[0]));
  CHECK(sure.morph[0] == doctest::Approx(-std::log(1e-12)).epsilon(1e-6));

  const UnaryPotentials inv_e = unary_from_probabilities(std::vector<double>{std::exp(-1.0)});
  CHECK(inv_e.bonafide[0] == 1.0);
  CHECK(clamp_probability(-3.0) == 1e-12);
}

TEST_CASE("energy examples") {
  const UnaryPotentials u = unary_from_probabilities(std::vector<double>{0.9, 0.2, 0.6, 0.3});
  const MrfModel model{4, 0.7};
  const double unary_sum = u.bonafide[0] + u.morph[1] + u.morph[2] + u.morph[3];
  CHECK(energy(std::vector<int>{1, 0, 0, 0}, u, model) == doctest::Approx(unary_sum + 3 * 0.7));
  const double all_one = u.bonafide[0] + u.bonafide[1] + u.bonafide[2] + u.bonafide[3];
  CHECK(energy(std::vector<int>{1, 1, 1, 1}, u, model) == doctest::Approx(all_one));
  CHECK(energy(std::vector<int>{1, 0, 0, 0}, u, MrfModel{4, 0.0}) == doctest::Approx(unary_sum));
  CHECK(model.edges().size() == 6);
  CHECK_THROWS_AS(energy(std::vector<int>{1, 0}, u, model), DimensionMismatchError);

  // Pair count by enumeration over edges.
  for (std::uint64_t z = 0; z < 16; ++z) {
    double pairs = 0.0;
    for (auto [i, j] : model.edges()) pairs += ((z >> i) & 1) != ((z >> j) & 1);
    double unary = 0.0;
    for (std::size_t r = 0; r < 4; ++r) unary += (z >> r) & 1 ? u.bonafide[r] : u.morph[r];
    CHECK(energy(z, u, model) == doctest::Approx(unary + 0.7 * pairs).epsilon(1e-14));
  }
}

TEST_CASE("independent regions factorize") {
  const std::vector<double> p = {0.9, 0.1, 0.5, 0.5};
  const PosteriorTable t = posterior(p, 0.0);
  for (std::size_t z = 0; z < 16; ++z) {
    double prod = 1.0;
    for (std::size_t r = 0; r < 4; ++r) prod *= (z >> r) & 1 ? p[r] : 1.0 - p[r];
    CHECK(std::abs(t.probabilities[z] - prod) < 1e-12);
  }
  CHECK(local_score(t) == doctest::Approx(0.5).epsilon(1e-12));

  const PosteriorTable one = posterior({0.37}, 2.0);
  CHECK(one.probabilities[1] == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("two-region worked example against hand enumeration") {
  const double e = std::exp(-0.9);
  const double z = 0.54 + 0.36 * e + 0.06 * e + 0.04;
  const PosteriorTable t = posterior({0.9, 0.6}, 0.9);
  CHECK(t.probabilities[3] == doctest::Approx(0.54 / z).epsilon(1e-12));
  CHECK(t.probabilities[1] == doctest::Approx(0.36 * e / z).epsilon(1e-12));
  CHECK(t.probabilities[2] == doctest::Approx(0.06 * e / z).epsilon(1e-12));
  CHECK(t.probabilities[0] == doctest::Approx(0.04 / z).epsilon(1e-12));
  const double s = local_score(t);
  CHECK(std::abs(s - 0.8330) <= 1e-4);
  CHECK(s == doctest::Approx((0.54 + 0.5 * (0.36 + 0.06) * e) / z).epsilon(1e-12));
}

TEST_CASE("normalization, marginal identity and strong coupling") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double beta : {0.0, 0.9, 5.0, 50.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> p(4 + trial % 5);
      for (double& v : p) v = u(rng);
      const PosteriorTable t = posterior(p, beta);
      const double total = std::accumulate(t.probabilities.begin(), t.probabilities.end(), 0.0);
      CHECK(std::abs(total - 1.0) <= 1e-12);
      double marg = 0.0;
      for (std::size_t r = 0; r < p.size(); ++r) marg += t.marginal(r);
      CHECK(std::abs(local_score(t) - marg / static_cast<double>(p.size())) <= 1e-12);
      if (beta == 50.0) {
        CHECK(t.probabilities.front() + t.probabilities.back() > 1.0 - 1e-6);
      }
    }
  }
}

TEST_CASE("equal probabilities") {
  // s_local = q holds without coupling, and for q = 0.5 by the flip symmetry
  // z -> 1 - z. Otherwise coupling pulls the score toward the majority label.
  for (double q : {0.2, 0.5, 0.8}) {
    CHECK(std::abs(local_score(posterior({q, q, q, q}, 0.0)) - q) <= 1e-10);
  }
  for (double beta : {0.3, 0.9, 5.0, 50.0}) {
    CHECK(std::abs(local_score(posterior({0.5, 0.5, 0.5, 0.5}, beta)) - 0.5) <= 1e-10);
    CHECK(local_score(posterior({0.8, 0.8, 0.8, 0.8}, beta)) > 0.8);
    CHECK(local_score(posterior({0.2, 0.2, 0.2, 0.2}, beta)) < 0.2);
  }
  // Enumeration by number of ones for q = 0.8, beta = 0.9.
  double num = 0.0;
  double den = 0.0;
  const double binom[5] = {1, 4, 6, 4, 1};
  for (int k = 0; k <= 4; ++k) {
    const double w = binom[k] * std::pow(0.8, k) * std::pow(0.2, 4 - k) * std::exp(-0.9 * k * (4 - k));
    num += w * k / 4.0;
    den += w;
  }
  CHECK(local_score(posterior({0.8, 0.8, 0.8, 0.8}, 0.9)) == doctest::Approx(num / den).epsilon(1e-12));
}

TEST_CASE("monotone consensus") {
  double prev = -1.0;
  for (double beta : {0.0, 0.3, 0.9, 3.0, 10.0}) {
    const double s = local_score(posterior({0.9, 0.9, 0.9, 0.2}, beta));
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("permutation equivariance") {
  std::vector<double> p = {0.15, 0.7, 0.95, 0.4, 0.55};
  const PosteriorTable base = posterior(p, 1.3);
  std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[perm[i]];
  const PosteriorTable moved = posterior(q, 1.3);
  CHECK(local_score(moved) == doctest::Approx(local_score(base)).epsilon(1e-14));
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(moved.marginal(i) == doctest::Approx(base.marginal(perm[i])).epsilon(1e-12));
  }
}

TEST_CASE("extreme inputs stay finite") {
  for (double beta : {0.0, 10.0, 100.0}) {
    const PosteriorTable t = posterior({0.0, 1.0, 1e-300, 1.0 - 1e-17}, beta);
    for (double v : t.probabilities) CHECK(std::isfinite(v));
    CHECK(std::isfinite(local_score(t)));
  }
}

TEST_CASE("capacity and argument checks") {
  const UnaryPotentials u = unary_from_probabilities(std::vector<double>(25, 0.5));
  CHECK_THROWS_AS(exact_posterior(u, MrfModel{25, 0.9}), CapacityError);
  CHECK_THROWS_AS(exact_posterior(u, MrfModel{4, 0.9}), DimensionMismatchError);
  CHECK_THROWS_AS(exact_posterior(unary_from_probabilities(std::vector<double>{0.5}), MrfModel{1, -1.0}),
                  InvalidInputError);
}

TEST_CASE("fusion") {
  CHECK(fuse(0.5, 1.0, FusionConfig{0.6}) == doctest::Approx(0.7).epsilon(1e-15));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double g = u(rng);
    const double l = u(rng);
    CHECK(fuse(g, l, FusionConfig{1.0}) == g);
    CHECK(fuse(g, l, FusionConfig{0.0}) == l);
  }
  CHECK_THROWS_AS(fuse(1.2, 0.5, FusionConfig{0.5}), InvalidInputError);
  CHECK_THROWS_AS(fuse(0.2, 0.5, FusionConfig{1.5}), InvalidInputError);
}

TEST_CASE("benchmark rows and CSV") {
  const auto rows = inference_benchmark(2, 10, 0.9, 0.002);
  REQUIRE(rows.size() == 9);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].region_count == i + 2);
    CHECK(rows[i].repetitions >= 5);
    CHECK(rows[i].mean_ns > 0.0);
  }
  const std::string csv = benchmark_csv(rows);
  CHECK(csv.rfind("R,mean_ns,std_ns,repetitions\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  CHECK_THROWS_AS(inference_benchmark(4, 25), CapacityError);
}
