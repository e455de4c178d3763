#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fmad/error.hpp"
#include "fmad/spectral.hpp"
#include "oracles.hpp"

using namespace fmad;

namespace {

RadialProfile make_profile(const std::vector<double>& energies) {
  RadialProfile p;
  p.band_energies = energies;
  for (std::size_t k = 0; k < energies.size(); ++k) {
    p.frequencies.push_back(static_cast<double>(k + 1));
    p.band_counts.push_back(4 * (k + 1));
  }
  return p;
}

}  // namespace

TEST_CASE("band count follows floor of half side times sqrt 2") {
  CHECK(band_count(500) == 353);
  CHECK(band_count(128) == 90);
  CHECK(band_count(8) == 5);
  for (std::size_t n = 8; n < 700; ++n) CHECK(band_count(n + 1) >= band_count(n));
}

TEST_CASE("constant channels") {
  const ImageChannel zero(12, 16, 0.0);
  for (double v : log_magnitude_spectrum(zero).values) CHECK(v == 0.0);

  const double c = 0.37;
  const LogSpectrum s = log_magnitude_spectrum(ImageChannel(12, 16, c));
  CHECK(s.height == 12);
  CHECK(s.width == 16);
  for (std::size_t r = 0; r < 12; ++r) {
    for (std::size_t col = 0; col < 16; ++col) {
      if (r == 6 && col == 8) {
        CHECK(s.at(r, col) == doctest::Approx(std::log1p(c * 12 * 16)).epsilon(1e-14));
      } else {
        CHECK(std::abs(s.at(r, col)) < 1e-12);
      }
    }
  }
}

TEST_CASE("cosine puts energy into two symmetric bins") {
  const std::size_t n = 16;
  const std::size_t k = 3;
  ImageChannel ch(n, n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      ch.at(y, x) = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * x) / n);
    }
  }
  const LogSpectrum s = log_magnitude_spectrum(ch);
  const std::vector<double> ref = oracle::direct_log_spectrum(ch);
  std::size_t nonzero = 0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      CHECK(std::abs(s.at(r, c) - ref[r * n + c]) < 1e-9);
      if (r == n / 2 && c == n / 2) continue;
      if (s.at(r, c) > 1e-9) {
        ++nonzero;
        CHECK(r == n / 2);
        CHECK((c == n / 2 + k || c == n / 2 - k));
      }
    }
  }
  CHECK(nonzero == 2);
  CHECK(s.at(n / 2, n / 2 + k) == doctest::Approx(std::log1p(0.25 * n * n)));
}

TEST_CASE("spectrum matches direct DFT on random and non-square grids") {
  std::mt19937_64 rng(11);
  const std::vector<std::pair<std::size_t, std::size_t>> sizes = {
      {16, 16}, {16, 16}, {8, 12}, {9, 15}, {13, 8}};
  for (auto [h, w] : sizes) {
    const ImageChannel ch = oracle::random_channel(h, w, rng);
    const LogSpectrum s = log_magnitude_spectrum(ch);
    const std::vector<double> ref = oracle::direct_log_spectrum(ch);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(s.values[i] - ref[i]));
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("non-finite pixels are rejected") {
  ImageChannel ch(8, 8, 0.5);
  ch.at(3, 3) = std::nan("");
  CHECK_THROWS_AS(log_magnitude_spectrum(ch), InvalidInputError);
  CHECK_THROWS_AS(log_magnitude_spectrum(ImageChannel(4, 8, 0.5)), InvalidInputError);
}

TEST_CASE("ring counts match brute-force enumeration on 8x8") {
  const std::vector<std::size_t> ring = oracle::ring_index(8, 8);
  LogSpectrum s{8, 8, std::vector<double>(64, 0.0)};
  std::size_t ring2 = 0;
  std::size_t first = 64;
  for (std::size_t i = 0; i < 64; ++i) {
    if (ring[i] == 2) {
      ++ring2;
      first = std::min(first, i);
    }
  }
  s.values[first] = 1.0;
  const RadialProfile p = radial_profile(s);
  REQUIRE(p.size() == 5);
  for (std::size_t k = 1; k <= 5; ++k) {
    std::size_t count = 0;
    for (std::size_t r : ring) count += r == k;
    CHECK(p.band_counts[k - 1] == count);
    CHECK(p.frequencies[k - 1] == static_cast<double>(k));
  }
  CHECK(p.band_energies[1] == doctest::Approx(1.0 / static_cast<double>(ring2)).epsilon(1e-15));
  CHECK(p.band_energies[0] == 0.0);
  CHECK(p.band_energies[2] == 0.0);
}

TEST_CASE("ring-constant spectrum is reproduced") {
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{32, 32}, {24, 40}}) {
    const std::vector<std::size_t> ring = oracle::ring_index(h, w);
    auto g = [](std::size_t k) { return 1.0 + 0.1 * static_cast<double>(k * k % 7); };
    LogSpectrum s{h, w, std::vector<double>(h * w)};
    for (std::size_t i = 0; i < ring.size(); ++i) s.values[i] = g(ring[i]);
    const RadialProfile p = radial_profile(s);
    CHECK(p.size() == band_count(std::min(h, w)));
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p.band_counts[k] > 0) CHECK(p.band_energies[k] == doctest::Approx(g(k + 1)).epsilon(1e-14));
    }
  }
  const RadialProfile zero = radial_profile(LogSpectrum{16, 16, std::vector<double>(256, 0.0)});
  for (double b : zero.band_energies) CHECK(b == 0.0);
}

TEST_CASE("power-law fit examples") {
  std::vector<double> e;
  for (std::size_t k = 1; k <= 40; ++k) e.push_back(std::exp(3.0) * std::pow(double(k), -1.8));
  const RadialProfile exact = make_profile(e);
  const PowerLawFit fit = fit_power_law(exact);
  CHECK(std::abs(fit.intercept - 3.0) < 1e-9);
  CHECK(std::abs(fit.slope + 1.8) < 1e-9);
  for (double r : residual(exact, fit).residuals) CHECK(std::abs(r) < 1e-9);

  const RadialProfile flat = make_profile(std::vector<double>(10, 2.5));
  const PowerLawFit flat_fit = fit_power_law(flat);
  CHECK(std::abs(flat_fit.slope) < 1e-12);
  CHECK(flat_fit.intercept == doctest::Approx(std::log(2.5)).epsilon(1e-12));
  for (double r : residual(flat, flat_fit).residuals) CHECK(std::abs(r) < 1e-12);

  const RadialProfile two = make_profile({std::exp(2.0), std::exp(1.0)});
  const PowerLawFit two_fit = fit_power_law(two);
  CHECK(two_fit.slope == doctest::Approx(-1.0 / std::log(2.0)).epsilon(1e-12));
  CHECK(two_fit.intercept == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("unusable bands are skipped and zeroed") {
  RadialProfile p = make_profile({1.0, 0.0, 0.5, -1.0, 0.25, 0.2});
  p.band_counts[5] = 0;
  const PowerLawFit fit = fit_power_law(p);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k : {0, 2, 4}) {
    x.push_back(std::log(p.frequencies[k]));
    y.push_back(std::log(p.band_energies[k]));
  }
  const auto [a, b] = oracle::ols_line(x, y);
  CHECK(fit.intercept == doctest::Approx(a).epsilon(1e-12));
  CHECK(fit.slope == doctest::Approx(b).epsilon(1e-12));
  const ResidualProfile r = residual(p, fit);
  CHECK(r.residuals[1] == 0.0);
  CHECK(r.residuals[3] == 0.0);
  CHECK(r.residuals[5] == 0.0);

  CHECK_THROWS_AS(fit_power_law(make_profile({1.0, 0.0, 0.0})), DegenerateFitError);
}

TEST_CASE("bump residual agrees with an independent least-squares oracle") {
  std::vector<double> e;
  for (std::size_t k = 1; k <= 60; ++k) e.push_back(std::exp(1.2) * std::pow(double(k), -2.1));
  const std::size_t bump = 37;
  const double delta = 0.3;
  e[bump] *= std::exp(delta);
  const RadialProfile p = make_profile(e);
  const ResidualProfile r = residual(p, fit_power_law(p));

  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = 0; k < e.size(); ++k) {
    x.push_back(std::log(double(k + 1)));
    y.push_back(std::log(e[k]));
  }
  const auto [a, b] = oracle::ols_line(x, y);
  for (std::size_t k = 0; k < e.size(); ++k) {
    CHECK(r.residuals[k] == doctest::Approx(y[k] - a - b * x[k]).epsilon(1e-10));
  }
  CHECK(r.residuals[bump] == doctest::Approx(delta).epsilon(0.05));
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (k != bump) CHECK(std::abs(r.residuals[k]) < 0.05);
  }
}

TEST_CASE("residuals are orthogonal to 1 and log f") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> e(30 + trial);
    for (double& v : e) v = u(rng);
    const RadialProfile p = make_profile(e);
    const ResidualProfile r = residual(p, fit_power_law(p));
    double s0 = 0.0;
    double s1 = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      s0 += r.residuals[k];
      s1 += r.residuals[k] * std::log(p.frequencies[k]);
      scale += std::abs(r.residuals[k]) * (1.0 + std::log(p.frequencies[k]));
    }
    CHECK(std::abs(s0) <= 1e-6 * scale);
    CHECK(std::abs(s1) <= 1e-6 * scale);
  }
}

TEST_CASE("scaling band energies only moves the intercept") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<double> e(50);
  for (double& v : e) v = u(rng);
  const RadialProfile p = make_profile(e);
  const PowerLawFit fit = fit_power_law(p);
  const ResidualProfile r = residual(p, fit);
  for (double s : {0.01, 3.0, 1e4}) {
    RadialProfile q = p;
    for (double& v : q.band_energies) v *= s;
    const PowerLawFit qf = fit_power_law(q);
    CHECK(std::abs(qf.intercept - fit.intercept - std::log(s)) < 1e-9);
    CHECK(std::abs(qf.slope - fit.slope) < 1e-9);
    const ResidualProfile qr = residual(q, qf);
    for (std::size_t k = 0; k < e.size(); ++k) CHECK(std::abs(qr.residuals[k] - r.residuals[k]) < 1e-9);
  }
}

TEST_CASE("radial profile is invariant to 90 degree rotation") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {16, 17, 32}) {
    const ImageChannel ch = oracle::random_channel(n, n, rng);
    const RadialProfile a = radial_profile(log_magnitude_spectrum(ch));
    const RadialProfile b = radial_profile(log_magnitude_spectrum(rotate90(ch)));
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a.band_counts[k] == b.band_counts[k]);
      CHECK(std::abs(a.band_energies[k] - b.band_energies[k]) < 1e-12);
    }
  }
}
