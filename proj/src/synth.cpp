#include "fmad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <vector>

#include "fft.hpp"
#include "fmad/error.hpp"
#include "random.hpp"

namespace fmad {
namespace {

constexpr double kTargetPixelStd = 0.08;

// Signed offset of raw DFT index i from the centered DC position.
std::ptrdiff_t centered_offset(std::size_t i, std::size_t n) {
  return static_cast<std::ptrdiff_t>((i + n / 2) % n) - static_cast<std::ptrdiff_t>(n / 2);
}

// Squared radius of every raw DFT bin.
std::vector<std::size_t> squared_radii(std::size_t h, std::size_t w) {
  std::vector<std::size_t> out(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    const auto dr = centered_offset(r, h);
    for (std::size_t c = 0; c < w; ++c) {
      const auto dc = centered_offset(c, w);
      out[r * w + c] = static_cast<std::size_t>(dr * dr + dc * dc);
    }
  }
  return out;
}

// Pixel standard deviation implied by |F| = expm1(c * rho^-alpha), by Parseval.
double implied_std(double c, std::span<const std::size_t> counts, std::span<const double> decay,
                   double n_pixels) {
  double energy = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double m = std::expm1(c * decay[i]);
    energy += static_cast<double>(counts[i]) * m * m;
  }
  return std::sqrt(energy) / n_pixels;
}

double solve_scale(std::span<const std::size_t> counts, std::span<const double> decay,
                   double n_pixels) {
  double lo = 0.0;
  double hi = 1.0;
  while (implied_std(hi, counts, decay, n_pixels) < kTargetPixelStd) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (implied_std(mid, counts, decay, n_pixels) < kTargetPixelStd) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

void center_in_unit_range(ImageChannel& channel) {
  auto [mn, mx] = std::minmax_element(channel.values.begin(), channel.values.end());
  double lo = *mn;
  double range = *mx - lo;
  if (range > 1.0) {
    for (double& v : channel.values) v /= range;
    lo /= range;
    range = 1.0;
  }
  const double shift = 0.5 * (1.0 - range) - lo;
  for (double& v : channel.values) v += shift;
}

}  // namespace

void fit_into_unit_range(ImageChannel& channel) {
  if (channel.values.empty()) return;
  auto [mn, mx] = std::minmax_element(channel.values.begin(), channel.values.end());
  double lo = *mn;
  double hi = *mx;
  if (hi - lo > 1.0) {
    const double range = hi - lo;
    for (double& v : channel.values) v /= range;
    lo /= range;
    hi /= range;
  }
  double shift = 0.0;
  if (lo < 0.0) shift = -lo;
  else if (hi > 1.0) shift = 1.0 - hi;
  if (shift != 0.0) {
    for (double& v : channel.values) v += shift;
  }
}

Image power_law_image(const SynthSpec& spec) {
  if (spec.size < 32) throw InvalidInputError("synthetic images need size >= 32");
  if (!(spec.alpha >= 0.0) || !std::isfinite(spec.alpha)) {
    throw InvalidInputError("spectral decay exponent must be finite and non-negative");
  }
  const std::size_t n = spec.size;
  const auto n_pixels = static_cast<double>(n * n);
  const std::vector<std::size_t> radii2 = squared_radii(n, n);

  // rho^-alpha tabulated per distinct squared radius.
  const std::size_t max_r2 = *std::max_element(radii2.begin(), radii2.end());
  std::vector<std::size_t> counts(max_r2 + 1, 0);
  for (std::size_t r2 : radii2) ++counts[r2];
  counts[0] = 0;  // DC carries the mean only
  std::vector<double> decay(max_r2 + 1, 0.0);
  for (std::size_t r2 = 1; r2 <= max_r2; ++r2) {
    if (counts[r2]) decay[r2] = std::pow(static_cast<double>(r2), -0.5 * spec.alpha);
  }
  const double scale = solve_scale(counts, decay, n_pixels);
  std::vector<double> magnitude_by_r2(max_r2 + 1, 0.0);
  for (std::size_t r2 = 1; r2 <= max_r2; ++r2) {
    if (counts[r2]) magnitude_by_r2[r2] = std::expm1(scale * decay[r2]);
  }

  std::mt19937_64 rng(spec.seed);
  Image image;
  std::vector<std::complex<double>> data(n * n);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (auto& v : data) v = detail::uniform01(rng) - 0.5;
    detail::fft2(data, n, n, /*inverse=*/false);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double m = magnitude_by_r2[radii2[i]];
      const double a = std::abs(data[i]);
      data[i] = a > 0.0 ? data[i] * (m / a) : std::complex<double>(m, 0.0);
    }
    detail::fft2(data, n, n, /*inverse=*/true);
    ImageChannel channel(n, n);
    for (std::size_t i = 0; i < data.size(); ++i) channel.values[i] = data[i].real() / n_pixels;
    center_in_unit_range(channel);
    image.channels[ch] = std::move(channel);
  }

  if (spec.perturbation) {
    const BandPerturbation& p = *spec.perturbation;
    return perturb_mid_high(image, p.band_low, p.band_high, p.amplitude);
  }
  return image;
}

Image perturb_mid_high(const Image& image, double band_low, double band_high, double amplitude) {
  if (!(band_low > 0.0 && band_low < band_high && band_high <= 1.0)) {
    throw InvalidInputError("perturbation band must satisfy 0 < low < high <= 1");
  }
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw InvalidInputError("perturbation amplitude must be finite and non-negative");
  }
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const double nyquist = 0.5 * static_cast<double>(std::min(h, w));
  const double r_lo = band_low * nyquist;
  const double r_hi = band_high * nyquist;
  const std::vector<std::size_t> radii2 = squared_radii(h, w);
  const auto n_pixels = static_cast<double>(h * w);

  Image out;
  std::vector<std::complex<double>> data(h * w);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    validate_channel(image.channels[ch]);
    std::copy(image.channels[ch].values.begin(), image.channels[ch].values.end(), data.begin());
    detail::fft2(data, h, w, /*inverse=*/false);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double rho = std::sqrt(static_cast<double>(radii2[i]));
      if (rho >= r_lo && rho <= r_hi) data[i] *= 1.0 + amplitude;
    }
    detail::fft2(data, h, w, /*inverse=*/true);
    ImageChannel channel(h, w);
    for (std::size_t i = 0; i < data.size(); ++i) channel.values[i] = data[i].real() / n_pixels;
    fit_into_unit_range(channel);
    out.channels[ch] = std::move(channel);
  }
  return out;
}

}  // namespace fmad
