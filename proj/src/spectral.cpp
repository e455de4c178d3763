#include "fmad/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "fft.hpp"
#include "fmad/error.hpp"

namespace fmad {

LogSpectrum log_magnitude_spectrum(const ImageChannel& channel) {
  validate_channel(channel);
  const std::size_t h = channel.height;
  const std::size_t w = channel.width;
  std::vector<std::complex<double>> data(channel.values.begin(), channel.values.end());
  detail::fft2(data, h, w, /*inverse=*/false);

  LogSpectrum out{h, w, std::vector<double>(h * w)};
  const std::size_t ch = h / 2;
  const std::size_t cw = w / 2;
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t dst_r = (r + ch) % h;
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t dst_c = (c + cw) % w;
      out.values[dst_r * w + dst_c] = std::log1p(std::abs(data[r * w + c]));
    }
  }
  return out;
}

std::size_t band_count(std::size_t side) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(side) / 2.0 * std::sqrt(2.0)));
}

RadialProfile radial_profile(const LogSpectrum& spectrum) {
  const std::size_t h = spectrum.height;
  const std::size_t w = spectrum.width;
  const std::size_t k_bands = band_count(std::min(h, w));
  RadialProfile profile;
  profile.band_energies.assign(k_bands, 0.0);
  profile.band_counts.assign(k_bands, 0);
  profile.frequencies.resize(k_bands);
  for (std::size_t k = 0; k < k_bands; ++k) profile.frequencies[k] = static_cast<double>(k + 1);

  const auto ch = static_cast<double>(h / 2);
  const auto cw = static_cast<double>(w / 2);
  for (std::size_t r = 0; r < h; ++r) {
    const double dy = static_cast<double>(r) - ch;
    for (std::size_t c = 0; c < w; ++c) {
      const double dx = static_cast<double>(c) - cw;
      const auto ring = static_cast<std::size_t>(std::floor(std::sqrt(dx * dx + dy * dy)));
      if (ring == 0 || ring > k_bands) continue;
      profile.band_energies[ring - 1] += spectrum.values[r * w + c];
      ++profile.band_counts[ring - 1];
    }
  }
  for (std::size_t k = 0; k < k_bands; ++k) {
    if (profile.band_counts[k] > 0) {
      profile.band_energies[k] /= static_cast<double>(profile.band_counts[k]);
    }
  }
  return profile;
}

bool band_is_usable(const RadialProfile& profile, std::size_t k) {
  return profile.band_counts[k] > 0 && profile.band_energies[k] > 0.0 &&
         std::isfinite(profile.band_energies[k]);
}

PowerLawFit fit_power_law(const RadialProfile& profile) {
  // Centered sums keep the normal equations well conditioned.
  std::size_t n = 0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (!band_is_usable(profile, k)) continue;
    mean_x += std::log(profile.frequencies[k]);
    mean_y += std::log(profile.band_energies[k]);
    ++n;
  }
  if (n < 2) throw DegenerateFitError("power-law fit needs at least two usable bands");
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (!band_is_usable(profile, k)) continue;
    const double dx = std::log(profile.frequencies[k]) - mean_x;
    const double dy = std::log(profile.band_energies[k]) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0)) throw DegenerateFitError("power-law fit: usable bands share one frequency");
  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  return fit;
}

ResidualProfile residual(const RadialProfile& profile, const PowerLawFit& fit) {
  ResidualProfile out;
  out.frequencies = profile.frequencies;
  out.residuals.assign(profile.size(), 0.0);
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (!band_is_usable(profile, k)) continue;
    out.residuals[k] = std::log(profile.band_energies[k]) -
                       (fit.intercept + fit.slope * std::log(profile.frequencies[k]));
  }
  return out;
}

ResidualProfile channel_residual(const ImageChannel& channel) {
  const RadialProfile profile = radial_profile(log_magnitude_spectrum(channel));
  return residual(profile, fit_power_law(profile));
}

}  // namespace fmad
