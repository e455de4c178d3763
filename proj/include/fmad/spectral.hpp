#pragma once

#include <cstddef>
#include <vector>

#include "fmad/image.hpp"

namespace fmad {

// Centered log-magnitude spectrum log(1 + |F(u,v)|). The DC bin sits at
// (height / 2, width / 2).
struct LogSpectrum {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

// Azimuthally averaged band energies over integer rings 1..K. Entry k holds
// ring radius k + 1; rings with no coordinates keep energy 0 and count 0.
struct RadialProfile {
  std::vector<double> band_energies;
  std::vector<double> frequencies;
  std::vector<std::size_t> band_counts;

  std::size_t size() const { return band_energies.size(); }
};

// log b = intercept + slope * log f, fitted by ordinary least squares.
struct PowerLawFit {
  double intercept = 0.0;
  double slope = 0.0;
};

struct ResidualProfile {
  std::vector<double> residuals;
  std::vector<double> frequencies;
};

// Natural-log magnitude spectrum of one channel. Throws InvalidInputError on
// non-finite values or a channel smaller than 8x8.
LogSpectrum log_magnitude_spectrum(const ImageChannel& channel);

// floor((side / 2) * sqrt(2)): rings needed to reach the spectrum corner.
std::size_t band_count(std::size_t side);

// Ring k collects the bins whose Euclidean distance to the DC bin floors to k.
// The DC ring is skipped. Non-square spectra use min(height, width) for K.
RadialProfile radial_profile(const LogSpectrum& spectrum);

// Bands usable in the log-log fit: non-empty and strictly positive energy.
bool band_is_usable(const RadialProfile& profile, std::size_t k);

// Throws DegenerateFitError when fewer than two bands are usable.
PowerLawFit fit_power_law(const RadialProfile& profile);

// r_k = log b_k - (a + b log f_k) on usable bands; 0 elsewhere so the vector
// length depends only on the image size.
ResidualProfile residual(const RadialProfile& profile, const PowerLawFit& fit);

// Convenience chain: spectrum, profile, fit, residual.
ResidualProfile channel_residual(const ImageChannel& channel);

}  // namespace fmad
