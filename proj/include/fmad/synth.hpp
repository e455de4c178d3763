#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "fmad/image.hpp"

namespace fmad {

// Annulus given as fractions of the Nyquist radius (side / 2).
struct BandPerturbation {
  double band_low = 0.4;
  double band_high = 0.9;
  double amplitude = 1.0;
};

struct SynthSpec {
  std::size_t size = 256;
  double alpha = 2.0;
  std::uint64_t seed = 0;
  std::optional<BandPerturbation> perturbation;
};

// Power-law test image.
//
// Amplitude convention: the generator targets the measured quantity directly.
// Every non-DC bin at continuous radius rho gets magnitude
//   |F| = expm1(c * rho^-alpha),
// so log(1 + |F|) = c * rho^-alpha and the log-log fit of the radial profile
// has slope close to -alpha. Phases come from the DFT of seeded white noise,
// which keeps the spectrum Hermitian. c is chosen so the pixel standard
// deviation is about 0.08; the image is then shifted to sit centered in [0, 1]
// without rescaling, leaving every non-DC magnitude untouched. If the range
// still exceeds 1 it is scaled down as a fallback.
//
// Channels use independent phase draws. A perturbation in the spec is applied
// to the result with perturb_mid_high.
Image power_law_image(const SynthSpec& spec);

// Multiplies spectrum magnitudes with band_low * N/2 <= rho <= band_high * N/2
// by (1 + amplitude), transforms back and refits into [0, 1] with
// fit_into_unit_range. Throws InvalidInputError unless
// 0 < band_low < band_high <= 1 and amplitude >= 0.
Image perturb_mid_high(const Image& image, double band_low, double band_high, double amplitude);

// Scales by 1 / range when the range exceeds 1, then shifts by the smallest
// amount that brings every value into [0, 1]. Channels already inside [0, 1]
// are left untouched.
void fit_into_unit_range(ImageChannel& channel);

}  // namespace fmad
