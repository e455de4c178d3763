#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace fmad::detail {

// In-place unnormalized 2-D DFT of a row-major h x w grid. The inverse
// direction does not divide by h * w.
void fft2(std::vector<std::complex<double>>& data, std::size_t h, std::size_t w, bool inverse);

}  // namespace fmad::detail
