#include "fft.hpp"

#include <cstring>
#include <mutex>

#include <fftw3.h>

#include "fmad/error.hpp"

namespace fmad::detail {
namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void fft2(std::vector<std::complex<double>>& data, std::size_t h, std::size_t w, bool inverse) {
  if (data.size() != h * w) throw InvalidInputError("fft2: size mismatch");
  const std::size_t n = h * w;
  // fftw_malloc keeps alignment, and therefore the selected codelets, identical
  // from call to call.
  auto* buffer = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!buffer) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buffer, buffer,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  std::memcpy(buffer, data.data(), sizeof(fftw_complex) * n);
  fftw_execute(plan);
  std::memcpy(data.data(), buffer, sizeof(fftw_complex) * n);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buffer);
}

}  // namespace fmad::detail
