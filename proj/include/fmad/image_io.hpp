#pragma once

#include <filesystem>

#include "fmad/image.hpp"

namespace fmad {

// PNG (8 or 16 bit, gray/RGB, alpha dropped) or PFM (float32, "PF"/"Pf"),
// detected from the file signature. Gray images are replicated to RGB.
Image read_image(const std::filesystem::path& path);

// 16-bit RGB PNG; values are clamped to [0, 1] and rounded.
void write_png16(const std::filesystem::path& path, const Image& image);

// Little-endian color PFM; stores values bit-exactly up to float32 rounding.
void write_pfm(const std::filesystem::path& path, const Image& image);

}  // namespace fmad
