#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace fmad {

// One real-valued image plane, row-major, nominal range [0, 1].
struct ImageChannel {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  ImageChannel() = default;
  ImageChannel(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), values(h * w, fill) {}

  double& at(std::size_t row, std::size_t col) { return values[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
  std::size_t size() const { return values.size(); }
};

// Three-channel image, channel order R, G, B.
struct Image {
  std::array<ImageChannel, 3> channels;

  std::size_t height() const { return channels[0].height; }
  std::size_t width() const { return channels[0].width; }

  static Image from_gray(const ImageChannel& gray) { return Image{{gray, gray, gray}}; }
};

// Throws InvalidInputError unless the channel is at least 8x8 and finite.
void validate_channel(const ImageChannel& channel);

// Bilinear interpolation at (x, y), where pixel (r, c) has its center at
// x = c, y = r. Coordinates are clamped to the pixel-center hull.
double sample_bilinear(const ImageChannel& channel, double x, double y);

// Bilinear resample of the whole channel to out_h x out_w (pixel-center mapping,
// edge clamped).
ImageChannel resize_bilinear(const ImageChannel& channel, std::size_t out_h, std::size_t out_w);

// Maps continuous source coordinates into the letterboxed canvas:
// x' = scale * x + offset_x.
struct LetterboxGeometry {
  double scale = 1.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
};

// Aspect-preserving resize into a side x side canvas. The scaled image is centered
// and the border is filled by replicating its edge pixels. Square inputs of the
// right size are returned unchanged.
Image letterbox(const Image& image, std::size_t side, LetterboxGeometry* geometry = nullptr);

// Rotate by 90 degrees counter-clockwise.
ImageChannel rotate90(const ImageChannel& channel);

}  // namespace fmad
