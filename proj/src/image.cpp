#include "fmad/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fmad/error.hpp"

namespace fmad {

void validate_channel(const ImageChannel& channel) {
  if (channel.height < 8 || channel.width < 8) {
    throw InvalidInputError("image channel must be at least 8x8, got " +
                            std::to_string(channel.height) + "x" + std::to_string(channel.width));
  }
  if (channel.values.size() != channel.height * channel.width) {
    throw InvalidInputError("image channel value count does not match its dimensions");
  }
  for (double v : channel.values) {
    if (!std::isfinite(v)) throw InvalidInputError("image channel contains non-finite values");
  }
}

double sample_bilinear(const ImageChannel& channel, double x, double y) {
  const double max_x = static_cast<double>(channel.width - 1);
  const double max_y = static_cast<double>(channel.height - 1);
  x = std::clamp(x, 0.0, max_x);
  y = std::clamp(y, 0.0, max_y);
  const auto c0 = static_cast<std::size_t>(std::floor(x));
  const auto r0 = static_cast<std::size_t>(std::floor(y));
  const std::size_t c1 = std::min(c0 + 1, channel.width - 1);
  const std::size_t r1 = std::min(r0 + 1, channel.height - 1);
  const double fx = x - static_cast<double>(c0);
  const double fy = y - static_cast<double>(r0);
  const double top = (1.0 - fx) * channel.at(r0, c0) + fx * channel.at(r0, c1);
  const double bottom = (1.0 - fx) * channel.at(r1, c0) + fx * channel.at(r1, c1);
  return (1.0 - fy) * top + fy * bottom;
}

ImageChannel resize_bilinear(const ImageChannel& channel, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0 || channel.height == 0 || channel.width == 0) {
    throw InvalidInputError("resize_bilinear: empty size");
  }
  if (out_h == channel.height && out_w == channel.width) return channel;
  ImageChannel out(out_h, out_w);
  const double sy = static_cast<double>(channel.height) / static_cast<double>(out_h);
  const double sx = static_cast<double>(channel.width) / static_cast<double>(out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    const double y = (static_cast<double>(r) + 0.5) * sy - 0.5;
    for (std::size_t c = 0; c < out_w; ++c) {
      const double x = (static_cast<double>(c) + 0.5) * sx - 0.5;
      out.at(r, c) = sample_bilinear(channel, x, y);
    }
  }
  return out;
}

Image letterbox(const Image& image, std::size_t side, LetterboxGeometry* geometry) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  if (h == 0 || w == 0 || side == 0) throw InvalidInputError("letterbox: empty image");
  if (h == side && w == side) {
    if (geometry) *geometry = LetterboxGeometry{};
    return image;
  }
  const double scale = static_cast<double>(side) / static_cast<double>(std::max(h, w));
  const auto scaled_h = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(static_cast<double>(h) * scale)), 1, side);
  const auto scaled_w = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(static_cast<double>(w) * scale)), 1, side);
  const std::size_t top = (side - scaled_h) / 2;
  const std::size_t left = (side - scaled_w) / 2;
  if (geometry) {
    geometry->scale = scale;
    geometry->offset_x = static_cast<double>(left);
    geometry->offset_y = static_cast<double>(top);
  }

  Image out;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const ImageChannel scaled = resize_bilinear(image.channels[ch], scaled_h, scaled_w);
    ImageChannel canvas(side, side);
    for (std::size_t r = 0; r < side; ++r) {
      const std::size_t sr = std::min(r < top ? 0 : r - top, scaled_h - 1);
      for (std::size_t c = 0; c < side; ++c) {
        const std::size_t sc = std::min(c < left ? 0 : c - left, scaled_w - 1);
        canvas.at(r, c) = scaled.at(sr, sc);
      }
    }
    out.channels[ch] = std::move(canvas);
  }
  return out;
}

ImageChannel rotate90(const ImageChannel& channel) {
  ImageChannel out(channel.width, channel.height);
  for (std::size_t r = 0; r < channel.height; ++r) {
    for (std::size_t c = 0; c < channel.width; ++c) {
      out.at(channel.width - 1 - c, r) = channel.at(r, c);
    }
  }
  return out;
}

}  // namespace fmad
