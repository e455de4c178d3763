#include "fmad/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "fmad/error.hpp"

namespace fmad {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

// Keeps libpng quiet; the message ends up in the thrown exception instead.
struct PngMessage {
  std::string text;
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* m = static_cast<PngMessage*>(png_get_error_ptr(png));
  if (m) m->text = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

Image read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  PngMessage message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                           png_warning_handler);
  if (!png) throw IoError("libpng: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: cannot create info struct");
  }
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG '" + path.string() + "': " + message.text);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_bit_depth(png, info) == 16 && std::endian::native == std::endian::little) {
    png_set_swap(png);
  }
  png_read_update_info(png, info);

  const int depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  const png_size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels < 3) throw FormatError("unsupported PNG channel layout in '" + path.string() + "'");
  Image image;
  for (auto& ch : image.channels) ch = ImageChannel(height, width);
  const double max_value = depth == 16 ? 65535.0 : 255.0;
  for (png_uint_32 r = 0; r < height; ++r) {
    for (png_uint_32 c = 0; c < width; ++c) {
      for (int k = 0; k < 3; ++k) {
        const std::size_t idx = static_cast<std::size_t>(c) * static_cast<std::size_t>(channels) +
                                static_cast<std::size_t>(k);
        double v;
        if (depth == 16) {
          std::uint16_t s;
          std::memcpy(&s, rows[r] + 2 * idx, 2);
          v = s;
        } else {
          v = rows[r][idx];
        }
        image.channels[static_cast<std::size_t>(k)].at(r, c) = v / max_value;
      }
    }
  }
  return image;
}

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string magic;
  std::size_t width = 0;
  std::size_t height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  in.get();  // single whitespace before the raster
  if (!in || (magic != "PF" && magic != "Pf") || width == 0 || height == 0 || scale == 0.0) {
    throw FormatError("malformed PFM header in '" + path.string() + "'");
  }
  const std::size_t channels = magic == "PF" ? 3 : 1;
  const bool little = scale < 0.0;
  std::vector<std::uint32_t> raw(width * height * channels);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
  if (!in) throw FormatError("truncated PFM raster in '" + path.string() + "'");

  const bool swap = little != (std::endian::native == std::endian::little);
  Image image;
  for (auto& ch : image.channels) ch = ImageChannel(height, width);
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t dst_row = height - 1 - row;  // PFM stores bottom row first
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t k = 0; k < 3; ++k) {
        std::uint32_t bits = raw[(row * width + c) * channels + (channels == 3 ? k : 0)];
        if (swap) bits = __builtin_bswap32(bits);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) throw InvalidInputError("PFM contains non-finite values");
        image.channels[k].at(dst_row, c) = f;
      }
    }
  }
  return image;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char signature[8] = {};
  const std::size_t got = std::fread(signature, 1, 8, file.get());
  file.reset();
  if (got >= 8 && png_sig_cmp(signature, 0, 8) == 0) return read_png(path);
  if (got >= 2 && signature[0] == 'P' && (signature[1] == 'F' || signature[1] == 'f')) {
    return read_pfm(path);
  }
  throw FormatError("unsupported image format '" + path.string() + "' (PNG or PFM expected)");
}

void write_png16(const std::filesystem::path& path, const Image& image) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  FilePtr file = open_file(path, "wb");
  PngMessage message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                            png_warning_handler);
  if (!png) throw IoError("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng: cannot create info struct");
  }
  // Big-endian samples, as the PNG format stores them.
  std::vector<png_byte> buffer(h * w * 6);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t k = 0; k < 3; ++k) {
        const double v = std::clamp(image.channels[k].at(r, c), 0.0, 1.0);
        const auto s = static_cast<std::uint16_t>(std::lround(v * 65535.0));
        const std::size_t idx = (r * w + c) * 6 + 2 * k;
        buffer[idx] = static_cast<png_byte>(s >> 8);
        buffer[idx + 1] = static_cast<png_byte>(s & 0xff);
      }
    }
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t r = 0; r < h; ++r) rows[r] = buffer.data() + r * w * 6;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to write PNG '" + path.string() + "': " + message.text);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 16,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_pfm(const std::filesystem::path& path, const Image& image) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "PF\n" << w << ' ' << h << "\n-1.0\n";
  std::vector<std::uint32_t> raw(w * h * 3);
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t src_row = h - 1 - row;
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t k = 0; k < 3; ++k) {
        const auto f = static_cast<float>(image.channels[k].at(src_row, c));
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        if constexpr (std::endian::native != std::endian::little) bits = __builtin_bswap32(bits);
        raw[(row * w + c) * 3 + k] = bits;
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
  if (!out) throw IoError("failed to write '" + path.string() + "'");
}

}  // namespace fmad
