#pragma once

// Minimal libpng wrappers: grayscale/RGB writes for exports and grayscale
// reads for dataset ingestion. Deterministic output (no time chunk).

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "specpol/core.hpp"

namespace specpol {

struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // [0, 1]
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

/// Write rows of 8- or 16-bit samples; channels is 1 (gray) or 3 (RGB).
inline void write_png(const std::string& path, const std::vector<std::uint16_t>& samples,
                      int height, int width, int channels, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw config_error("write_png: bit depth 8 or 16");
  if (channels != 1 && channels != 3) throw config_error("write_png: 1 or 3 channels");
  if (samples.size() != static_cast<std::size_t>(height) * width * channels) {
    throw shape_error("write_png: sample count mismatch");
  }
  detail::FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw format_error("write_png: cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw format_error("write_png: libpng failure for " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t row_samples = static_cast<std::size_t>(width) * channels;
  if (bit_depth == 8) {
    std::vector<png_byte> row(row_samples);
    for (int y = 0; y < height; ++y) {
      for (std::size_t i = 0; i < row_samples; ++i) {
        row[i] = static_cast<png_byte>(samples[static_cast<std::size_t>(y) * row_samples + i]);
      }
      png_write_row(png, row.data());
    }
  } else {
    std::vector<png_byte> row(row_samples * 2);
    for (int y = 0; y < height; ++y) {
      for (std::size_t i = 0; i < row_samples; ++i) {
        const std::uint16_t v = samples[static_cast<std::size_t>(y) * row_samples + i];
        row[2 * i] = static_cast<png_byte>(v >> 8);  // network byte order
        row[2 * i + 1] = static_cast<png_byte>(v & 0xff);
      }
      png_write_row(png, row.data());
    }
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

/// Convenience: write doubles in [0,1] as gray PNG.
inline void write_gray_png(const std::string& path, const std::vector<double>& data,
                           int height, int width, int bit_depth = 8) {
  const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
  std::vector<std::uint16_t> samples(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    double v = data[i];
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    samples[i] = static_cast<std::uint16_t>(v * maxval + 0.5);
  }
  write_png(path, samples, height, width, 1, bit_depth);
}

/// Interleave planar [0,1] RGB doubles and write.
inline void write_rgb_png(const std::string& path, const std::vector<double>& r,
                          const std::vector<double>& g, const std::vector<double>& b,
                          int height, int width, int bit_depth = 8) {
  const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  std::vector<std::uint16_t> samples(plane * 3);
  auto put = [&](const std::vector<double>& chan, std::size_t offset) {
    for (std::size_t i = 0; i < plane; ++i) {
      double v = chan[i];
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      samples[3 * i + offset] = static_cast<std::uint16_t>(v * maxval + 0.5);
    }
  };
  put(r, 0);
  put(g, 1);
  put(b, 2);
  write_png(path, samples, height, width, 3, bit_depth);
}

/// Read any PNG as grayscale in [0,1] (RGB inputs are averaged).
inline GrayImage read_gray_png(const std::string& path) {
  detail::FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw format_error("read_png: cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("read_png: libpng failure for " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int bit_depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> row(rowbytes);

  GrayImage out;
  out.height = height;
  out.width = width;
  out.data.assign(static_cast<std::size_t>(height) * width, 0.0);
  const double maxval = depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        const std::size_t i = static_cast<std::size_t>(x) * channels + c;
        const double v = depth == 16 ? (row[2 * i] << 8 | row[2 * i + 1]) : row[i];
        acc += v;
      }
      out.data[static_cast<std::size_t>(y) * width + x] = acc / (channels * maxval);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

/// Cyclic AoLP colormap: hue runs once around the HSV wheel as the angle
/// runs over (-pi/2, pi/2], full saturation and value.
inline void aolp_to_rgb(double aolp, double& r, double& g, double& b) {
  const double hue = (aolp + M_PI / 2.0) / M_PI;  // [0, 1)
  const double h6 = hue * 6.0;
  const int sector = static_cast<int>(h6) % 6;
  const double f = h6 - std::floor(h6);
  switch (sector) {
    case 0: r = 1; g = f; b = 0; break;
    case 1: r = 1 - f; g = 1; b = 0; break;
    case 2: r = 0; g = 1; b = f; break;
    case 3: r = 0; g = 1 - f; b = 1; break;
    case 4: r = f; g = 0; b = 1; break;
    default: r = 1; g = 0; b = 1 - f; break;
  }
}

}  // namespace specpol
