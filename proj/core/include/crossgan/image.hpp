#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "crossgan/tensor.hpp"

namespace crossgan {

/// 8-bit interleaved RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Decodes a PNG or JPEG file. Throws IoError naming the path on failure.
RgbImage read_image(const std::filesystem::path& path);
/// True when the file carries a signature of a supported image format.
bool is_readable_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);

/// Bilinear resize; returns the input unchanged when already at size.
RgbImage resize_bilinear(const RgbImage& image, int width, int height);

/// v / 127.5 - 1 per channel, into planar (3, H, W) at `out`.
void normalize_into(const RgbImage& image, float* out);
/// Inverse of normalize_into for one (3, H, W) plane set: round((v+1)*127.5).
RgbImage denormalize(const float* planes, int width, int height);

struct Rgb {
  std::uint8_t r, g, b;
};

/// Filled axis-aligned rectangle with corners (x0, y0) and (x1, y1) inclusive.
void fill_rectangle(RgbImage& image, int x0, int y0, int x1, int y1, Rgb color);
/// Filled ellipse with the given center, semi-axes and rotation in degrees.
void fill_ellipse(RgbImage& image, int cx, int cy, int ax, int ay, double angle, Rgb color);

/// Item `index` of a (N, 3, H, W) batch as an image.
RgbImage batch_item(const Tensor<float>& batch, std::size_t index);

/// Tiles equally sized images into `columns` columns, separated by `gap`
/// pixels of `background` gray. Missing cells stay background.
RgbImage tile_images(const std::vector<RgbImage>& tiles, int columns, int gap = 0,
                     std::uint8_t background = 0);
/// tile_images for cells given as (row, column) positions on a fixed grid.
RgbImage place_tiles(const std::vector<std::pair<int, int>>& cells,
                     const std::vector<RgbImage>& tiles, int rows, int columns, int gap,
                     std::uint8_t background);

}  // namespace crossgan
