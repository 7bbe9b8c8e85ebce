#include "crossgan/image.hpp"

#include <algorithm>
#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "crossgan/error.hpp"

namespace crossgan {
namespace {

RgbImage from_bgr(const cv::Mat& bgr) {
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  RgbImage img(rgb.cols, rgb.rows);
  for (int y = 0; y < rgb.rows; ++y) {
    std::copy_n(rgb.ptr<std::uint8_t>(y), static_cast<std::size_t>(rgb.cols) * 3, img.at(0, y));
  }
  return img;
}

cv::Mat to_mat(const RgbImage& img) {
  cv::Mat m(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    std::copy_n(img.at(0, y), static_cast<std::size_t>(img.width) * 3, m.ptr<std::uint8_t>(y));
  }
  return m;
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot decode image: " + path.string());
  return from_bgr(bgr);
}

bool is_readable_image(const std::filesystem::path& path) {
  try {
    return cv::haveImageReader(path.string());
  } catch (const cv::Exception&) {
    return false;
  }
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  cv::Mat bgr;
  cv::cvtColor(to_mat(image), bgr, cv::COLOR_RGB2BGR);
  if (!cv::imwrite(path.string(), bgr)) throw IoError("cannot write PNG: " + path.string());
}

RgbImage resize_bilinear(const RgbImage& image, int width, int height) {
  if (image.width == width && image.height == height) return image;
  cv::Mat out;
  cv::resize(to_mat(image), out, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  RgbImage img(width, height);
  for (int y = 0; y < height; ++y) {
    std::copy_n(out.ptr<std::uint8_t>(y), static_cast<std::size_t>(width) * 3, img.at(0, y));
  }
  return img;
}

void normalize_into(const RgbImage& image, float* out) {
  const std::size_t plane = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      out[c * plane + i] = static_cast<float>(image.pixels[i * 3 + c] / 127.5 - 1.0);
    }
  }
}

RgbImage denormalize(const float* planes, int width, int height) {
  RgbImage img(width, height);
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = std::round((static_cast<double>(planes[c * plane + i]) + 1.0) * 127.5);
      img.pixels[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return img;
}

namespace {

template <typename Draw>
void draw_on(RgbImage& image, Draw draw) {
  cv::Mat m(image.height, image.width, CV_8UC3, image.pixels.data());
  draw(m);
}

}  // namespace

void fill_rectangle(RgbImage& image, int x0, int y0, int x1, int y1, Rgb color) {
  draw_on(image, [&](cv::Mat& m) {
    cv::rectangle(m, cv::Point(x0, y0), cv::Point(x1, y1), cv::Scalar(color.r, color.g, color.b),
                  cv::FILLED, cv::LINE_8);
  });
}

void fill_ellipse(RgbImage& image, int cx, int cy, int ax, int ay, double angle, Rgb color) {
  draw_on(image, [&](cv::Mat& m) {
    cv::ellipse(m, cv::Point(cx, cy), cv::Size(ax, ay), angle, 0, 360,
                cv::Scalar(color.r, color.g, color.b), cv::FILLED, cv::LINE_8);
  });
}

RgbImage batch_item(const Tensor<float>& batch, std::size_t index) {
  if (batch.rank() != 4 || batch.dim(1) != 3) {
    throw std::invalid_argument("expected a (N, 3, H, W) batch, got " +
                                shape_to_string(batch.shape()));
  }
  return denormalize(batch.row(index).data(), static_cast<int>(batch.dim(3)),
                     static_cast<int>(batch.dim(2)));
}

RgbImage place_tiles(const std::vector<std::pair<int, int>>& cells,
                     const std::vector<RgbImage>& tiles, int rows, int columns, int gap,
                     std::uint8_t background) {
  if (tiles.empty()) return {};
  const int tw = tiles[0].width, th = tiles[0].height;
  RgbImage out(columns * tw + (columns - 1) * gap, rows * th + (rows - 1) * gap, background);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const auto& t = tiles[i];
    if (t.width != tw || t.height != th) throw std::invalid_argument("tiles differ in size");
    const int x0 = cells[i].second * (tw + gap), y0 = cells[i].first * (th + gap);
    for (int y = 0; y < th; ++y) {
      std::copy_n(t.at(0, y), static_cast<std::size_t>(tw) * 3, out.at(x0, y0 + y));
    }
  }
  return out;
}

RgbImage tile_images(const std::vector<RgbImage>& tiles, int columns, int gap,
                     std::uint8_t background) {
  if (tiles.empty()) return {};
  const int n = static_cast<int>(tiles.size());
  const int rows = (n + columns - 1) / columns;
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < n; ++i) cells.emplace_back(i / columns, i % columns);
  return place_tiles(cells, tiles, rows, columns, gap, background);
}

}  // namespace crossgan
