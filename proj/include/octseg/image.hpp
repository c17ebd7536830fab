#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "octseg/error.hpp"

namespace octseg {

struct Size {
  int width = 0;
  int height = 0;

  friend bool operator==(const Size&, const Size&) = default;
  std::size_t area() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

// Every stage after pre-processing works on 360 rows x 480 columns.
inline constexpr Size kCanonicalSize{480, 360};

/// Row-major H x W grid of pixels. Coordinates are (x = column, y = row).
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    detail::require(width > 0 && height > 0, ErrorKind::Dimension,
                    "raster dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  explicit Raster(Size size, T fill = T{}) : Raster(size.width, size.height, fill) {}

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    detail::require(width > 0 && height > 0, ErrorKind::Dimension,
                    "raster dimensions must be positive");
    detail::require(data_.size() == static_cast<std::size_t>(width) * height,
                    ErrorKind::Dimension, "raster data length must equal width*height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Size size() const noexcept { return {width_, height_}; }
  std::size_t pixel_count() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  // Edge-replicated read.
  const T& clamped(int x, int y) const {
    return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  std::span<T> row(int y) { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int y) const {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Real intensities in [0,1].
using GrayImage = Raster<double>;
/// 0 = background, 1 = foreground.
using BinaryImage = Raster<std::uint8_t>;

struct RgbImage {
  Raster<double> red;
  Raster<double> green;
  Raster<double> blue;

  RgbImage() = default;
  RgbImage(int width, int height)
      : red(width, height), green(width, height), blue(width, height) {}

  int width() const { return red.width(); }
  int height() const { return red.height(); }
  Size size() const { return red.size(); }

  void set(int x, int y, double r, double g, double b) {
    red.at(x, y) = r;
    green.at(x, y) = g;
    blue.at(x, y) = b;
  }
};

template <typename T>
void require_same_size(const Raster<T>& a, const Raster<T>& b, const char* what) {
  if (a.size() != b.size()) detail::fail(ErrorKind::Dimension, what);
}

template <typename A, typename B>
void require_same_size(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (a.size() != b.size()) detail::fail(ErrorKind::Dimension, what);
}

inline bool in_unit_range(const GrayImage& img) {
  return std::all_of(img.pixels().begin(), img.pixels().end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

inline GrayImage to_gray(const BinaryImage& img) {
  GrayImage out(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                 [](std::uint8_t v) { return v ? 1.0 : 0.0; });
  return out;
}

// ITU-R BT.601 luma.
inline GrayImage to_grayscale(const RgbImage& rgb) {
  if (rgb.red.empty() || rgb.green.size() != rgb.red.size() ||
      rgb.blue.size() != rgb.red.size()) {
    detail::fail(ErrorKind::Dimension, "to_grayscale: channel planes differ in size");
  }
  GrayImage out(rgb.size());
  auto r = rgb.red.pixels();
  auto g = rgb.green.pixels();
  auto b = rgb.blue.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (r[i] < 0.0 || r[i] > 1.0 || g[i] < 0.0 || g[i] > 1.0 || b[i] < 0.0 || b[i] > 1.0)
      detail::fail(ErrorKind::Parameter, "to_grayscale: channel value outside [0,1]");
    const double luma = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    // The weights sum to 1 only up to rounding; keep grays exact.
    dst[i] = std::clamp(luma, std::min({r[i], g[i], b[i]}), std::max({r[i], g[i], b[i]}));
  }
  return out;
}

/// Bilinear resampling, half-pixel centres, edge clamping.
inline GrayImage resize_bilinear(const GrayImage& img, Size target = kCanonicalSize) {
  if (img.width() < 2 || img.height() < 2)
    detail::fail(ErrorKind::Dimension, "resize_bilinear: source must be at least 2x2");
  if (target.width <= 0 || target.height <= 0)
    detail::fail(ErrorKind::Dimension, "resize_bilinear: target must be positive");
  if (img.size() == target) return img;

  struct Tap {
    int lo;
    int hi;
    double frac;
  };
  auto taps = [](int src, int dst) {
    std::vector<Tap> t(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      double s = (i + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(src - 1));
      const int lo = std::min(static_cast<int>(std::floor(s)), src - 1);
      const int hi = std::min(lo + 1, src - 1);
      t[static_cast<std::size_t>(i)] = {lo, hi, s - lo};
    }
    return t;
  };
  const auto xs = taps(img.width(), target.width);
  const auto ys = taps(img.height(), target.height);

  GrayImage out(target);
  for (int y = 0; y < target.height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < target.width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      const double top = img.at(tx.lo, ty.lo) * (1.0 - tx.frac) + img.at(tx.hi, ty.lo) * tx.frac;
      const double bot = img.at(tx.lo, ty.hi) * (1.0 - tx.frac) + img.at(tx.hi, ty.hi) * tx.frac;
      out.at(x, y) = std::clamp(top * (1.0 - ty.frac) + bot * ty.frac, 0.0, 1.0);
    }
  }
  return out;
}

// Grayscale conversion followed by resize to the canonical grid.
inline GrayImage preprocess(const RgbImage& rgb) {
  return resize_bilinear(to_grayscale(rgb), kCanonicalSize);
}

inline GrayImage preprocess(const GrayImage& gray) {
  return resize_bilinear(gray, kCanonicalSize);
}

}  // namespace octseg
