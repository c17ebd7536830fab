#pragma once

#include <array>
#include <cstdint>

#include "octseg/image.hpp"

namespace octseg::filters {

/// Mean over a window x window neighbourhood with edge replication.
/// Separable; each output sums its window in a fixed order.
inline GrayImage box_mean(const GrayImage& img, int window) {
  const int r = window / 2;
  const int w = img.width();
  const int h = img.height();
  GrayImage rows(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += img.clamped(x + i, y);
      rows.at(x, y) = acc;
    }
  GrayImage out(w, h);
  const double norm = 1.0 / (static_cast<double>(window) * window);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += rows.clamped(x, y + i);
      out.at(x, y) = acc * norm;
    }
  return out;
}

/// Foreground where a pixel is brighter than its local mean plus `offset`.
inline BinaryImage adaptive_threshold_bright(const GrayImage& img, int window, double offset) {
  if (window < 3 || window % 2 == 0 || window > std::min(img.width(), img.height()))
    detail::fail(ErrorKind::Parameter,
                 "adaptive_threshold_bright: window must be odd, >= 3 and fit the image");
  const GrayImage mean = box_mean(img, window);
  BinaryImage out(img.size());
  auto src = img.pixels();
  auto mu = mean.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] > mu[i] + offset ? 1 : 0;
  return out;
}

inline constexpr int kHistogramBins = 256;

inline int histogram_bin(double v) {
  return std::clamp(static_cast<int>(v * kHistogramBins), 0, kHistogramBins - 1);
}

/// Otsu's threshold as a bin index k: the lower class is bins [0, k].
/// Returns -1 when fewer than two bins are occupied.
inline int otsu_threshold_bin(const GrayImage& img) {
  std::array<double, kHistogramBins> hist{};
  for (double v : img.pixels()) hist[static_cast<std::size_t>(histogram_bin(v))] += 1.0;
  const int occupied = static_cast<int>(std::count_if(hist.begin(), hist.end(),
                                                      [](double c) { return c > 0.0; }));
  if (occupied < 2) return -1;

  const double total = static_cast<double>(img.pixel_count());
  double sum_all = 0.0;
  for (int k = 0; k < kHistogramBins; ++k) sum_all += k * hist[static_cast<std::size_t>(k)];

  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_k = -1;
  for (int k = 0; k < kHistogramBins - 1; ++k) {
    w0 += hist[static_cast<std::size_t>(k)];
    sum0 += k * hist[static_cast<std::size_t>(k)];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_k = k;
    }
  }
  return best_k;
}

/// Foreground = pixels whose histogram bin lies above Otsu's threshold bin,
/// i.e. intensity >= (k + 1) / 256. Constant images give all background.
inline BinaryImage otsu_binarize(const GrayImage& img) {
  BinaryImage out(img.size());
  const int k = otsu_threshold_bin(img);
  if (k < 0) return out;
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = histogram_bin(src[i]) > k ? 1 : 0;
  return out;
}

}  // namespace octseg::filters
