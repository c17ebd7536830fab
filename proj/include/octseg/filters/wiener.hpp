#pragma once

#include <optional>

#include "octseg/image.hpp"

namespace octseg::filters {

struct WienerParams {
  int window_n = 5;  // neighbourhood rows
  int window_m = 5;  // neighbourhood columns
  // Noise variance v^2; empty means estimate it as the mean local variance.
  std::optional<double> noise_variance;

  void validate() const {
    detail::require(window_n >= 3 && window_n % 2 == 1 && window_m >= 3 && window_m % 2 == 1,
                    ErrorKind::Parameter, "wiener: window sides must be odd and >= 3");
    detail::require(!noise_variance || *noise_variance >= 0.0, ErrorKind::Parameter,
                    "wiener: noise variance must be non-negative");
  }
};

struct LocalMoments {
  GrayImage mean;
  GrayImage variance;
};

/// Local mean and variance over the N x M edge-replicated neighbourhood.
/// Sums are taken relative to the centre pixel so that a flat neighbourhood
/// yields its value and a zero variance exactly.
inline LocalMoments local_moments(const GrayImage& img, int window_n, int window_m) {
  const int ry = window_n / 2;
  const int rx = window_m / 2;
  const double inv = 1.0 / (static_cast<double>(window_n) * window_m);
  LocalMoments m{GrayImage(img.size()), GrayImage(img.size())};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double c = img.at(x, y);
      double s1 = 0.0;
      double s2 = 0.0;
      for (int j = -ry; j <= ry; ++j)
        for (int i = -rx; i <= rx; ++i) {
          const double d = img.clamped(x + i, y + j) - c;
          s1 += d;
          s2 += d * d;
        }
      const double mean_d = s1 * inv;
      m.mean.at(x, y) = c + mean_d;
      m.variance.at(x, y) = std::max(0.0, s2 * inv - mean_d * mean_d);
    }
  return m;
}

inline double mean_of(const GrayImage& img) {
  double s = 0.0;
  for (double v : img.pixels()) s += v;
  return s / static_cast<double>(img.pixel_count());
}

/// Adaptive Wiener filter:
///   F = mu + max(sigma^2 - v^2, 0) / sigma^2 * (I - mu),   F = mu where sigma^2 = 0.
inline GrayImage wiener(const GrayImage& img, const WienerParams& params) {
  params.validate();
  const LocalMoments m = local_moments(img, params.window_n, params.window_m);
  double noise = 0.0;
  if (params.noise_variance) {
    noise = *params.noise_variance;
  } else {
    noise = mean_of(m.variance);
    if (noise == 0.0) return img;
  }
  GrayImage out(img.size());
  auto src = img.pixels();
  auto mu = m.mean.pixels();
  auto var = m.variance.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    double f = mu[i];
    if (var[i] > 0.0) f += std::max(var[i] - noise, 0.0) / var[i] * (src[i] - mu[i]);
    dst[i] = std::clamp(f, 0.0, 1.0);
  }
  return out;
}

}  // namespace octseg::filters
