#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "octseg/image.hpp"

namespace octseg::filters {

/// Odd-length 1-D kernel, centre at index radius().
struct Kernel1D {
  std::vector<double> taps;
  int radius() const { return static_cast<int>(taps.size() / 2); }

  bool antisymmetric() const {
    const int r = radius();
    for (int i = 0; i <= r; ++i)
      if (taps[static_cast<std::size_t>(r + i)] != -taps[static_cast<std::size_t>(r - i)]) return false;
    return true;
  }
};

// Odd kernels are applied to differences in(x + i) - in(x - i), so any flat
// neighbourhood gives exactly zero.
template <typename Sample>
double correlate(const Kernel1D& k, bool odd, Sample&& in) {
  const int r = k.radius();
  double acc = 0.0;
  if (odd) {
    for (int i = 1; i <= r; ++i) acc += k.taps[static_cast<std::size_t>(r + i)] * (in(i) - in(-i));
  } else {
    for (int i = -r; i <= r; ++i) acc += k.taps[static_cast<std::size_t>(i + r)] * in(i);
  }
  return acc;
}

inline int gaussian_radius(double sigma) {
  return std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
}

// Sampled Gaussian truncated at 3 sigma, renormalised to unit sum.
inline Kernel1D gaussian_kernel(double sigma) {
  detail::require(sigma > 0.0, ErrorKind::Parameter, "gaussian sigma must be positive");
  const int r = gaussian_radius(sigma);
  Kernel1D k;
  k.taps.resize(static_cast<std::size_t>(2 * r + 1));
  for (int i = -r; i <= r; ++i)
    k.taps[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
  const double sum = std::accumulate(k.taps.begin(), k.taps.end(), 0.0);
  for (double& t : k.taps) t /= sum;
  return k;
}

// First derivative of the Gaussian, same support. Scaled so that a unit ramp
// produces a derivative of exactly 1 (the taps sum to zero, so unit sum is
// not available).
inline Kernel1D gaussian_derivative_kernel(double sigma) {
  detail::require(sigma > 0.0, ErrorKind::Parameter, "gaussian sigma must be positive");
  const int r = gaussian_radius(sigma);
  Kernel1D k;
  k.taps.resize(static_cast<std::size_t>(2 * r + 1));
  double moment = 0.0;
  for (int i = -r; i <= r; ++i) {
    // Correlation form: out(x) = sum_i taps[i] * in(x + i).
    const double v = i * std::exp(-0.5 * (i * i) / (sigma * sigma));
    k.taps[static_cast<std::size_t>(i + r)] = v;
    moment += v * i;
  }
  for (double& t : k.taps) t /= moment;
  return k;
}

/// Correlate rows with `kx` then columns with `ky`, replicating edges.
inline GrayImage separable_filter(const GrayImage& img, const Kernel1D& kx, const Kernel1D& ky) {
  const int w = img.width();
  const int h = img.height();
  GrayImage tmp(w, h);
  const bool odd_x = kx.antisymmetric();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      tmp.at(x, y) = correlate(kx, odd_x, [&](int i) { return img.clamped(x + i, y); });
  GrayImage out(w, h);
  const bool odd_y = ky.antisymmetric();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.at(x, y) = correlate(ky, odd_y, [&](int i) { return tmp.clamped(x, y + i); });
  return out;
}

inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const Kernel1D g = gaussian_kernel(sigma);
  return separable_filter(img, g, g);
}

}  // namespace octseg::filters
