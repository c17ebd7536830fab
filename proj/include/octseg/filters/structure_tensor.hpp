#pragma once

#include <cmath>

#include "octseg/filters/gaussian.hpp"

namespace octseg::filters {

/// Per-pixel symmetric 2x2 second-moment matrix [[jxx, jxy], [jxy, jyy]].
struct TensorField {
  GrayImage jxx;
  GrayImage jxy;
  GrayImage jyy;

  int width() const { return jxx.width(); }
  int height() const { return jxx.height(); }
};

struct Eigen2x2 {
  double major = 0.0;  // lambda_1 >= lambda_2
  double minor = 0.0;
  double dir_x = 1.0;  // unit eigenvector of lambda_1
  double dir_y = 0.0;
};

inline Eigen2x2 eigen_symmetric(double a, double b, double c) {
  const double half_trace = 0.5 * (a + c);
  const double half_diff = 0.5 * (a - c);
  const double radius = std::hypot(half_diff, b);
  Eigen2x2 e;
  e.major = half_trace + radius;
  e.minor = half_trace - radius;
  // Principal axis angle of a symmetric matrix.
  const double theta = 0.5 * std::atan2(2.0 * b, a - c);
  e.dir_x = std::cos(theta);
  e.dir_y = std::sin(theta);
  return e;
}

/// Gaussian-derivative gradients at 0 and 90 degrees (scale grad_sigma), then
/// each product image smoothed by a Gaussian window at scale smooth_sigma.
inline TensorField structure_tensor(const GrayImage& img, double grad_sigma, double smooth_sigma) {
  detail::require(grad_sigma > 0.0 && smooth_sigma > 0.0, ErrorKind::Parameter,
                  "structure_tensor: sigmas must be positive");
  const Kernel1D g = gaussian_kernel(grad_sigma);
  const Kernel1D dg = gaussian_derivative_kernel(grad_sigma);
  const GrayImage dx = separable_filter(img, dg, g);
  const GrayImage dy = separable_filter(img, g, dg);

  GrayImage xx(img.size()), xy(img.size()), yy(img.size());
  auto px = dx.pixels();
  auto py = dy.pixels();
  auto oxx = xx.pixels();
  auto oxy = xy.pixels();
  auto oyy = yy.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    oxx[i] = px[i] * px[i];
    oxy[i] = px[i] * py[i];
    oyy[i] = py[i] * py[i];
  }
  const Kernel1D w = gaussian_kernel(smooth_sigma);
  return {separable_filter(xx, w, w), separable_filter(xy, w, w), separable_filter(yy, w, w)};
}

inline constexpr double kCoherenceEpsilon = 1e-12;

/// ((l1 - l2) / (l1 + l2 + eps))^2, in [0,1].
inline double coherence(double jxx, double jxy, double jyy) {
  const double trace = jxx + jyy;
  const double spread = std::hypot(jxx - jyy, 2.0 * jxy);  // l1 - l2
  if (trace <= 0.0) return 0.0;
  const double c = spread / (trace + kCoherenceEpsilon);
  return std::clamp(c * c, 0.0, 1.0);
}

inline GrayImage coherence_map(const TensorField& field) {
  GrayImage out(field.jxx.size());
  auto a = field.jxx.pixels();
  auto b = field.jxy.pixels();
  auto c = field.jyy.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = coherence(a[i], b[i], c[i]);
  return out;
}

}  // namespace octseg::filters
