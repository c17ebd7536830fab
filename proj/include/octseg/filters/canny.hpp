#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "octseg/filters/gaussian.hpp"

namespace octseg::filters {

struct CannyParams {
  double gaussian_sigma = 1.4;
  // High threshold = this percentile (as a fraction) of nonzero gradient magnitudes.
  double high_fraction = 0.9;
  // Low threshold = low_ratio * high.
  double low_ratio = 0.4;

  void validate() const {
    detail::require(gaussian_sigma > 0.0, ErrorKind::Parameter, "canny: sigma must be positive");
    detail::require(high_fraction > 0.0 && high_fraction <= 1.0, ErrorKind::Parameter,
                    "canny: high_fraction must lie in (0,1]");
    detail::require(low_ratio > 0.0 && low_ratio < 1.0, ErrorKind::Parameter,
                    "canny: low_ratio must lie in (0,1)");
  }
};

struct CannyResult {
  BinaryImage edges;
  GrayImage magnitude;  // Sobel magnitude of the smoothed input, before suppression
  double high = 0.0;
  double low = 0.0;
};

/// Value at rank ceil(fraction * n) (1-based) of the sorted nonzero values;
/// 0 when there are none.
inline double nonzero_fraction_rank(std::span<const double> values, double fraction) {
  std::vector<double> nz;
  nz.reserve(values.size());
  for (double v : values)
    if (v > 0.0) nz.push_back(v);
  if (nz.empty()) return 0.0;
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(nz.size())));
  k = std::clamp<std::size_t>(k, 1, nz.size()) - 1;
  std::nth_element(nz.begin(), nz.begin() + static_cast<std::ptrdiff_t>(k), nz.end());
  return nz[k];
}

inline CannyResult canny_detailed(const GrayImage& img, const CannyParams& params) {
  params.validate();
  if (img.width() < 5 || img.height() < 5)
    detail::fail(ErrorKind::Dimension, "canny: image must be at least 5x5");
  const int w = img.width();
  const int h = img.height();
  const GrayImage s = gaussian_blur(img, params.gaussian_sigma);

  GrayImage gx(w, h), gy(w, h);
  CannyResult res{BinaryImage(w, h), GrayImage(w, h), 0.0, 0.0};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double tl = s.clamped(x - 1, y - 1), tc = s.clamped(x, y - 1), tr = s.clamped(x + 1, y - 1);
      const double ml = s.clamped(x - 1, y), mr = s.clamped(x + 1, y);
      const double bl = s.clamped(x - 1, y + 1), bc = s.clamped(x, y + 1), br = s.clamped(x + 1, y + 1);
      const double sx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
      const double sy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
      gx.at(x, y) = sx;
      gy.at(x, y) = sy;
      res.magnitude.at(x, y) = std::hypot(sx, sy);
    }

  res.high = nonzero_fraction_rank(res.magnitude.pixels(), params.high_fraction);
  res.low = params.low_ratio * res.high;
  if (res.high <= 0.0) return res;

  // Non-maximum suppression along the gradient quantised to 0/45/90/135 deg.
  // Ties keep the pixel on the negative side only, so plateaus thin to 1 px.
  GrayImage nms(w, h);
  const GrayImage& mag = res.magnitude;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double m = mag.at(x, y);
      if (m <= 0.0) continue;
      double angle = std::atan2(gy.at(x, y), gx.at(x, y)) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      int ox = 0;
      int oy = 0;
      if (angle < 22.5 || angle >= 157.5) {
        ox = 1;
      } else if (angle < 67.5) {
        ox = 1;
        oy = 1;
      } else if (angle < 112.5) {
        oy = 1;
      } else {
        ox = -1;
        oy = 1;
      }
      const double ahead = mag.contains(x + ox, y + oy) ? mag.at(x + ox, y + oy) : 0.0;
      const double behind = mag.contains(x - ox, y - oy) ? mag.at(x - ox, y - oy) : 0.0;
      if (m >= ahead && m > behind) nms.at(x, y) = m;
    }

  // Hysteresis: weak pixels survive when 8-connected to a strong one.
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (nms.at(x, y) >= res.high && !res.edges.at(x, y)) {
        res.edges.at(x, y) = 1;
        stack.emplace_back(x, y);
        while (!stack.empty()) {
          const auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = cx + dx;
              const int ny = cy + dy;
              if (!nms.contains(nx, ny) || res.edges.at(nx, ny)) continue;
              if (nms.at(nx, ny) >= res.low) {
                res.edges.at(nx, ny) = 1;
                stack.emplace_back(nx, ny);
              }
            }
        }
      }
  return res;
}

inline BinaryImage canny(const GrayImage& img, const CannyParams& params) {
  return canny_detailed(img, params).edges;
}

}  // namespace octseg::filters
