#pragma once

#include <cmath>
#include <vector>

#include "octseg/image.hpp"

namespace octseg::filters {

/// Percentile with linear interpolation between order statistics
/// (rank p/100 * (n-1)), the usual "linear" definition.
inline double percentile(std::span<const double> values, double pct) {
  detail::require(!values.empty(), ErrorKind::Parameter, "percentile of empty set");
  detail::require(pct >= 0.0 && pct <= 100.0, ErrorKind::Parameter, "percentile outside [0,100]");
  std::vector<double> v(values.begin(), values.end());
  const double rank = pct / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (hi == lo) return a;
  // The next order statistic is the minimum of the upper partition.
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(hi), v.end());
  return a + (rank - static_cast<double>(lo)) * (b - a);
}

/// Maps the [low_pct, high_pct] percentile range linearly onto [0,1].
inline GrayImage contrast_stretch(const GrayImage& img, double low_pct, double high_pct) {
  if (!(low_pct >= 0.0 && low_pct < high_pct && high_pct <= 100.0))
    detail::fail(ErrorKind::Parameter, "contrast_stretch: need 0 <= low < high <= 100");
  const double lo = percentile(img.pixels(), low_pct);
  const double hi = percentile(img.pixels(), high_pct);
  if (!(hi > lo)) return img;
  GrayImage out(img.size());
  auto src = img.pixels();
  auto dst = out.pixels();
  const double scale = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = std::clamp((src[i] - lo) * scale, 0.0, 1.0);
  return out;
}

/// Power map I^gamma; emphasises bright tissue over the dark background.
inline GrayImage intensity_weight(const GrayImage& img, double gamma) {
  detail::require(gamma > 1.0, ErrorKind::Parameter, "intensity_weight: gamma must exceed 1");
  GrayImage out(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                 [gamma](double v) { return std::pow(v, gamma); });
  return out;
}

}  // namespace octseg::filters
