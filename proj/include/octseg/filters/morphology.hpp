#pragma once

#include <cstdint>
#include <vector>

#include "octseg/image.hpp"

namespace octseg::filters {

/// Erosion by a (2r+1) x (2r+1) square. Pixels outside the image count as
/// background, so everything within r of the border is removed.
inline BinaryImage erode(const BinaryImage& img, int radius) {
  detail::require(radius >= 1, ErrorKind::Parameter, "erode: radius must be >= 1");
  const int w = img.width();
  const int h = img.height();
  auto pass = [&](const BinaryImage& src, bool horizontal) {
    BinaryImage dst(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        std::uint8_t keep = 1;
        for (int i = -radius; i <= radius && keep; ++i) {
          const int sx = horizontal ? x + i : x;
          const int sy = horizontal ? y : y + i;
          keep = src.contains(sx, sy) && src.at(sx, sy);
        }
        dst.at(x, y) = keep;
      }
    return dst;
  };
  return pass(pass(img, true), false);
}

/// Connected-component labels (8-connectivity) of the foreground.
/// Background is -1; components are numbered in raster order of first pixel.
struct ComponentLabels {
  Raster<int> labels;
  std::vector<std::size_t> sizes;
};

inline ComponentLabels label_components(const BinaryImage& img) {
  const int w = img.width();
  const int h = img.height();
  ComponentLabels out{Raster<int>(w, h, -1), {}};
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!img.at(x, y) || out.labels.at(x, y) >= 0) continue;
      const int id = static_cast<int>(out.sizes.size());
      std::size_t count = 0;
      stack.assign(1, {x, y});
      out.labels.at(x, y) = id;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++count;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (!img.contains(nx, ny) || !img.at(nx, ny) || out.labels.at(nx, ny) >= 0) continue;
            out.labels.at(nx, ny) = id;
            stack.emplace_back(nx, ny);
          }
      }
      out.sizes.push_back(count);
    }
  return out;
}

/// Removes 8-connected foreground components with fewer than `min_area` pixels.
inline BinaryImage area_open(const BinaryImage& img, std::size_t min_area) {
  detail::require(min_area >= 1, ErrorKind::Parameter, "area_open: min_area must be >= 1");
  const ComponentLabels cc = label_components(img);
  BinaryImage out(img.size());
  auto lab = cc.labels.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = lab[i] >= 0 && cc.sizes[static_cast<std::size_t>(lab[i])] >= min_area ? 1 : 0;
  return out;
}

/// Fills background regions that are not 4-connected to the image border.
inline BinaryImage fill_holes(const BinaryImage& img) {
  const int w = img.width();
  const int h = img.height();
  BinaryImage outside(w, h);
  std::vector<std::pair<int, int>> stack;
  auto seed = [&](int x, int y) {
    if (!img.at(x, y) && !outside.at(x, y)) {
      outside.at(x, y) = 1;
      stack.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr int dx[4] = {1, -1, 0, 0};
  constexpr int dy[4] = {0, 0, 1, -1};
  while (!stack.empty()) {
    const auto [cx, cy] = stack.back();
    stack.pop_back();
    for (int k = 0; k < 4; ++k) {
      const int nx = cx + dx[k];
      const int ny = cy + dy[k];
      if (img.contains(nx, ny)) seed(nx, ny);
    }
  }
  BinaryImage out(w, h);
  auto src = outside.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] ? 0 : 1;
  return out;
}

}  // namespace octseg::filters
