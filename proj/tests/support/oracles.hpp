#pragma once

// Slow, literal reference implementations used to check the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "octseg/image.hpp"
#include "octseg/segmentation.hpp"

namespace octseg::oracle {

inline double replicated(const GrayImage& img, int x, int y) {
  x = x < 0 ? 0 : (x >= img.width() ? img.width() - 1 : x);
  y = y < 0 ? 0 : (y >= img.height() ? img.height() - 1 : y);
  return img.at(x, y);
}

// Adaptive Wiener gain written out directly: mu = mean, sigma^2 = mean of squares - mu^2.
inline GrayImage wiener(const GrayImage& img, int n_rows, int m_cols, double noise, bool auto_noise) {
  const int w = img.width(), h = img.height();
  std::vector<double> mu(static_cast<std::size_t>(w) * h), var(mu.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0, s2 = 0.0;
      for (int j = 0; j < n_rows; ++j)
        for (int i = 0; i < m_cols; ++i) {
          const double v = replicated(img, x + i - m_cols / 2, y + j - n_rows / 2);
          s += v;
          s2 += v * v;
        }
      const double nm = static_cast<double>(n_rows) * m_cols;
      const std::size_t k = static_cast<std::size_t>(y) * w + x;
      mu[k] = s / nm;
      var[k] = s2 / nm - mu[k] * mu[k];
    }
  if (auto_noise) {
    double s = 0.0;
    for (double v : var) s += v;
    noise = s / static_cast<double>(var.size());
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * w + x;
      const double gain = var[k] > 1e-15 ? std::max(var[k] - noise, 0.0) / var[k] : 0.0;
      out.at(x, y) = mu[k] + gain * (img.at(x, y) - mu[k]);
    }
  return out;
}

struct Counts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

// One loop over rows, columns, truth class and predicted class.
inline std::array<std::array<std::uint64_t, kClassCount>, kClassCount> confusion(const LabelMask& p,
                                                                                 const LabelMask& t) {
  std::array<std::array<std::uint64_t, kClassCount>, kClassCount> m{};
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x)
      for (int a = 0; a < kClassCount; ++a)
        for (int b = 0; b < kClassCount; ++b)
          if (t.at(x, y) == a && p.at(x, y) == b) ++m[a][b];
  return m;
}

inline Counts counts(const LabelMask& p, const LabelMask& t, int c) {
  Counts k;
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) {
      const bool pp = p.at(x, y) == c, tt = t.at(x, y) == c;
      k.tp += pp && tt;
      k.tn += !pp && !tt;
      k.fp += pp && !tt;
      k.fn += !pp && tt;
    }
  return k;
}

// Components by repeated flood fill with an explicit stack (8-connected).
inline std::vector<std::vector<std::pair<int, int>>> components(const BinaryImage& img) {
  const int w = img.width(), h = img.height();
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::vector<std::pair<int, int>>> out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!img.at(x, y) || seen[static_cast<std::size_t>(y) * w + x]) continue;
      std::vector<std::pair<int, int>> comp, stack{{x, y}};
      seen[static_cast<std::size_t>(y) * w + x] = 1;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        comp.emplace_back(cx, cy);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t k = static_cast<std::size_t>(ny) * w + nx;
            if (img.at(nx, ny) && !seen[k]) {
              seen[k] = 1;
              stack.emplace_back(nx, ny);
            }
          }
      }
      out.push_back(std::move(comp));
    }
  return out;
}

// Pixel survives if every pixel of the (2r+1)^2 square is inside and set.
inline BinaryImage erode(const BinaryImage& img, int r) {
  BinaryImage out(img.size());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      bool all = true;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          all = all && img.contains(x + dx, y + dy) && img.at(x + dx, y + dy);
      out.at(x, y) = all;
    }
  return out;
}

// Background pixels that cannot reach the border through 4-connected
// background are holes. Iterated relaxation rather than a queue.
inline BinaryImage fill_holes(const BinaryImage& img) {
  const int w = img.width(), h = img.height();
  BinaryImage outside(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      outside.at(x, y) = !img.at(x, y) && (x == 0 || y == 0 || x == w - 1 || y == h - 1);
  for (bool changed = true; changed;) {
    changed = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (img.at(x, y) || outside.at(x, y)) continue;
        const bool reach = (x > 0 && outside.at(x - 1, y)) || (x < w - 1 && outside.at(x + 1, y)) ||
                           (y > 0 && outside.at(x, y - 1)) || (y < h - 1 && outside.at(x, y + 1));
        if (reach) {
          outside.at(x, y) = 1;
          changed = true;
        }
      }
  }
  BinaryImage out(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = !outside.at(x, y);
  return out;
}

// Least squares via the normal equations and Gaussian elimination with
// partial pivoting; independent of the library's QR path.
inline std::vector<double> polyfit_normal(const std::vector<double>& t, const std::vector<double>& y, int degree) {
  const int n = degree + 1;
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<double> p(2 * n, 1.0);
    for (int i = 1; i < 2 * n; ++i) p[i] = p[i - 1] * t[k];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a[i][j] += p[i + j];
      a[i][n] += p[i] * y[k];
    }
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int j = c; j <= n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> coef(n);
  for (int i = 0; i < n; ++i) coef[i] = a[i][n] / a[i][i];
  return coef;
}

// Boundary pixels of a class, then matches by exhaustive pairwise distance.
inline double bf_score(const LabelMask& p, const LabelMask& t, int c, double tol) {
  auto boundary = [c](const LabelMask& m) {
    std::vector<std::pair<int, int>> pts;
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x) {
        if (m.at(x, y) != c) continue;
        bool edge = false;
        const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& o : d) {
          const int nx = x + o[0], ny = y + o[1];
          if (nx < 0 || ny < 0 || nx >= m.width() || ny >= m.height() || m.at(nx, ny) != c) edge = true;
        }
        if (edge) pts.emplace_back(x, y);
      }
    return pts;
  };
  const auto bp = boundary(p), bt = boundary(t);
  if (bp.empty() && bt.empty()) return 1.0;
  auto matched = [tol](const auto& from, const auto& to) {
    std::size_t n = 0;
    for (auto [x, y] : from)
      for (auto [u, v] : to)
        if (std::hypot(x - u, y - v) <= tol + 1e-12) {
          ++n;
          break;
        }
    return n;
  };
  const double num = static_cast<double>(matched(bp, bt) + matched(bt, bp));
  return num / static_cast<double>(bp.size() + bt.size());
}

}  // namespace octseg::oracle
