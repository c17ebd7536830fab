#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "octseg/error.hpp"

namespace octseg::fit {

/// Cubic spline with not-a-knot end conditions (third derivative continuous at
/// the second and penultimate knots), so any cubic is reproduced exactly.
/// Two knots give the line, three the parabola through them.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> xs, std::vector<double> ys) : x_(std::move(xs)), y_(std::move(ys)) {
    const std::size_t n = x_.size();
    detail::require(n >= 2 && y_.size() == n, ErrorKind::InsufficientData,
                    "spline needs at least two knots");
    for (std::size_t i = 1; i < n; ++i)
      detail::require(x_[i] > x_[i - 1], ErrorKind::Parameter,
                      "spline knots must be strictly increasing");

    m_.assign(n, 0.0);
    if (n == 2) return;
    std::vector<double> h(n - 1), slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      slope[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 3) {
      const double curvature = 2.0 * (slope[1] - slope[0]) / (h[0] + h[1]);
      m_.assign(n, curvature);
      return;
    }

    // Tridiagonal system in the interior second derivatives M_1..M_{n-2};
    // the not-a-knot rows eliminate M_0 and M_{n-1}.
    const std::size_t k = n - 2;
    std::vector<double> lower(k, 0.0), diag(k, 0.0), upper(k, 0.0), rhs(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t i = r + 1;
      lower[r] = h[i - 1];
      diag[r] = 2.0 * (h[i - 1] + h[i]);
      upper[r] = h[i];
      rhs[r] = 6.0 * (slope[i] - slope[i - 1]);
    }
    const double h0 = h[0], h1 = h[1];
    diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
    upper[0] = (h1 * h1 - h0 * h0) / h1;
    const double a = h[n - 3], b = h[n - 2];
    lower[k - 1] = (a * a - b * b) / a;
    diag[k - 1] = (a + b) * (2.0 * a + b) / a;

    for (std::size_t r = 1; r < k; ++r) {
      const double f = lower[r] / diag[r - 1];
      diag[r] -= f * upper[r - 1];
      rhs[r] -= f * rhs[r - 1];
    }
    m_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t r = k - 1; r-- > 0;) m_[r + 1] = (rhs[r] - upper[r] * m_[r + 2]) / diag[r];
    m_[0] = ((h0 + h1) * m_[1] - h0 * m_[2]) / h1;
    m_[n - 1] = ((a + b) * m_[n - 2] - b * m_[n - 3]) / a;
  }

  double operator()(double x) const {
    const std::size_t n = x_.size();
    std::size_t k = 0;
    if (x >= x_[n - 1]) {
      k = n - 2;
    } else if (x > x_[0]) {
      k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
    }
    const double h = x_[k + 1] - x_[k];
    const double a = (x_[k + 1] - x) / h;
    const double b = (x - x_[k]) / h;
    return a * y_[k] + b * y_[k + 1] +
           ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * (h * h) / 6.0;
  }

  double front_x() const { return x_.front(); }
  double back_x() const { return x_.back(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

/// Least-squares polynomial coefficients (ascending powers) of y against t,
/// via Householder QR on the Vandermonde matrix.
inline std::vector<double> polyfit(std::span<const double> t, std::span<const double> y,
                                   int degree) {
  detail::require(degree >= 0, ErrorKind::Parameter, "polyfit: degree must be >= 0");
  detail::require(t.size() == y.size() && !t.empty(), ErrorKind::Parameter,
                  "polyfit: abscissae and values must be non-empty and equal length");
  const std::size_t rows = t.size();
  const std::size_t cols = std::min<std::size_t>(static_cast<std::size_t>(degree) + 1, rows);

  // Column-major copy of the design matrix.
  std::vector<double> a(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < cols; ++j) {
      a[j * rows + i] = p;
      p *= t[i];
    }
  }
  std::vector<double> b(y.begin(), y.end());

  for (std::size_t j = 0; j < cols; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < rows; ++i) norm += a[j * rows + i] * a[j * rows + i];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = a[j * rows + j] > 0.0 ? -norm : norm;
    std::vector<double> v(rows - j);
    for (std::size_t i = j; i < rows; ++i) v[i - j] = a[j * rows + i];
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (double e : v) vnorm2 += e * e;
    if (vnorm2 == 0.0) continue;
    auto reflect = [&](double* col) {
      double dot = 0.0;
      for (std::size_t i = j; i < rows; ++i) dot += v[i - j] * col[i];
      const double s = 2.0 * dot / vnorm2;
      for (std::size_t i = j; i < rows; ++i) col[i] -= s * v[i - j];
    };
    for (std::size_t k = j; k < cols; ++k) reflect(&a[k * rows]);
    reflect(b.data());
  }

  std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
  for (std::size_t jj = cols; jj-- > 0;) {
    double s = b[jj];
    for (std::size_t k = jj + 1; k < cols; ++k) s -= a[k * rows + jj] * coeffs[k];
    const double r = a[jj * rows + jj];
    coeffs[jj] = r != 0.0 ? s / r : 0.0;
  }
  return coeffs;
}

inline double polyval(std::span<const double> coeffs, double t) {
  double acc = 0.0;
  for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * t + coeffs[j];
  return acc;
}

}  // namespace octseg::fit
