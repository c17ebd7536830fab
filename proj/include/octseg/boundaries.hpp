#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "octseg/curve_fit.hpp"
#include "octseg/image.hpp"

namespace octseg {

/// Per-column row position of one junction. Empty entries are missing.
class BoundaryCurve {
 public:
  BoundaryCurve() = default;
  BoundaryCurve(int width, int height) : height_(height), rows_(static_cast<std::size_t>(width)) {
    detail::require(width > 0 && height > 0, ErrorKind::Dimension,
                    "boundary curve dimensions must be positive");
  }
  BoundaryCurve(int height, std::vector<std::optional<double>> rows)
      : height_(height), rows_(std::move(rows)) {
    detail::require(height > 0 && !rows_.empty(), ErrorKind::Dimension,
                    "boundary curve dimensions must be positive");
    for (const auto& r : rows_)
      detail::require(!r || (*r >= 0.0 && *r <= height - 1), ErrorKind::Parameter,
                      "boundary row outside the image");
  }

  static BoundaryCurve from_values(int height, std::span<const double> rows) {
    return BoundaryCurve(height, std::vector<std::optional<double>>(rows.begin(), rows.end()));
  }

  int width() const { return static_cast<int>(rows_.size()); }
  int height() const { return height_; }

  const std::optional<double>& operator[](int x) const { return rows_[static_cast<std::size_t>(x)]; }
  std::optional<double>& operator[](int x) { return rows_[static_cast<std::size_t>(x)]; }

  std::size_t valid_count() const {
    return static_cast<std::size_t>(
        std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return r.has_value(); }));
  }
  bool complete() const { return valid_count() == rows_.size(); }

  /// Row values of a complete curve.
  std::vector<double> values() const {
    detail::require(complete(), ErrorKind::InsufficientData, "boundary curve has missing entries");
    std::vector<double> v;
    v.reserve(rows_.size());
    for (const auto& r : rows_) v.push_back(*r);
    return v;
  }

  friend bool operator==(const BoundaryCurve&, const BoundaryCurve&) = default;

 private:
  int height_ = 0;
  std::vector<std::optional<double>> rows_;
};

/// The three junctions of one scan, in anatomical order top to bottom.
struct JunctionSet {
  BoundaryCurve ilm;  // vitreous / retina
  BoundaryCurve rpe;  // retina / choroid
  BoundaryCurve cs;   // choroid / sclera
  int height = 0;
  std::size_t clamped_columns = 0;

  int width() const { return rpe.width(); }
};

// ---------------------------------------------------------------------------
// Retina-choroid phase

/// Last (bottom-most) foreground row of every column.
inline BoundaryCurve trace_rpe(const BinaryImage& binary) {
  BoundaryCurve curve(binary.width(), binary.height());
  for (int x = 0; x < binary.width(); ++x)
    for (int y = binary.height() - 1; y >= 0; --y)
      if (binary.at(x, y)) {
        curve[x] = static_cast<double>(y);
        break;
      }
  return curve;
}

inline constexpr std::size_t kMinSplineKnots = 4;

/// Fills missing entries with a not-a-knot cubic spline through the valid
/// (column, row) knots. Row 0 counts as invalid. Columns outside the knot
/// range copy the nearest knot; valid entries are returned untouched.
inline BoundaryCurve repair_spline(const BoundaryCurve& curve) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (int x = 0; x < curve.width(); ++x)
    if (curve[x] && *curve[x] != 0.0) {
      xs.push_back(x);
      ys.push_back(*curve[x]);
    }
  if (xs.size() < kMinSplineKnots)
    detail::fail(ErrorKind::InsufficientData,
                 "repair_spline: fewer than 4 valid entries (" + std::to_string(xs.size()) + ")");
  if (xs.size() == static_cast<std::size_t>(curve.width())) return curve;

  const double first = ys.front();
  const double last = ys.back();
  const fit::CubicSpline spline(std::move(xs), std::move(ys));
  const double max_row = curve.height() - 1;
  BoundaryCurve out = curve;
  for (int x = 0; x < curve.width(); ++x) {
    if (curve[x] && *curve[x] != 0.0) continue;
    double v = 0.0;
    if (x < spline.front_x())
      v = first;
    else if (x > spline.back_x())
      v = last;
    else
      v = spline(x);
    out[x] = std::clamp(v, 0.0, max_row);
  }
  return out;
}

/// Maps column index to [-1, 1].
inline double normalized_column(int x, int width) {
  return width > 1 ? 2.0 * x / (width - 1) - 1.0 : 0.0;
}

/// Least-squares polynomial of row against normalised column.
inline BoundaryCurve smooth_polyfit(const BoundaryCurve& curve, int degree = 3) {
  detail::require(curve.complete(), ErrorKind::InsufficientData,
                  "smooth_polyfit: curve must be fully repaired");
  const std::vector<double> rows = curve.values();
  std::vector<double> t(rows.size());
  for (int x = 0; x < curve.width(); ++x) t[static_cast<std::size_t>(x)] = normalized_column(x, curve.width());
  const std::vector<double> coeffs = fit::polyfit(t, rows, degree);
  const double max_row = curve.height() - 1;
  BoundaryCurve out(curve.width(), curve.height());
  for (int x = 0; x < curve.width(); ++x)
    out[x] = std::clamp(fit::polyval(coeffs, t[static_cast<std::size_t>(x)]), 0.0, max_row);
  return out;
}

// ---------------------------------------------------------------------------
// Vitreous-retina and choroid-sclera phase

struct IlmCsTrace {
  BoundaryCurve ilm;
  BoundaryCurve cs;
};

/// Uses the RPE as a spatial reference: the ILM is the top-most edge more
/// than min_gap rows above it, the CS the bottom-most edge more than min_gap
/// rows below it.
inline IlmCsTrace trace_ilm_cs(const BinaryImage& edges, const BoundaryCurve& rpe, int min_gap) {
  detail::require(rpe.width() == edges.width(), ErrorKind::Dimension,
                  "trace_ilm_cs: rpe width differs from edge image");
  detail::require(rpe.complete(), ErrorKind::InsufficientData,
                  "trace_ilm_cs: rpe curve must be fully repaired");
  detail::require(min_gap >= 0, ErrorKind::Parameter, "trace_ilm_cs: min_gap must be >= 0");
  IlmCsTrace out{BoundaryCurve(edges.width(), edges.height()),
                 BoundaryCurve(edges.width(), edges.height())};
  for (int x = 0; x < edges.width(); ++x) {
    const double r = *rpe[x];
    for (int y = 0; y < edges.height() && y < r - min_gap; ++y)
      if (edges.at(x, y)) {
        out.ilm[x] = static_cast<double>(y);
        break;
      }
    for (int y = edges.height() - 1; y >= 0 && y > r + min_gap; --y)
      if (edges.at(x, y)) {
        out.cs[x] = static_cast<double>(y);
        break;
      }
  }
  return out;
}

// Fraction of columns that may be clamped before the scan is rejected.
inline constexpr double kMaxClampFraction = 0.25;

/// Enforces ilm <= rpe <= cs per column by pulling violators to rpe -/+ 1.
inline JunctionSet build_junctions(const BoundaryCurve& ilm, const BoundaryCurve& rpe,
                                   const BoundaryCurve& cs, int height) {
  detail::require(ilm.width() == rpe.width() && cs.width() == rpe.width(), ErrorKind::Dimension,
                  "build_junctions: curves differ in width");
  detail::require(ilm.complete() && rpe.complete() && cs.complete(), ErrorKind::InsufficientData,
                  "build_junctions: curves must be fully repaired");
  const double max_row = height - 1;
  JunctionSet js{ilm, rpe, cs, height, 0};
  for (int x = 0; x < rpe.width(); ++x) {
    const double r = *rpe[x];
    bool clamped = false;
    if (*js.ilm[x] > r) {
      js.ilm[x] = std::max(0.0, r - 1.0);
      clamped = true;
    }
    if (*js.cs[x] < r) {
      js.cs[x] = std::min(max_row, r + 1.0);
      clamped = true;
    }
    if (clamped) ++js.clamped_columns;
  }
  if (static_cast<double>(js.clamped_columns) > kMaxClampFraction * rpe.width())
    detail::fail(ErrorKind::OrderingViolation,
                 "build_junctions: " + std::to_string(js.clamped_columns) + " of " +
                     std::to_string(rpe.width()) + " columns violate ilm <= rpe <= cs");
  return js;
}

}  // namespace octseg
