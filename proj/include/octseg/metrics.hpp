#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "octseg/segmentation.hpp"

namespace octseg::metrics {

/// One-vs-rest pixel tallies for a single class.
struct PixelCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  std::uint64_t truth_pixels() const { return tp + fn; }
  // Class missing from both masks.
  bool absent() const { return tp + fp + fn == 0; }

  PixelCounts& operator+=(const PixelCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const PixelCounts&, const PixelCounts&) = default;
};

inline PixelCounts count_pixels(const LabelMask& predicted, const LabelMask& truth, Compartment c) {
  require_same_size(predicted, truth, "count_pixels: masks differ in size");
  const auto id = static_cast<std::uint8_t>(c);
  PixelCounts k;
  auto p = predicted.pixels();
  auto t = truth.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pp = p[i] == id;
    const bool tt = t[i] == id;
    if (pp && tt) ++k.tp;
    else if (pp) ++k.fp;
    else if (tt) ++k.fn;
    else ++k.tn;
  }
  return k;
}

inline double accuracy(const PixelCounts& c) {
  if (c.total() == 0) detail::fail(ErrorKind::UndefinedMetric, "accuracy: no pixels counted");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// TP / (TP + FP + FN); 1.0 for a class absent from both masks (see PixelCounts::absent).
inline double iou(const PixelCounts& c) {
  if (c.absent()) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp + c.fn);
}

inline double dsc(double iou_value) { return 2.0 * iou_value / (1.0 + iou_value); }

// ---------------------------------------------------------------------------
// Boundary F1

/// Class pixels with a 4-neighbour of another class, or on the image border.
inline BinaryImage class_boundary(const LabelMask& mask, Compartment c) {
  const auto id = static_cast<std::uint8_t>(c);
  BinaryImage out(mask.size());
  const int w = mask.width();
  const int h = mask.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) != id) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 ||
                        mask.at(x - 1, y) != id || mask.at(x + 1, y) != id ||
                        mask.at(x, y - 1) != id || mask.at(x, y + 1) != id;
      out.at(x, y) = edge ? 1 : 0;
    }
  return out;
}

/// Matched and total boundary pixels on both sides; merges by addition.
struct BoundaryMatch {
  std::uint64_t predicted = 0;
  std::uint64_t predicted_matched = 0;
  std::uint64_t truth = 0;
  std::uint64_t truth_matched = 0;

  BoundaryMatch& operator+=(const BoundaryMatch& o) {
    predicted += o.predicted;
    predicted_matched += o.predicted_matched;
    truth += o.truth;
    truth_matched += o.truth_matched;
    return *this;
  }

  // 2*TP counts the matched pixels of both sides, FP the unmatched predicted
  // ones and FN the unmatched truth ones, so the score is symmetric.
  double score() const {
    const std::uint64_t denom = predicted + truth;
    if (denom == 0) return 1.0;
    return static_cast<double>(predicted_matched + truth_matched) / static_cast<double>(denom);
  }
};

namespace detail_bf {

inline std::uint64_t count_matched(const BinaryImage& from, const BinaryImage& to, double tolerance,
                                   std::uint64_t& total) {
  const int r = static_cast<int>(std::floor(tolerance));
  const double tol2 = tolerance * tolerance;
  std::uint64_t matched = 0;
  total = 0;
  for (int y = 0; y < from.height(); ++y)
    for (int x = 0; x < from.width(); ++x) {
      if (!from.at(x, y)) continue;
      ++total;
      bool hit = false;
      for (int dy = -r; dy <= r && !hit; ++dy)
        for (int dx = -r; dx <= r && !hit; ++dx)
          hit = dx * dx + dy * dy <= tol2 && to.contains(x + dx, y + dy) && to.at(x + dx, y + dy);
      if (hit) ++matched;
    }
  return matched;
}

}  // namespace detail_bf

inline BoundaryMatch match_boundaries(const LabelMask& predicted, const LabelMask& truth,
                                      Compartment c, double tolerance) {
  require_same_size(predicted, truth, "bf_score: masks differ in size");
  detail::require(tolerance >= 0.0, octseg::ErrorKind::Parameter, "bf_score: tolerance must be >= 0");
  const BinaryImage pb = class_boundary(predicted, c);
  const BinaryImage tb = class_boundary(truth, c);
  BoundaryMatch m;
  m.predicted_matched = detail_bf::count_matched(pb, tb, tolerance, m.predicted);
  m.truth_matched = detail_bf::count_matched(tb, pb, tolerance, m.truth);
  return m;
}

inline double bf_score(const LabelMask& predicted, const LabelMask& truth, Compartment c,
                       double tolerance) {
  return match_boundaries(predicted, truth, c, tolerance).score();
}

/// 0.75% of the image diagonal, rounded to the nearest pixel (ties to even).
inline double default_bf_tolerance(Size size = kCanonicalSize) {
  return std::nearbyint(0.0075 * std::hypot(static_cast<double>(size.width),
                                            static_cast<double>(size.height)));
}

// ---------------------------------------------------------------------------
// Confusion matrix

class ConfusionMatrix {
 public:
  using Counts = std::array<std::array<std::uint64_t, kClassCount>, kClassCount>;
  using Rates = std::array<std::array<double, kClassCount>, kClassCount>;

  void add(const LabelMask& predicted, const LabelMask& truth) {
    require_same_size(predicted, truth, "confusion: masks differ in size");
    auto p = predicted.pixels();
    auto t = truth.pixels();
    for (std::size_t i = 0; i < p.size(); ++i) ++counts_[t[i]][p[i]];
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    for (int i = 0; i < kClassCount; ++i)
      for (int j = 0; j < kClassCount; ++j) counts_[i][j] += o.counts_[i][j];
    return *this;
  }

  /// Raw count of true-class i pixels predicted as class j.
  std::uint64_t count(Compartment truth, Compartment predicted) const {
    return counts_[index_of(truth)][index_of(predicted)];
  }
  const Counts& counts() const { return counts_; }

  /// Row-normalised: entry (i, j) is the fraction of class-i pixels predicted as j.
  /// Rows without true pixels stay zero.
  Rates normalized() const {
    Rates r{};
    for (int i = 0; i < kClassCount; ++i) {
      std::uint64_t row = 0;
      for (int j = 0; j < kClassCount; ++j) row += counts_[i][j];
      if (row == 0) continue;
      for (int j = 0; j < kClassCount; ++j)
        r[i][j] = static_cast<double>(counts_[i][j]) / static_cast<double>(row);
    }
    return r;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  Counts counts_{};
};

inline ConfusionMatrix confusion(const LabelMask& predicted, const LabelMask& truth) {
  ConfusionMatrix m;
  m.add(predicted, truth);
  return m;
}

// ---------------------------------------------------------------------------
// Per-image and corpus scores

struct ClassScores {
  double accuracy = 0.0;
  double iou = 0.0;
  double dsc = 0.0;
  double bf = 0.0;
  bool absent = false;  // iou and bf set to 1.0 by convention
};

using PerClass = std::array<ClassScores, kClassCount>;

struct ImageEvaluation {
  std::array<PixelCounts, kClassCount> counts{};
  std::array<BoundaryMatch, kClassCount> boundaries{};
  PerClass scores{};
  ConfusionMatrix confusion;

  /// Mean BF over the classes present in this image.
  double mean_bf() const {
    double s = 0.0;
    int n = 0;
    for (const ClassScores& c : scores)
      if (!c.absent) {
        s += c.bf;
        ++n;
      }
    return n ? s / n : 1.0;
  }
};

inline ClassScores class_scores(const PixelCounts& k, double bf) {
  ClassScores s;
  s.accuracy = accuracy(k);
  s.iou = iou(k);
  s.dsc = dsc(s.iou);
  s.bf = bf;
  s.absent = k.absent();
  return s;
}

inline ImageEvaluation evaluate_image(const LabelMask& predicted, const LabelMask& truth,
                                      double bf_tolerance) {
  ImageEvaluation e;
  for (Compartment c : kCompartments) {
    const std::size_t i = index_of(c);
    e.counts[i] = count_pixels(predicted, truth, c);
    e.boundaries[i] = match_boundaries(predicted, truth, c, bf_tolerance);
    e.scores[i] = class_scores(e.counts[i], e.boundaries[i].score());
  }
  e.confusion = confusion(predicted, truth);
  return e;
}

struct AggregateScores {
  double global_accuracy = 0.0;
  double mean_accuracy = 0.0;
  double mean_iou = 0.0;
  double weighted_iou = 0.0;
  double mean_bf = 0.0;          // mean over images of the per-image class-mean BF
  double pooled_bf = 0.0;        // BF from boundary matches pooled over the corpus
  std::size_t images = 0;
};

/// Per-class scores with pixel counts pooled over the corpus. The BF entry is
/// the mean over images in which the class occurs.
inline PerClass pooled_class_scores(std::span<const ImageEvaluation> images) {
  detail::require(!images.empty(), ErrorKind::Parameter, "pooled_class_scores: empty corpus");
  PerClass out{};
  for (std::size_t i = 0; i < kClassCount; ++i) {
    PixelCounts k;
    double bf = 0.0;
    int bf_n = 0;
    for (const ImageEvaluation& e : images) {
      k += e.counts[i];
      if (!e.scores[i].absent) {
        bf += e.scores[i].bf;
        ++bf_n;
      }
    }
    out[i] = class_scores(k, bf_n ? bf / bf_n : 1.0);
  }
  return out;
}

/// Corpus aggregates. Classes absent from the whole corpus are left out of
/// the unweighted means.
inline AggregateScores aggregate(std::span<const ImageEvaluation> images) {
  detail::require(!images.empty(), ErrorKind::Parameter, "aggregate: empty corpus");
  std::array<PixelCounts, kClassCount> pooled{};
  std::array<BoundaryMatch, kClassCount> pooled_bf{};
  double bf_sum = 0.0;
  for (const ImageEvaluation& e : images) {
    for (std::size_t i = 0; i < kClassCount; ++i) {
      pooled[i] += e.counts[i];
      pooled_bf[i] += e.boundaries[i];
    }
    bf_sum += e.mean_bf();
  }

  AggregateScores a;
  a.images = images.size();
  std::uint64_t correct = 0;
  std::uint64_t truth_total = 0;
  for (const PixelCounts& k : pooled) {
    correct += k.tp;
    truth_total += k.truth_pixels();
  }
  a.global_accuracy = truth_total ? static_cast<double>(correct) / static_cast<double>(truth_total) : 1.0;

  int present = 0;
  BoundaryMatch all_bf;
  for (std::size_t i = 0; i < kClassCount; ++i) {
    const PixelCounts& k = pooled[i];
    if (k.absent()) continue;
    ++present;
    a.mean_accuracy += accuracy(k);
    a.mean_iou += iou(k);
    if (truth_total)
      a.weighted_iou += iou(k) * static_cast<double>(k.truth_pixels()) / static_cast<double>(truth_total);
    all_bf += pooled_bf[i];
  }
  if (present) {
    a.mean_accuracy /= present;
    a.mean_iou /= present;
  } else {
    a.mean_accuracy = a.mean_iou = a.weighted_iou = 1.0;
  }
  a.mean_bf = bf_sum / static_cast<double>(images.size());
  a.pooled_bf = all_bf.score();
  return a;
}

}  // namespace octseg::metrics
