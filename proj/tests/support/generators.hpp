#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "octseg/image.hpp"
#include "octseg/segmentation.hpp"

namespace octseg::testgen {

/// Small seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  int odd(int lo, int hi) {
    int v = integer(lo, hi);
    return v % 2 ? v : (v + 1 <= hi ? v + 1 : v - 1);
  }

  GrayImage gray(int w, int h) {
    GrayImage img(w, h);
    for (double& v : img.pixels()) v = real(0.0, 1.0);
    return img;
  }

  BinaryImage binary(int w, int h, double density = 0.5) {
    BinaryImage img(w, h);
    for (auto& v : img.pixels()) v = coin(density) ? 1 : 0;
    return img;
  }

  LabelMask labels(int w, int h, int classes = kClassCount) {
    LabelMask m(w, h);
    for (auto& v : m.pixels()) v = static_cast<std::uint8_t>(integer(0, classes - 1));
    return m;
  }

  // Column-monotone 4-class mask, built from random ordered cut rows.
  LabelMask layered(int w, int h) {
    LabelMask m(w, h);
    for (int x = 0; x < w; ++x) {
      int a = integer(0, h), b = integer(0, h), c = integer(0, h);
      if (a > b) std::swap(a, b);
      if (b > c) std::swap(b, c);
      if (a > b) std::swap(a, b);
      for (int y = 0; y < h; ++y) m.at(x, y) = static_cast<std::uint8_t>(y < a ? 0 : y < b ? 1 : y < c ? 2 : 3);
    }
    return m;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace octseg::testgen
