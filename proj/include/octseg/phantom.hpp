#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "octseg/segmentation.hpp"

namespace octseg::phantom {

/// Row as a cubic in the normalised column u in [-1, 1]: c0 + c1 u + c2 u^2 + c3 u^3.
using Cubic = std::array<double, 4>;

// Mean compartment intensities. The chorioretinal complex is bright over a
// darker vitreous and sclera, as in attenuated SD-OCT B-scans.
struct Reflectivity {
  double vitreous = 0.05;
  double retina = 0.45;
  double choroid = 0.40;
  double sclera = 0.20;
};

struct PhantomSpec {
  Cubic ilm{90.0, 0.0, 0.0, 0.0};
  Cubic rpe{180.0, 0.0, 0.0, 0.0};
  Cubic cs{270.0, 0.0, 0.0, 0.0};
  Reflectivity reflectivity;
  double rpe_band_intensity = 0.95;
  double rpe_band_halfwidth = 2.0;
  double speckle_strength = 0.0;
  std::uint64_t seed = 0;
};

inline double eval_cubic(const Cubic& c, double u) {
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

inline double curve_row(const Cubic& c, int x, int width) {
  return eval_cubic(c, normalized_column(x, width));
}

/// Throws a parameter error unless 0 < ilm < rpe < cs < height-1 on every
/// column and the reflectivities look like OCT (vitreous darkest, RPE band
/// brightest).
inline void validate(const PhantomSpec& spec, Size size = kCanonicalSize) {
  const Reflectivity& r = spec.reflectivity;
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  detail::require(unit(r.vitreous) && unit(r.retina) && unit(r.choroid) && unit(r.sclera) &&
                      unit(spec.rpe_band_intensity),
                  ErrorKind::Parameter, "phantom: reflectivities must lie in [0,1]");
  detail::require(r.vitreous < std::min({r.retina, r.choroid, r.sclera}), ErrorKind::Parameter,
                  "phantom: vitreous must be the darkest compartment");
  detail::require(spec.rpe_band_intensity > std::max({r.retina, r.choroid, r.sclera}),
                  ErrorKind::Parameter, "phantom: RPE band must be the brightest structure");
  detail::require(spec.rpe_band_halfwidth >= 0.0 && spec.speckle_strength >= 0.0,
                  ErrorKind::Parameter, "phantom: band halfwidth and speckle must be >= 0");
  for (int x = 0; x < size.width; ++x) {
    const double ilm = curve_row(spec.ilm, x, size.width);
    const double rpe = curve_row(spec.rpe, x, size.width);
    const double cs = curve_row(spec.cs, x, size.width);
    if (!(0.0 < ilm && ilm < rpe && rpe < cs && cs < size.height - 1))
      detail::fail(ErrorKind::Parameter,
                   "phantom: curves violate 0 < ilm < rpe < cs < height-1 at column " +
                       std::to_string(x));
  }
}

/// Stateless 64-bit mix of (seed, x, y); splitmix64 finaliser.
inline std::uint64_t pixel_hash(std::uint64_t seed, int x, int y) {
  std::uint64_t z = seed ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32 |
                            static_cast<std::uint32_t>(y));
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  // One more round keyed on the seed so nearby seeds decorrelate.
  z += seed * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform in [-1, 1] from the top 53 bits of the pixel hash.
inline double pixel_uniform(std::uint64_t seed, int x, int y) {
  const double unit = static_cast<double>(pixel_hash(seed, x, y) >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

struct Phantom {
  GrayImage scan;
  LabelMask mask;
  JunctionSet junctions;
};

inline JunctionSet ground_truth_junctions(const PhantomSpec& spec, Size size = kCanonicalSize) {
  JunctionSet js{BoundaryCurve(size.width, size.height), BoundaryCurve(size.width, size.height),
                 BoundaryCurve(size.width, size.height), size.height, 0};
  for (int x = 0; x < size.width; ++x) {
    js.ilm[x] = curve_row(spec.ilm, x, size.width);
    js.rpe[x] = curve_row(spec.rpe, x, size.width);
    js.cs[x] = curve_row(spec.cs, x, size.width);
  }
  return js;
}

inline Phantom generate(const PhantomSpec& spec, Size size = kCanonicalSize) {
  validate(spec, size);
  Phantom p{GrayImage(size), LabelMask(size), ground_truth_junctions(spec, size)};
  p.mask = compose_mask(p.junctions, size);
  const Reflectivity& r = spec.reflectivity;
  const std::array<double, kClassCount> level{r.vitreous, r.retina, r.choroid, r.sclera};
  for (int y = 0; y < size.height; ++y)
    for (int x = 0; x < size.width; ++x) {
      double base = level[p.mask.at(x, y)];
      if (std::abs(y - *p.junctions.rpe[x]) <= spec.rpe_band_halfwidth) base = spec.rpe_band_intensity;
      double v = base;
      if (spec.speckle_strength > 0.0)
        v = base * (1.0 + spec.speckle_strength * pixel_uniform(spec.seed, x, y));
      p.scan.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  return p;
}

/// Random anatomically ordered cubic boundaries, reproducible from `seed`.
/// Layer thicknesses stay well inside the grid so every draw validates.
inline PhantomSpec random_spec(std::uint64_t seed, double speckle_strength,
                               Size size = kCanonicalSize) {
  std::uint64_t counter = 0;
  auto uniform = [&](double lo, double hi) {
    const double u = 0.5 * (pixel_uniform(seed ^ 0x5eedULL, static_cast<int>(counter++), -1) + 1.0);
    return lo + (hi - lo) * u;
  };
  const double h = size.height;
  auto shape = [&](double centre, double amplitude) {
    // Bounded by |c1| + |c2| + |c3| <= amplitude over u in [-1, 1].
    Cubic c{centre, 0.0, 0.0, 0.0};
    const double a1 = uniform(-0.4, 0.4) * amplitude;
    const double a2 = uniform(-0.4, 0.4) * amplitude;
    const double a3 = uniform(-0.2, 0.2) * amplitude;
    c[1] = a1;
    c[2] = a2;
    c[3] = a3;
    return c;
  };
  PhantomSpec spec;
  const double rpe_centre = uniform(0.42, 0.55) * h;
  spec.rpe = shape(rpe_centre, 0.08 * h);
  spec.ilm = spec.rpe;
  spec.ilm[0] -= uniform(0.18, 0.26) * h;
  const Cubic ilm_wobble = shape(0.0, 0.03 * h);
  for (int i = 1; i < 4; ++i) spec.ilm[static_cast<std::size_t>(i)] += ilm_wobble[static_cast<std::size_t>(i)];
  spec.cs = spec.rpe;
  spec.cs[0] += uniform(0.15, 0.22) * h;
  const Cubic cs_wobble = shape(0.0, 0.03 * h);
  for (int i = 1; i < 4; ++i) spec.cs[static_cast<std::size_t>(i)] += cs_wobble[static_cast<std::size_t>(i)];
  spec.speckle_strength = speckle_strength;
  spec.seed = seed;
  return spec;
}

}  // namespace octseg::phantom
