#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "octseg/boundaries.hpp"
#include "octseg/image.hpp"

namespace octseg {

enum class Compartment : std::uint8_t { Vitreous = 0, Retina = 1, Choroid = 2, Sclera = 3 };

inline constexpr int kClassCount = 4;
inline constexpr std::array<Compartment, kClassCount> kCompartments{
    Compartment::Vitreous, Compartment::Retina, Compartment::Choroid, Compartment::Sclera};

inline constexpr std::size_t index_of(Compartment c) { return static_cast<std::size_t>(c); }

inline constexpr std::string_view name_of(Compartment c) {
  constexpr std::array<std::string_view, kClassCount> names{"vitreous", "retina", "choroid",
                                                            "sclera"};
  return names[index_of(c)];
}

inline constexpr std::string_view display_name(Compartment c) {
  constexpr std::array<std::string_view, kClassCount> names{"Vitreous", "Retina", "Choroid",
                                                            "Sclera"};
  return names[index_of(c)];
}

inline std::optional<Compartment> compartment_from_name(std::string_view name) {
  for (Compartment c : kCompartments)
    if (name == name_of(c) || name == display_name(c)) return c;
  return std::nullopt;
}

/// Class ids per pixel, stored as the raw values 0..3.
using LabelMask = Raster<std::uint8_t>;
using OverlayImage = RgbImage;

inline LabelMask make_mask(Size size, Compartment fill = Compartment::Vitreous) {
  return LabelMask(size, static_cast<std::uint8_t>(fill));
}

inline bool valid_labels(const LabelMask& mask) {
  return std::all_of(mask.pixels().begin(), mask.pixels().end(),
                     [](std::uint8_t v) { return v < kClassCount; });
}

// Curve values become integer rows by rounding half up.
inline int boundary_row(double v, int height) {
  return std::clamp(static_cast<int>(std::floor(v + 0.5)), 0, height);
}

/// Paints the four compartments between the junctions onto a zeroed grid.
/// Half-open row intervals: a boundary row belongs to the compartment below.
inline LabelMask compose_mask(const JunctionSet& js, Size size = kCanonicalSize) {
  detail::require(js.width() == size.width && js.ilm.width() == size.width &&
                      js.cs.width() == size.width,
                  ErrorKind::Dimension, "compose_mask: junction width differs from grid");
  LabelMask mask = make_mask(size);
  const int h = size.height;
  for (int x = 0; x < size.width; ++x) {
    const int ilm = boundary_row(js.ilm[x].value(), h);
    const int rpe = std::max(ilm, boundary_row(js.rpe[x].value(), h));
    const int cs = std::max(rpe, boundary_row(js.cs[x].value(), h));
    for (int y = ilm; y < rpe; ++y) mask.at(x, y) = 1;
    for (int y = rpe; y < cs; ++y) mask.at(x, y) = 2;
    for (int y = cs; y < h; ++y) mask.at(x, y) = 3;
  }
  return mask;
}

/// Scan intensities where the mask equals the class, zero elsewhere.
inline GrayImage extract_compartment(const GrayImage& scan, const LabelMask& mask, Compartment c) {
  require_same_size(scan, mask, "extract_compartment: scan and mask differ in size");
  GrayImage out(scan.size());
  auto src = scan.pixels();
  auto lab = mask.pixels();
  auto dst = out.pixels();
  const auto id = static_cast<std::uint8_t>(c);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lab[i] == id ? src[i] : 0.0;
  return out;
}

/// Grayscale scan with false positives of `c` in magenta and false negatives in green.
inline OverlayImage render_overlay(const GrayImage& scan, const LabelMask& predicted,
                                   const LabelMask& truth, Compartment c) {
  require_same_size(scan, predicted, "render_overlay: scan and prediction differ in size");
  require_same_size(scan, truth, "render_overlay: scan and truth differ in size");
  const auto id = static_cast<std::uint8_t>(c);
  OverlayImage out(scan.width(), scan.height());
  for (int y = 0; y < scan.height(); ++y)
    for (int x = 0; x < scan.width(); ++x) {
      const bool p = predicted.at(x, y) == id;
      const bool t = truth.at(x, y) == id;
      if (p && !t) {
        out.set(x, y, 1.0, 0.0, 1.0);
      } else if (!p && t) {
        out.set(x, y, 0.0, 1.0, 0.0);
      } else {
        const double v = scan.at(x, y);
        out.set(x, y, v, v, v);
      }
    }
  return out;
}

// Display palette: 0, 85, 170, 255 in 8-bit terms.
inline constexpr std::array<std::uint8_t, kClassCount> kMaskPalette{0, 85, 170, 255};

inline GrayImage mask_to_intensities(const LabelMask& mask) {
  detail::require(valid_labels(mask), ErrorKind::Parameter, "mask contains ids outside 0..3");
  GrayImage out(mask.size());
  std::transform(mask.pixels().begin(), mask.pixels().end(), out.pixels().begin(),
                 [](std::uint8_t v) { return kMaskPalette[v] / 255.0; });
  return out;
}

/// Inverse of mask_to_intensities (nearest palette entry).
inline LabelMask intensities_to_mask(const GrayImage& img) {
  LabelMask out(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                 [](double v) {
                   return static_cast<std::uint8_t>(std::clamp(std::lround(v * 3.0), 0L, 3L));
                 });
  return out;
}

}  // namespace octseg
