#pragma once

#include <string>

#include "octseg/boundaries.hpp"
#include "octseg/config.hpp"
#include "octseg/filters.hpp"
#include "octseg/segmentation.hpp"

namespace octseg {

struct SegmentationResult {
  JunctionSet junctions;
  LabelMask mask;
};

/// Intermediate rasters, filled in when requested.
struct PipelineTrace {
  BinaryImage rpe_mask;       // cleaned bright mask of the first phase
  BoundaryCurve rpe_raw;      // column trace before repair
  GrayImage enhanced;         // denoised, stretched and weighted scan
  BinaryImage binary;         // binarised and hole-filled
  GrayImage coherence;        // after the coherence threshold
  BinaryImage edges;          // Canny output
  BoundaryCurve ilm_raw;
  BoundaryCurve cs_raw;
};

namespace detail {

template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(stage, e.kind(), e.what());
  }
}

}  // namespace detail

/// Retina-choroid phase: bright adaptive mask, clean up, last bright row per
/// column, spline repair, cubic smoothing.
inline BoundaryCurve contour_rpe(const GrayImage& scan, const PipelineConfig& cfg,
                                 PipelineTrace* trace = nullptr) {
  using namespace filters;
  const BinaryImage bright = detail::run_stage("adaptive_threshold", [&] {
    return adaptive_threshold_bright(scan, cfg.adaptive_window, cfg.adaptive_offset);
  });
  const BinaryImage cleaned = detail::run_stage("area_open", [&] {
    return area_open(erode(bright, cfg.erode_radius), static_cast<std::size_t>(cfg.min_area));
  });
  const BoundaryCurve raw = trace_rpe(cleaned);
  if (trace) {
    trace->rpe_mask = cleaned;
    trace->rpe_raw = raw;
  }
  if (raw.valid_count() == 0)
    throw PipelineError("trace_rpe", ErrorKind::InsufficientData, "no bright content in any column");
  const BoundaryCurve repaired = detail::run_stage("repair_spline(rpe)", [&] { return repair_spline(raw); });
  return detail::run_stage("smooth_polyfit(rpe)",
                           [&] { return smooth_polyfit(repaired, cfg.polyfit_degree); });
}

/// The enhancement chain feeding the structure tensor.
inline BinaryImage enhance_and_binarize(const GrayImage& scan, const PipelineConfig& cfg,
                                        PipelineTrace* trace = nullptr) {
  using namespace filters;
  return detail::run_stage("enhance", [&] {
    const GrayImage denoised = wiener(scan, cfg.wiener_params());
    const GrayImage stretched = contrast_stretch(denoised, cfg.contrast_low_pct, cfg.contrast_high_pct);
    const GrayImage weighted = intensity_weight(stretched, cfg.gamma);
    BinaryImage binary = fill_holes(otsu_binarize(weighted));
    if (trace) {
      trace->enhanced = weighted;
      trace->binary = binary;
    }
    return binary;
  });
}

/// Coherence of the binarised scan with weakly oriented pixels zeroed.
inline GrayImage coherent_structure(const BinaryImage& binary, const PipelineConfig& cfg) {
  using namespace filters;
  return detail::run_stage("structure_tensor", [&] {
    GrayImage coh = coherence_map(
        structure_tensor(to_gray(binary), cfg.tensor_grad_sigma, cfg.tensor_smooth_sigma));
    for (double& v : coh.pixels())
      if (v < cfg.coherence_threshold) v = 0.0;
    return coh;
  });
}

/// Vitreous-retina and choroid-sclera phase, referenced to the RPE curve.
inline std::pair<BoundaryCurve, BoundaryCurve> contour_ilm_cs(const GrayImage& scan,
                                                              const BoundaryCurve& rpe,
                                                              const PipelineConfig& cfg,
                                                              PipelineTrace* trace = nullptr) {
  using namespace filters;
  const BinaryImage binary = enhance_and_binarize(scan, cfg, trace);
  const GrayImage coh = coherent_structure(binary, cfg);
  const BinaryImage edges = detail::run_stage("canny", [&] {
    if (cfg.canny_input == CannyInput::Coherence) return canny(coh, cfg.canny_params());
    BinaryImage e = canny(to_gray(binary), cfg.canny_params());
    auto gate = coh.pixels();
    auto px = e.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
      if (gate[i] <= 0.0) px[i] = 0;
    return e;
  });
  const IlmCsTrace raw = detail::run_stage("trace_ilm_cs", [&] { return trace_ilm_cs(edges, rpe, cfg.min_gap); });
  if (trace) {
    trace->coherence = coh;
    trace->edges = edges;
    trace->ilm_raw = raw.ilm;
    trace->cs_raw = raw.cs;
  }
  BoundaryCurve ilm = detail::run_stage("repair_spline(ilm)", [&] { return repair_spline(raw.ilm); });
  BoundaryCurve cs = detail::run_stage("repair_spline(cs)", [&] { return repair_spline(raw.cs); });
  ilm = detail::run_stage("smooth_polyfit(ilm)", [&] { return smooth_polyfit(ilm, cfg.polyfit_degree); });
  cs = detail::run_stage("smooth_polyfit(cs)", [&] { return smooth_polyfit(cs, cfg.polyfit_degree); });
  return {std::move(ilm), std::move(cs)};
}

/// Full two-phase segmentation of one B-scan. Scans off the canonical grid
/// are resized first. Errors carry the name of the failing stage.
inline SegmentationResult segment_scan(const GrayImage& input, const PipelineConfig& cfg,
                                       PipelineTrace* trace = nullptr) {
  cfg.validate();
  const GrayImage scan = detail::run_stage("preprocess", [&] { return preprocess(input); });
  const BoundaryCurve rpe = contour_rpe(scan, cfg, trace);
  auto [ilm, cs] = contour_ilm_cs(scan, rpe, cfg, trace);
  JunctionSet js = detail::run_stage("build_junctions",
                                     [&] { return build_junctions(ilm, rpe, cs, scan.height()); });
  LabelMask mask = compose_mask(js, scan.size());
  return {std::move(js), std::move(mask)};
}

}  // namespace octseg
