#pragma once

#include <optional>
#include <string>

#include "octseg/error.hpp"
#include "octseg/filters/canny.hpp"
#include "octseg/filters/wiener.hpp"

namespace octseg {

/// What Canny runs on in the vitreous-retina / choroid-sclera phase.
enum class CannyInput {
  Coherence,    // the thresholded coherence map itself
  GatedBinary,  // the binarised scan; edges kept only where coherence passes the threshold
};

/// Every tunable of the two contouring phases and the evaluation.
struct PipelineConfig {
  // Retina-choroid phase
  int adaptive_window = 33;
  double adaptive_offset = 0.12;
  int erode_radius = 1;
  int min_area = 50;

  // Vitreous-retina / choroid-sclera phase
  int wiener_window_n = 5;
  int wiener_window_m = 5;
  std::optional<double> wiener_noise;  // empty = "auto"
  double contrast_low_pct = 1.0;
  double contrast_high_pct = 98.0;
  double gamma = 2.0;
  double tensor_grad_sigma = 1.0;
  double tensor_smooth_sigma = 2.5;
  double coherence_threshold = 0.2;
  double canny_sigma = 1.4;
  double canny_high_fraction = 0.9;
  double canny_low_ratio = 0.4;
  CannyInput canny_input = CannyInput::GatedBinary;
  int min_gap = 5;

  // Curve smoothing
  int polyfit_degree = 3;

  // Evaluation
  std::optional<double> bf_tolerance;  // empty = "auto"

  filters::WienerParams wiener_params() const {
    return {wiener_window_n, wiener_window_m, wiener_noise};
  }
  filters::CannyParams canny_params() const {
    return {canny_sigma, canny_high_fraction, canny_low_ratio};
  }

  void validate() const {
    auto check = [](bool ok, const char* what) {
      if (!ok) detail::fail(ErrorKind::Parameter, std::string("config: ") + what);
    };
    check(adaptive_window >= 3 && adaptive_window % 2 == 1, "adaptive_window must be odd and >= 3");
    check(erode_radius >= 1, "erode_radius must be >= 1");
    check(min_area >= 1, "min_area must be >= 1");
    wiener_params().validate();
    check(contrast_low_pct >= 0.0 && contrast_low_pct < contrast_high_pct &&
              contrast_high_pct <= 100.0,
          "contrast percentiles must satisfy 0 <= low < high <= 100");
    check(gamma > 1.0, "gamma must exceed 1");
    check(tensor_grad_sigma > 0.0 && tensor_smooth_sigma > 0.0, "tensor sigmas must be positive");
    check(coherence_threshold >= 0.0 && coherence_threshold <= 1.0,
          "coherence_threshold must lie in [0,1]");
    canny_params().validate();
    check(min_gap >= 0, "min_gap must be >= 0");
    check(polyfit_degree >= 0 && polyfit_degree <= 10, "polyfit_degree must lie in [0,10]");
    check(!bf_tolerance || *bf_tolerance >= 0.0, "bf_tolerance must be >= 0");
  }

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

}  // namespace octseg
