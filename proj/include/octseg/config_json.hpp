#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "octseg/config.hpp"

namespace octseg {

inline const char* to_string(CannyInput c) {
  return c == CannyInput::Coherence ? "coherence" : "gated_binary";
}

namespace detail {

inline nlohmann::json optional_or_auto(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json("auto");
}

inline std::optional<double> parse_optional_or_auto(const nlohmann::json& j, const char* key) {
  if (j.is_string()) {
    if (j.get<std::string>() == "auto") return std::nullopt;
    fail(ErrorKind::Parse, std::string("config: ") + key + " must be a number or \"auto\"");
  }
  if (!j.is_number()) fail(ErrorKind::Parse, std::string("config: ") + key + " must be a number or \"auto\"");
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const PipelineConfig& c) {
  return {
      {"adaptive_window", c.adaptive_window},
      {"adaptive_offset", c.adaptive_offset},
      {"erode_radius", c.erode_radius},
      {"min_area", c.min_area},
      {"wiener_window_n", c.wiener_window_n},
      {"wiener_window_m", c.wiener_window_m},
      {"wiener_noise", detail::optional_or_auto(c.wiener_noise)},
      {"contrast_low_pct", c.contrast_low_pct},
      {"contrast_high_pct", c.contrast_high_pct},
      {"gamma", c.gamma},
      {"tensor_grad_sigma", c.tensor_grad_sigma},
      {"tensor_smooth_sigma", c.tensor_smooth_sigma},
      {"coherence_threshold", c.coherence_threshold},
      {"canny_sigma", c.canny_sigma},
      {"canny_high_fraction", c.canny_high_fraction},
      {"canny_low_ratio", c.canny_low_ratio},
      {"canny_input", to_string(c.canny_input)},
      {"min_gap", c.min_gap},
      {"polyfit_degree", c.polyfit_degree},
      {"bf_tolerance", detail::optional_or_auto(c.bf_tolerance)},
  };
}

/// Missing keys keep their defaults; unknown keys are rejected so typos do
/// not pass silently. The result is validated.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
  detail::require(j.is_object(), ErrorKind::Parse, "config: top level must be a JSON object");
  PipelineConfig c;
  auto num = [&](const char* key, auto& field) {
    using T = std::decay_t<decltype(field)>;
    const auto& v = j.at(key);
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer())
        detail::fail(ErrorKind::Parse, std::string("config: ") + key + " must be an integer");
    } else {
      if (!v.is_number()) detail::fail(ErrorKind::Parse, std::string("config: ") + key + " must be a number");
    }
    field = v.get<T>();
  };
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "adaptive_window") num(k, c.adaptive_window);
    else if (key == "adaptive_offset") num(k, c.adaptive_offset);
    else if (key == "erode_radius") num(k, c.erode_radius);
    else if (key == "min_area") num(k, c.min_area);
    else if (key == "wiener_window_n") num(k, c.wiener_window_n);
    else if (key == "wiener_window_m") num(k, c.wiener_window_m);
    else if (key == "wiener_noise") c.wiener_noise = detail::parse_optional_or_auto(value, k);
    else if (key == "contrast_low_pct") num(k, c.contrast_low_pct);
    else if (key == "contrast_high_pct") num(k, c.contrast_high_pct);
    else if (key == "gamma") num(k, c.gamma);
    else if (key == "tensor_grad_sigma") num(k, c.tensor_grad_sigma);
    else if (key == "tensor_smooth_sigma") num(k, c.tensor_smooth_sigma);
    else if (key == "coherence_threshold") num(k, c.coherence_threshold);
    else if (key == "canny_sigma") num(k, c.canny_sigma);
    else if (key == "canny_high_fraction") num(k, c.canny_high_fraction);
    else if (key == "canny_low_ratio") num(k, c.canny_low_ratio);
    else if (key == "canny_input") {
      const std::string s = value.is_string() ? value.get<std::string>() : "";
      if (s == "coherence") c.canny_input = CannyInput::Coherence;
      else if (s == "gated_binary") c.canny_input = CannyInput::GatedBinary;
      else detail::fail(ErrorKind::Parse, "config: canny_input must be \"coherence\" or \"gated_binary\"");
    } else if (key == "min_gap") num(k, c.min_gap);
    else if (key == "polyfit_degree") num(k, c.polyfit_degree);
    else if (key == "bf_tolerance") c.bf_tolerance = detail::parse_optional_or_auto(value, k);
    else detail::fail(ErrorKind::Parse, "config: unknown field \"" + key + "\"");
  }
  c.validate();
  return c;
}

inline std::string serialize_config(const PipelineConfig& c) { return to_json(c).dump(2); }

inline PipelineConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::fail(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  return config_from_json(j);
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::fail(ErrorKind::Io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Config from `path`, else from $OCTSEG_CONFIG, else the defaults.
inline PipelineConfig resolve_config(const std::string& path) {
  if (!path.empty()) return load_config(path);
  if (const char* env = std::getenv("OCTSEG_CONFIG"); env && *env) return load_config(env);
  return PipelineConfig{};
}

}  // namespace octseg
