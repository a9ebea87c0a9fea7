#pragma once

// Body/background separation pipeline.
//
//   byte    = normalization ? normalize_for_uint8(img, limit) : cast_wrap_uint8(img)
//   t       = otsu_threshold(histogram(byte))
//   binary  = binarize(byte, t)
//   initial = draw_contours(select_contours(find_contours(binary), numbers), thickness)
//   mask    = fill_holes(initial)
//
// Degenerate inputs (constant images, zero variance) yield an empty mask and
// a warning in the report rather than an exception, so batch runs over many
// slices keep going.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bodysep/contours.hpp"
#include "bodysep/image.hpp"
#include "bodysep/morphology.hpp"
#include "bodysep/normalization.hpp"
#include "bodysep/otsu.hpp"
#include "bodysep/volume.hpp"

namespace bodysep {

struct MaskPipelineConfig {
  bool normalization = false;
  double limit = 3.0;
  std::optional<std::vector<int>> contour_numbers;  // absent = all contours
  int thickness = kFilled;
  bool plot = true;
  std::optional<double> vmin;
  std::optional<double> vmax;
  int slice_axis = 0;

  void validate() const {
    validate_limit(limit);
    validate_thickness(thickness);
    if (contour_numbers) {
      if (contour_numbers->empty()) {
        throw Error(ErrorKind::invalid_argument, "contour_numbers must not be an empty list");
      }
      for (int k : *contour_numbers) {
        if (k < 1) {
          throw Error(ErrorKind::invalid_argument,
                      "contour numbers are 1-based, got " + std::to_string(k));
        }
      }
    }
    if (vmin && vmax && !(*vmin < *vmax)) {
      throw Error(ErrorKind::invalid_window, "vmin must be < vmax");
    }
    detail::check_axis(slice_axis);
  }

  friend bool operator==(const MaskPipelineConfig&, const MaskPipelineConfig&) = default;
};

struct MaskReport {
  int threshold_used = 0;
  bool degenerate = false;
  std::size_t contour_count = 0;
  std::vector<std::size_t> selected_areas;  // descending
  std::optional<double> clipped_fraction;   // present iff normalization on
  std::vector<std::string> warnings;

  friend bool operator==(const MaskReport&, const MaskReport&) = default;
};

struct MaskResult {
  BinaryMask2D mask;
  ByteImage2D byte_image;
  MaskReport report;
  std::optional<ByteImage2D> panel;  // only when plot is on
};

struct VolumeMaskResult {
  BinaryMask3D mask;
  std::vector<MaskReport> reports;               // one per slice
  std::vector<std::optional<ByteImage2D>> panels;  // one per slice
};

inline constexpr std::size_t kPanelSeparator = 8;

/// [window(img) | byte | mask * 255] with 8-pixel black separators.
inline ByteImage2D render_panel(const ScalarImage2D& img, const ByteImage2D& byte,
                                const BinaryMask2D& mask, std::optional<double> vmin = std::nullopt,
                                std::optional<double> vmax = std::nullopt) {
  if (!img.same_shape(byte) || !img.same_shape(mask)) {
    throw Error(ErrorKind::invariant, "render_panel: panes differ in size");
  }
  const std::size_t w = img.width(), h = img.height();
  const ByteImage2D display = window_render(img, vmin, vmax);
  ByteImage2D panel(3 * w + 2 * kPanelSeparator, h);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      panel(r, c) = display(r, c);
      panel(r, w + kPanelSeparator + c) = byte(r, c);
      panel(r, 2 * (w + kPanelSeparator) + c) = mask(r, c) ? 255 : 0;
    }
  }
  return panel;
}

inline MaskResult body_mask_2d(const ScalarImage2D& img, const MaskPipelineConfig& config) {
  config.validate();
  const std::size_t w = img.width(), h = img.height();
  MaskResult res{BinaryMask2D(w, h), ByteImage2D(w, h), MaskReport{}, std::nullopt};
  MaskReport& rep = res.report;

  bool degenerate = false;
  if (config.normalization) {
    try {
      res.byte_image = normalize_for_uint8(img, {config.limit});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::zero_variance) throw;
      degenerate = true;
      rep.warnings.push_back("zero variance: normalization undefined, mask left empty");
    }
    rep.clipped_fraction = clipped_fraction(res.byte_image);
  } else {
    res.byte_image = cast_wrap_uint8(img);
  }

  if (!degenerate) {
    const ThresholdResult t = otsu_threshold(histogram(res.byte_image));
    rep.threshold_used = t.threshold;
    if (t.degenerate) {
      degenerate = true;
      rep.warnings.push_back("degenerate histogram: all pixels equal " +
                             std::to_string(t.threshold) + ", mask left empty");
    } else {
      const ContourSet all = find_contours(binarize(res.byte_image, t.threshold));
      rep.contour_count = all.size();
      const ContourSet selected = select_contours(all, config.contour_numbers);
      rep.selected_areas = selected.areas();
      res.mask = fill_holes(draw_contours(w, h, selected, config.thickness));
    }
  }
  rep.degenerate = degenerate;

  if (config.plot) {
    try {
      res.panel = render_panel(img, res.byte_image, res.mask, config.vmin, config.vmax);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::invalid_window) throw;
      rep.warnings.push_back(std::string("panel skipped: ") + e.what());
    }
  }
  return res;
}

/// Applies the 2D pipeline to every slice along `config.slice_axis`.
/// With threads > 1 slices run concurrently; the result is identical to a
/// sequential run.
inline VolumeMaskResult body_mask_3d(const Volume3D& vol, const MaskPipelineConfig& config,
                                     unsigned threads = 1) {
  config.validate();
  const int axis = config.slice_axis;
  const std::size_t n = vol.num_slices(axis);

  std::vector<std::optional<MaskResult>> slices(n);
  std::vector<std::exception_ptr> errors(n);
  auto run_slice = [&](std::size_t i) {
    try {
      slices[i] = body_mask_2d(vol.slice(axis, i), config);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run_slice(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned k = 0; k < workers; ++k) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run_slice(i);
      });
    }
  }  // jthreads join here

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  VolumeMaskResult out{BinaryMask3D(vol.dims()), {}, {}};
  out.reports.reserve(n);
  out.panels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.mask.set_slice(axis, i, slices[i]->mask);
    out.reports.push_back(std::move(slices[i]->report));
    out.panels.push_back(std::move(slices[i]->panel));
  }
  return out;
}

// JSON ----------------------------------------------------------------------

namespace detail {

inline bool parse_switch(const nlohmann::json& v, const char* key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "on") return true;
    if (s == "off") return false;
  }
  throw Error(ErrorKind::format, std::string("config: '") + key + "' must be \"on\" or \"off\"");
}

inline std::optional<double> parse_optional_number(const nlohmann::json& v, const char* key) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw Error(ErrorKind::format, std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace detail

/// Overlays the keys present in `j` onto `config`. Unknown keys are rejected.
inline void apply_config_json(MaskPipelineConfig& config, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::format, "config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "normalization") {
      config.normalization = detail::parse_switch(v, "normalization");
    } else if (key == "limit") {
      if (!v.is_number()) throw Error(ErrorKind::format, "config: 'limit' must be a number");
      config.limit = v.get<double>();
    } else if (key == "contour_numbers") {
      if (v.is_null()) {
        config.contour_numbers.reset();
      } else if (v.is_number_integer()) {
        config.contour_numbers = std::vector<int>{v.get<int>()};
      } else if (v.is_array() && std::all_of(v.begin(), v.end(),
                                             [](const auto& e) { return e.is_number_integer(); })) {
        config.contour_numbers = v.get<std::vector<int>>();
      } else {
        throw Error(ErrorKind::format, "config: 'contour_numbers' must be an integer list or null");
      }
    } else if (key == "thickness") {
      if (!v.is_number_integer()) throw Error(ErrorKind::format, "config: 'thickness' must be an integer");
      config.thickness = v.get<int>();
    } else if (key == "plot") {
      config.plot = detail::parse_switch(v, "plot");
    } else if (key == "vmin") {
      config.vmin = detail::parse_optional_number(v, "vmin");
    } else if (key == "vmax") {
      config.vmax = detail::parse_optional_number(v, "vmax");
    } else if (key == "slice_axis") {
      if (!v.is_number_integer()) throw Error(ErrorKind::format, "config: 'slice_axis' must be an integer");
      config.slice_axis = v.get<int>();
    } else {
      throw Error(ErrorKind::format, "config: unknown key '" + key + "'");
    }
  }
}

inline MaskPipelineConfig config_from_json(const nlohmann::json& j) {
  MaskPipelineConfig c;
  apply_config_json(c, j);
  c.validate();
  return c;
}

inline nlohmann::json to_json(const MaskPipelineConfig& c) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"normalization", c.normalization ? "on" : "off"},
          {"limit", c.limit},
          {"contour_numbers", c.contour_numbers ? nlohmann::json(*c.contour_numbers)
                                                : nlohmann::json(nullptr)},
          {"thickness", c.thickness},
          {"plot", c.plot ? "on" : "off"},
          {"vmin", opt(c.vmin)},
          {"vmax", opt(c.vmax)},
          {"slice_axis", c.slice_axis}};
}

inline nlohmann::json to_json(const MaskReport& r) {
  return {{"threshold", r.threshold_used},
          {"degenerate", r.degenerate},
          {"contour_count", r.contour_count},
          {"selected_areas", r.selected_areas},
          {"clipped_fraction", r.clipped_fraction ? nlohmann::json(*r.clipped_fraction)
                                                  : nlohmann::json(nullptr)},
          {"warnings", r.warnings}};
}

}  // namespace bodysep
