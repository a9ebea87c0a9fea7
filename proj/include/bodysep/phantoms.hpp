#pragma once

// Synthetic grayscale phantoms with known ground truth.
//
// Every pixel gets Gaussian noise N(0, sigma) on top of its base intensity:
// background mean, the intensity of the last body shape covering it, or the
// intensity of an artifact (artifacts are drawn last and never enter the
// ground truth). Noise is drawn in raster order from std::mt19937_64 seeded
// with `seed`, two engine outputs per pixel, turned into a normal deviate
// with the Box-Muller transform:
//
//   u1 = ((a >> 11) + 1) * 2^-53,  u2 = (b >> 11) * 2^-53
//   n  = sqrt(-2 ln u1) * cos(2 pi u2)
//
// The engine sequence is fixed by the C++ standard; only libm rounding of
// log/cos can differ between platforms. Integer dtypes round half away
// from zero and clamp to the dtype range.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bodysep/image.hpp"

namespace bodysep {

struct Disk {
  double center_row = 0, center_col = 0, radius = 0;
};
struct Rectangle {
  int top = 0, left = 0, height = 0, width = 0;
};
struct Ring {
  double center_row = 0, center_col = 0, outer_radius = 0, inner_radius = 0;
};
/// Ring with a horizontal slit of `gap` rows cut through its right wall,
/// so the cavity opens to the background.
struct CShape {
  double center_row = 0, center_col = 0, outer_radius = 0, inner_radius = 0, gap = 2;
};

using Geometry = std::variant<Disk, Rectangle, Ring, CShape>;

struct Shape {
  Geometry geometry;
  double intensity = 200;
};

/// Thin bright arc, typically below the body.
struct TableArtifact {
  double center_row = 0, center_col = 0, radius = 0, thickness = 2;
  double start_deg = 0, end_deg = 180;
};
/// Small bright blob.
struct JewelryArtifact {
  double center_row = 0, center_col = 0, radius = 2;
};
/// Bright rays from a point.
struct StreakArtifact {
  double center_row = 0, center_col = 0, length = 20, width = 1;
  int rays = 8;
};

struct Artifact {
  std::variant<TableArtifact, JewelryArtifact, StreakArtifact> geometry;
  double intensity = 250;
};

struct PhantomSpec {
  std::size_t width = 128;
  std::size_t height = 128;
  SourceDtype dtype = SourceDtype::uint8;
  double noise_mean = 10;
  double noise_sigma = 5;
  std::uint64_t seed = 0;
  std::vector<Shape> shapes;
  std::vector<Artifact> artifacts;
};

struct Phantom {
  ScalarImage2D image;
  BinaryMask2D truth;
};

namespace detail {

inline double sq(double x) { return x * x; }

inline bool inside(const Disk& g, double r, double c) {
  return sq(r - g.center_row) + sq(c - g.center_col) <= sq(g.radius);
}
inline bool inside(const Rectangle& g, double r, double c) {
  return r >= g.top && r < g.top + g.height && c >= g.left && c < g.left + g.width;
}
inline bool inside(const Ring& g, double r, double c) {
  const double d2 = sq(r - g.center_row) + sq(c - g.center_col);
  return d2 <= sq(g.outer_radius) && d2 > sq(g.inner_radius);
}
inline bool inside(const CShape& g, double r, double c) {
  const Ring ring{g.center_row, g.center_col, g.outer_radius, g.inner_radius};
  if (!inside(ring, r, c)) return false;
  const bool in_slit = c > g.center_col && r >= g.center_row - g.gap / 2 && r < g.center_row + g.gap / 2;
  return !in_slit;
}
inline bool inside(const TableArtifact& g, double r, double c) {
  const double d = std::sqrt(sq(r - g.center_row) + sq(c - g.center_col));
  if (std::abs(d - g.radius) > g.thickness / 2) return false;
  // angle measured counterclockwise on screen from +col, row axis pointing down
  double deg = std::atan2(g.center_row - r, c - g.center_col) * 180.0 / std::numbers::pi;
  if (deg < 0) deg += 360.0;
  return g.start_deg <= g.end_deg ? (deg >= g.start_deg && deg <= g.end_deg)
                                  : (deg >= g.start_deg || deg <= g.end_deg);
}
inline bool inside(const JewelryArtifact& g, double r, double c) {
  return sq(r - g.center_row) + sq(c - g.center_col) <= sq(g.radius);
}
inline bool inside(const StreakArtifact& g, double r, double c) {
  const double dr = r - g.center_row, dc = c - g.center_col;
  for (int k = 0; k < g.rays; ++k) {
    const double a = 2.0 * std::numbers::pi * k / g.rays;
    const double ur = std::sin(a), uc = std::cos(a);
    const double along = dr * ur + dc * uc;
    const double across = std::abs(dr * uc - dc * ur);
    if (along >= 0 && along <= g.length && across <= g.width / 2) return true;
  }
  return false;
}

/// Rows/cols spanned by a shape; used for the in-bounds check.
inline std::array<double, 4> extent(const Geometry& g) {
  return std::visit(
      [](const auto& s) -> std::array<double, 4> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return {double(s.top), double(s.left), double(s.top + s.height - 1),
                  double(s.left + s.width - 1)};
        } else if constexpr (std::is_same_v<T, Disk>) {
          return {s.center_row - s.radius, s.center_col - s.radius, s.center_row + s.radius,
                  s.center_col + s.radius};
        } else {
          return {s.center_row - s.outer_radius, s.center_col - s.outer_radius,
                  s.center_row + s.outer_radius, s.center_col + s.outer_radius};
        }
      },
      g);
}

inline void validate_shape(const Geometry& g, std::size_t w, std::size_t h) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          if (s.height <= 0 || s.width <= 0) throw Error(ErrorKind::invalid_argument, "phantom: empty rectangle");
        } else if constexpr (std::is_same_v<T, Disk>) {
          if (!(s.radius > 0)) throw Error(ErrorKind::invalid_argument, "phantom: disk radius must be > 0");
        } else {
          if (!(s.outer_radius > s.inner_radius) || s.inner_radius < 0) {
            throw Error(ErrorKind::invalid_argument, "phantom: ring needs outer_radius > inner_radius >= 0");
          }
          if constexpr (std::is_same_v<T, CShape>) {
            if (!(s.gap > 0)) throw Error(ErrorKind::invalid_argument, "phantom: c-shape gap must be > 0");
          }
        }
      },
      g);
  const auto e = extent(g);
  if (e[0] < 0 || e[1] < 0 || e[2] > double(h) - 1 || e[3] > double(w) - 1) {
    throw Error(ErrorKind::invalid_argument, "phantom: shape extends outside the image");
  }
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

inline void validate(const PhantomSpec& spec) {
  if (spec.width == 0 || spec.height == 0) throw Error(ErrorKind::invalid_argument, "phantom: empty image");
  if (!(spec.noise_sigma >= 0) || !std::isfinite(spec.noise_sigma) || !std::isfinite(spec.noise_mean)) {
    throw Error(ErrorKind::invalid_argument, "phantom: noise sigma must be >= 0");
  }
  for (const Shape& s : spec.shapes) detail::validate_shape(s.geometry, spec.width, spec.height);
}

/// Ground truth only: union of body shapes.
inline BinaryMask2D phantom_truth(const PhantomSpec& spec) {
  validate(spec);
  BinaryMask2D truth(spec.width, spec.height);
  for (std::size_t r = 0; r < spec.height; ++r) {
    for (std::size_t c = 0; c < spec.width; ++c) {
      for (const Shape& s : spec.shapes) {
        if (std::visit([&](const auto& g) { return detail::inside(g, double(r), double(c)); }, s.geometry)) {
          truth(r, c) = 1;
          break;
        }
      }
    }
  }
  return truth;
}

inline Phantom generate(const PhantomSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  const bool integral = is_integer_dtype(spec.dtype);
  const auto [lo, hi] = dtype_range(spec.dtype);
  BinaryMask2D truth(spec.width, spec.height);
  std::vector<double> data(spec.width * spec.height);
  for (std::size_t r = 0; r < spec.height; ++r) {
    for (std::size_t c = 0; c < spec.width; ++c) {
      const double noise = detail::standard_normal(rng);
      double base = spec.noise_mean;
      for (const Shape& s : spec.shapes) {
        if (std::visit([&](const auto& g) { return detail::inside(g, double(r), double(c)); }, s.geometry)) {
          base = s.intensity;
          truth(r, c) = 1;
        }
      }
      for (const Artifact& a : spec.artifacts) {
        if (std::visit([&](const auto& g) { return detail::inside(g, double(r), double(c)); }, a.geometry)) {
          base = a.intensity;
        }
      }
      double v = base + spec.noise_sigma * noise;
      if (integral) v = std::clamp(round_half_away(v), lo, hi);
      data[r * spec.width + c] = v;
    }
  }
  return {ScalarImage2D(spec.width, spec.height, std::move(data), spec.dtype), std::move(truth)};
}

// Convenience builders used by tests and the phantom tool.

inline PhantomSpec disk_phantom(double radius = 40, double intensity = 200, std::uint64_t seed = 7,
                                std::size_t size = 128) {
  PhantomSpec s;
  s.width = s.height = size;
  s.seed = seed;
  const double mid = double(size) / 2;
  s.shapes.push_back({Disk{mid, mid, radius}, intensity});
  return s;
}

inline PhantomSpec c_shape_phantom(double outer = 40, double inner = 20, double gap = 2,
                                   std::uint64_t seed = 7, std::size_t size = 128) {
  PhantomSpec s;
  s.width = s.height = size;
  s.seed = seed;
  const double mid = double(size) / 2;
  s.shapes.push_back({CShape{mid, mid, outer, inner, gap}, 200});
  return s;
}

// JSON ----------------------------------------------------------------------

namespace detail {

inline std::pair<double, double> read_center(const nlohmann::json& j) {
  const auto& c = j.at("center");
  if (!c.is_array() || c.size() != 2) throw Error(ErrorKind::format, "phantom: 'center' must be [row, col]");
  return {c[0].get<double>(), c[1].get<double>()};
}

}  // namespace detail

inline PhantomSpec phantom_from_json(const nlohmann::json& j) {
  try {
    PhantomSpec s;
    s.width = j.at("width").get<std::size_t>();
    s.height = j.at("height").get<std::size_t>();
    if (j.contains("dtype")) s.dtype = parse_dtype(j["dtype"].get<std::string>());
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("noise")) {
      s.noise_mean = j["noise"].value("mean", s.noise_mean);
      s.noise_sigma = j["noise"].value("sigma", s.noise_sigma);
    }
    for (const auto& e : j.value("shapes", nlohmann::json::array())) {
      const std::string type = e.at("type").get<std::string>();
      const double intensity = e.value("intensity", 200.0);
      if (type == "disk") {
        auto [r, c] = detail::read_center(e);
        s.shapes.push_back({Disk{r, c, e.at("radius").get<double>()}, intensity});
      } else if (type == "rectangle") {
        s.shapes.push_back({Rectangle{e.at("top").get<int>(), e.at("left").get<int>(),
                                      e.at("height").get<int>(), e.at("width").get<int>()},
                            intensity});
      } else if (type == "ring") {
        auto [r, c] = detail::read_center(e);
        s.shapes.push_back({Ring{r, c, e.at("outer_radius").get<double>(), e.at("inner_radius").get<double>()},
                            intensity});
      } else if (type == "c-shape") {
        auto [r, c] = detail::read_center(e);
        s.shapes.push_back({CShape{r, c, e.at("outer_radius").get<double>(),
                                   e.at("inner_radius").get<double>(), e.value("gap", 2.0)},
                            intensity});
      } else {
        throw Error(ErrorKind::format, "phantom: unknown shape type '" + type + "'");
      }
    }
    for (const auto& e : j.value("artifacts", nlohmann::json::array())) {
      const std::string type = e.at("type").get<std::string>();
      const double intensity = e.value("intensity", 250.0);
      auto [r, c] = detail::read_center(e);
      if (type == "table") {
        s.artifacts.push_back({TableArtifact{r, c, e.at("radius").get<double>(), e.value("thickness", 2.0),
                                             e.value("start_deg", 0.0), e.value("end_deg", 180.0)},
                               intensity});
      } else if (type == "jewelry") {
        s.artifacts.push_back({JewelryArtifact{r, c, e.value("radius", 2.0)}, intensity});
      } else if (type == "streak") {
        s.artifacts.push_back({StreakArtifact{r, c, e.value("length", 20.0), e.value("width", 1.0),
                                              e.value("rays", 8)},
                               intensity});
      } else {
        throw Error(ErrorKind::format, "phantom: unknown artifact type '" + type + "'");
      }
    }
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("phantom spec: ") + e.what());
  }
}

inline nlohmann::json to_json(const PhantomSpec& s) {
  nlohmann::json shapes = nlohmann::json::array();
  for (const Shape& sh : s.shapes) {
    nlohmann::json e = std::visit(
        [](const auto& g) -> nlohmann::json {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, Disk>) {
            return {{"type", "disk"}, {"center", {g.center_row, g.center_col}}, {"radius", g.radius}};
          } else if constexpr (std::is_same_v<T, Rectangle>) {
            return {{"type", "rectangle"}, {"top", g.top}, {"left", g.left}, {"height", g.height}, {"width", g.width}};
          } else if constexpr (std::is_same_v<T, Ring>) {
            return {{"type", "ring"}, {"center", {g.center_row, g.center_col}},
                    {"outer_radius", g.outer_radius}, {"inner_radius", g.inner_radius}};
          } else {
            return {{"type", "c-shape"}, {"center", {g.center_row, g.center_col}},
                    {"outer_radius", g.outer_radius}, {"inner_radius", g.inner_radius}, {"gap", g.gap}};
          }
        },
        sh.geometry);
    e["intensity"] = sh.intensity;
    shapes.push_back(std::move(e));
  }
  nlohmann::json artifacts = nlohmann::json::array();
  for (const Artifact& a : s.artifacts) {
    nlohmann::json e = std::visit(
        [](const auto& g) -> nlohmann::json {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, TableArtifact>) {
            return {{"type", "table"}, {"center", {g.center_row, g.center_col}}, {"radius", g.radius},
                    {"thickness", g.thickness}, {"start_deg", g.start_deg}, {"end_deg", g.end_deg}};
          } else if constexpr (std::is_same_v<T, JewelryArtifact>) {
            return {{"type", "jewelry"}, {"center", {g.center_row, g.center_col}}, {"radius", g.radius}};
          } else {
            return {{"type", "streak"}, {"center", {g.center_row, g.center_col}}, {"length", g.length},
                    {"width", g.width}, {"rays", g.rays}};
          }
        },
        a.geometry);
    e["intensity"] = a.intensity;
    artifacts.push_back(std::move(e));
  }
  return {{"width", s.width}, {"height", s.height}, {"dtype", std::string(to_string(s.dtype))},
          {"seed", s.seed}, {"noise", {{"mean", s.noise_mean}, {"sigma", s.noise_sigma}}},
          {"shapes", std::move(shapes)}, {"artifacts", std::move(artifacts)}};
}

}  // namespace bodysep
