#pragma once

// Contour extraction, ranking, selection and rasterization.
//
// Outer contours trace the border of each 8-connected foreground component.
// Hole contours trace the border of each 4-connected background component
// that does not touch the image border (the hole side of the boundary, so a
// hole contour's filled region is the cavity itself). Both kinds are
// returned in one flat list ranked by enclosed area.
//
// Border following starts at the component's topmost-leftmost pixel, whose
// left neighbour is never part of the component, and proceeds by the usual
// rotating neighbour search: clockwise to find the second point, then
// counterclockwise around each new point, starting just past the point we
// came from. Tracing stops when the walk returns to the start pixel and the
// pixel before it is the second point found initially.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bodysep/image.hpp"
#include "bodysep/morphology.hpp"

namespace bodysep {

struct Point {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Point&, const Point&) = default;
};

enum class ContourKind { outer, hole };

constexpr std::string_view to_string(ContourKind k) noexcept {
  return k == ContourKind::outer ? "outer" : "hole";
}

struct BoundingBox {
  int min_row = 0, min_col = 0, max_row = -1, max_col = -1;

  bool contains(Point p) const noexcept {
    return p.row >= min_row && p.row <= max_row && p.col >= min_col && p.col <= max_col;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Contour {
  std::vector<Point> points;  // closed chain, points.front() is the start pixel
  ContourKind kind = ContourKind::outer;
  std::size_t enclosed_area = 0;  // pixels of interior plus chain
  BoundingBox bbox;

  Point start() const { return points.front(); }
  friend bool operator==(const Contour&, const Contour&) = default;
};

struct ContourSet {
  std::vector<Contour> contours;  // enclosed_area desc, then start pixel

  std::size_t size() const noexcept { return contours.size(); }
  bool empty() const noexcept { return contours.empty(); }
  const Contour& operator[](std::size_t i) const { return contours[i]; }
  auto begin() const noexcept { return contours.begin(); }
  auto end() const noexcept { return contours.end(); }

  std::vector<std::size_t> areas() const {
    std::vector<std::size_t> out;
    out.reserve(contours.size());
    for (const auto& c : contours) out.push_back(c.enclosed_area);
    return out;
  }

  friend bool operator==(const ContourSet&, const ContourSet&) = default;
};

/// Stroke thickness that means "fill the interior".
inline constexpr int kFilled = -1;

inline void validate_thickness(int thickness) {
  if (thickness != kFilled && thickness < 1) {
    throw Error(ErrorKind::invalid_argument,
                "thickness must be -1 (filled) or >= 1, got " + std::to_string(thickness));
  }
}

namespace detail {

// Clockwise on screen (row grows downward), starting east.
inline constexpr std::array<Point, 8> kDirs8{{
    {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};
inline constexpr std::array<Point, 4> kDirs4{{{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};

struct Labels {
  std::vector<std::int32_t> id;       // 0 = not part of any labelled component
  std::vector<std::size_t> first;     // raster-first pixel index per label (1-based ids)
  std::vector<bool> touches_border;   // per label
  std::size_t count() const noexcept { return first.size(); }
};

/// Labels the components of pixels equal to `value`, 4- or 8-connected.
inline Labels label_components(const BinaryMask2D& mask, std::uint8_t value, int connectivity) {
  const std::size_t w = mask.width(), h = mask.height();
  Labels lab;
  lab.id.assign(w * h, 0);
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < w * h; ++seed) {
    if (mask[seed] != value || lab.id[seed] != 0) continue;
    const auto label = static_cast<std::int32_t>(lab.first.size() + 1);
    lab.first.push_back(seed);
    bool border = false;
    lab.id[seed] = label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const auto r = static_cast<int>(i / w), c = static_cast<int>(i % w);
      if (r == 0 || c == 0 || r + 1 == static_cast<int>(h) || c + 1 == static_cast<int>(w)) {
        border = true;
      }
      for (int d = 0; d < 8; d += (connectivity == 8 ? 1 : 2)) {
        const int nr = r + kDirs8[d].row, nc = c + kDirs8[d].col;
        if (nr < 0 || nc < 0 || nr >= static_cast<int>(h) || nc >= static_cast<int>(w)) continue;
        const std::size_t j = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
        if (mask[j] == value && lab.id[j] == 0) {
          lab.id[j] = label;
          stack.push_back(j);
        }
      }
    }
    lab.touches_border.push_back(border);
  }
  return lab;
}

template <std::size_t N>
std::vector<Point> trace_border(std::size_t w, std::size_t h, const std::vector<std::int32_t>& ids,
                                std::int32_t label, Point start,
                                const std::array<Point, N>& dirs) {
  static_assert(N == 4 || N == 8);
  constexpr int west = N == 8 ? 4 : 2;
  auto member = [&](Point p) {
    return p.row >= 0 && p.col >= 0 && p.row < static_cast<int>(h) &&
           p.col < static_cast<int>(w) &&
           ids[static_cast<std::size_t>(p.row) * w + static_cast<std::size_t>(p.col)] == label;
  };
  auto step = [&](Point p, int d) { return Point{p.row + dirs[d].row, p.col + dirs[d].col}; };
  auto dir_of = [&](Point from, Point to) {
    for (int d = 0; d < static_cast<int>(N); ++d) {
      if (step(from, d) == to) return d;
    }
    return -1;
  };

  // Second point: clockwise search starting at the (non-member) west neighbour.
  std::optional<Point> second;
  for (int k = 0; k < static_cast<int>(N); ++k) {
    const Point q = step(start, (west + k) % static_cast<int>(N));
    if (member(q)) {
      second = q;
      break;
    }
  }
  if (!second) return {start};

  std::vector<Point> chain;
  Point prev = *second;
  Point cur = start;
  for (;;) {
    // Counterclockwise around cur, starting just past prev.
    const int back = dir_of(cur, prev);
    Point next = prev;
    for (int k = 1; k <= static_cast<int>(N); ++k) {
      const Point q = step(cur, ((back - k) % static_cast<int>(N) + static_cast<int>(N)) %
                                    static_cast<int>(N));
      if (member(q)) {
        next = q;
        break;
      }
    }
    chain.push_back(cur);
    if (next == start && cur == *second) break;
    prev = cur;
    cur = next;
  }
  return chain;
}

inline BoundingBox bbox_of(const std::vector<Point>& pts) {
  BoundingBox b{pts.front().row, pts.front().col, pts.front().row, pts.front().col};
  for (Point p : pts) {
    b.min_row = std::min(b.min_row, p.row);
    b.max_row = std::max(b.max_row, p.row);
    b.min_col = std::min(b.min_col, p.col);
    b.max_col = std::max(b.max_col, p.col);
  }
  return b;
}

/// Interior-plus-chain of a closed chain, computed in the chain's bounding
/// box grown by one pixel. Calls fn(row, col) for every enclosed pixel.
template <typename Fn>
void for_each_enclosed(const std::vector<Point>& chain, const BoundingBox& bbox,
                       std::size_t width, std::size_t height, Fn&& fn) {
  const int r0 = std::max(bbox.min_row - 1, 0);
  const int c0 = std::max(bbox.min_col - 1, 0);
  const int r1 = std::min(bbox.max_row + 1, static_cast<int>(height) - 1);
  const int c1 = std::min(bbox.max_col + 1, static_cast<int>(width) - 1);
  const auto ww = static_cast<std::size_t>(c1 - c0 + 1);
  const auto wh = static_cast<std::size_t>(r1 - r0 + 1);
  std::vector<std::uint8_t> blocked(ww * wh, 0);
  for (Point p : chain) {
    blocked[static_cast<std::size_t>(p.row - r0) * ww + static_cast<std::size_t>(p.col - c0)] = 1;
  }
  const auto outside = reach_from_border(ww, wh, blocked);
  for (std::size_t i = 0; i < ww * wh; ++i) {
    if (!outside[i]) fn(r0 + static_cast<int>(i / ww), c0 + static_cast<int>(i % ww));
  }
}

inline std::size_t enclosed_area(const Contour& c, std::size_t width, std::size_t height) {
  std::size_t n = 0;
  for_each_enclosed(c.points, c.bbox, width, height, [&](int, int) { ++n; });
  return n;
}

}  // namespace detail

inline ContourSet find_contours(const BinaryMask2D& mask) {
  const std::size_t w = mask.width(), h = mask.height();
  ContourSet set;

  auto add = [&](const detail::Labels& lab, std::size_t k, ContourKind kind, auto dirs) {
    const std::size_t first = lab.first[k];
    const Point start{static_cast<int>(first / w), static_cast<int>(first % w)};
    Contour c;
    c.points = detail::trace_border(w, h, lab.id, static_cast<std::int32_t>(k + 1), start, dirs);
    c.kind = kind;
    c.bbox = detail::bbox_of(c.points);
    c.enclosed_area = detail::enclosed_area(c, w, h);
    set.contours.push_back(std::move(c));
  };

  const detail::Labels fg = detail::label_components(mask, 1, 8);
  for (std::size_t k = 0; k < fg.count(); ++k) add(fg, k, ContourKind::outer, detail::kDirs8);

  const detail::Labels bg = detail::label_components(mask, 0, 4);
  for (std::size_t k = 0; k < bg.count(); ++k) {
    if (!bg.touches_border[k]) add(bg, k, ContourKind::hole, detail::kDirs4);
  }

  std::sort(set.contours.begin(), set.contours.end(), [](const Contour& a, const Contour& b) {
    if (a.enclosed_area != b.enclosed_area) return a.enclosed_area > b.enclosed_area;
    return a.start() < b.start();
  });
  return set;
}

/// Keeps the k-th largest contours (1-based ranks). No list keeps everything.
inline ContourSet select_contours(const ContourSet& set,
                                  const std::optional<std::vector<int>>& contour_numbers) {
  if (!contour_numbers) return set;
  std::vector<bool> keep(set.size(), false);
  for (int k : *contour_numbers) {
    if (k < 1 || static_cast<std::size_t>(k) > set.size()) {
      throw Error(ErrorKind::selection, "contour number " + std::to_string(k) +
                                            " is out of range: image has " +
                                            std::to_string(set.size()) + " contour(s)");
    }
    keep[static_cast<std::size_t>(k - 1)] = true;
  }
  ContourSet out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (keep[i]) out.contours.push_back(set[i]);
  }
  return out;
}

/// Rasterizes the contours: filled (thickness -1) or as chains dilated by a
/// square of half-width thickness/2.
inline BinaryMask2D draw_contours(std::size_t width, std::size_t height, const ContourSet& set,
                                  int thickness = kFilled) {
  validate_thickness(thickness);
  BinaryMask2D out(width, height);
  if (thickness == kFilled) {
    for (const Contour& c : set) {
      detail::for_each_enclosed(c.points, c.bbox, width, height, [&](int r, int col) {
        out(static_cast<std::size_t>(r), static_cast<std::size_t>(col)) = 1;
      });
    }
    return out;
  }
  for (const Contour& c : set) {
    for (Point p : c.points) {
      out(static_cast<std::size_t>(p.row), static_cast<std::size_t>(p.col)) = 1;
    }
  }
  return dilate_chebyshev(out, static_cast<std::size_t>(thickness / 2));
}

inline nlohmann::json to_json(const Contour& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (Point p : c.points) pts.push_back({p.row, p.col});
  return {{"kind", std::string(to_string(c.kind))},
          {"area", c.enclosed_area},
          {"bbox", {c.bbox.min_row, c.bbox.min_col, c.bbox.max_row, c.bbox.max_col}},
          {"points", std::move(pts)}};
}

inline nlohmann::json to_json(const ContourSet& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : set) arr.push_back(to_json(c));
  return arr;
}

}  // namespace bodysep
