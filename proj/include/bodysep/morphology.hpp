#pragma once

// Binary hole filling and square (Chebyshev) dilation.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bodysep/image.hpp"

namespace bodysep {

namespace detail {

/// Marks every cell 4-connected to the grid border through cells where
/// `blocked` is 0. Iterative; the explicit stack never exceeds w*h entries.
inline std::vector<std::uint8_t> reach_from_border(std::size_t w, std::size_t h,
                                                   std::span<const std::uint8_t> blocked) {
  std::vector<std::uint8_t> seen(w * h, 0);
  std::vector<std::size_t> stack;
  stack.reserve(2 * (w + h));
  auto push = [&](std::size_t i) {
    if (!blocked[i] && !seen[i]) {
      seen[i] = 1;
      stack.push_back(i);
    }
  };
  for (std::size_t c = 0; c < w; ++c) {
    push(c);
    push((h - 1) * w + c);
  }
  for (std::size_t r = 0; r < h; ++r) {
    push(r * w);
    push(r * w + w - 1);
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const std::size_t r = i / w, c = i % w;
    if (r > 0) push(i - w);
    if (r + 1 < h) push(i + w);
    if (c > 0) push(i - 1);
    if (c + 1 < w) push(i + 1);
  }
  return seen;
}

}  // namespace detail

/// Foreground plus every background pixel whose 4-connected background
/// component does not touch the image border.
inline BinaryMask2D fill_holes(const BinaryMask2D& mask) {
  const auto outside = detail::reach_from_border(mask.width(), mask.height(), mask.pixels());
  BinaryMask2D out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = outside[i] ? 0 : 1;
  return out;
}

/// Dilation by a (2r+1)x(2r+1) square, clipped at the borders.
inline BinaryMask2D dilate_chebyshev(const BinaryMask2D& mask, std::size_t radius) {
  if (radius == 0) return mask;
  const std::size_t w = mask.width(), h = mask.height();

  // Sliding-window OR as a difference of prefix counts, rows then columns.
  BinaryMask2D rows(w, h);
  std::vector<std::size_t> prefix(std::max(w, h) + 1);
  for (std::size_t r = 0; r < h; ++r) {
    prefix[0] = 0;
    for (std::size_t c = 0; c < w; ++c) prefix[c + 1] = prefix[c] + mask(r, c);
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t lo = c >= radius ? c - radius : 0;
      const std::size_t hi = std::min(w, c + radius + 1);
      rows(r, c) = prefix[hi] - prefix[lo] > 0 ? 1 : 0;
    }
  }
  BinaryMask2D out(w, h);
  for (std::size_t c = 0; c < w; ++c) {
    prefix[0] = 0;
    for (std::size_t r = 0; r < h; ++r) prefix[r + 1] = prefix[r] + rows(r, c);
    for (std::size_t r = 0; r < h; ++r) {
      const std::size_t lo = r >= radius ? r - radius : 0;
      const std::size_t hi = std::min(h, r + radius + 1);
      out(r, c) = prefix[hi] - prefix[lo] > 0 ? 1 : 0;
    }
  }
  return out;
}

}  // namespace bodysep
