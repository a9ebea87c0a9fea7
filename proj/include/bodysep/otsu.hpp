#pragma once

// Histogram and Otsu's global threshold.
//
// For a split at t (class 0 = bins <= t, class 1 = bins > t) the
// between-class variance is
//
//   w0 * w1 * (mu0 - mu1)^2  ==  (N*S0 - n0*S)^2 / (N^2 * n0 * n1)
//
// with n0 / S0 the pixel count / intensity sum of class 0 and N / S the
// totals. The right-hand form only involves integers, so candidate splits
// are compared exactly (256-bit integer cross-multiplication) and ties are
// resolved deterministically toward the smallest t.

#include <array>
#include <cstdint>
#include <numeric>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "bodysep/image.hpp"

namespace bodysep {

struct Histogram256 {
  std::array<std::uint64_t, 256> counts{};

  std::uint64_t total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  }

  friend bool operator==(const Histogram256&, const Histogram256&) = default;
};

struct ThresholdResult {
  int threshold = 0;
  double between_class_variance = 0.0;
  bool degenerate = false;  // single-valued histogram, no valid split
};

inline Histogram256 histogram(const ByteImage2D& img) {
  Histogram256 h;
  for (std::uint8_t v : img.pixels()) ++h.counts[v];
  return h;
}

namespace detail {

using boost::multiprecision::int256_t;

struct SplitScore {
  int256_t numerator;    // (N*S0 - n0*S)^2
  int256_t denominator;  // n0 * n1
};

inline double score_to_variance(const SplitScore& s, std::uint64_t total) {
  const double n = static_cast<double>(total);
  return static_cast<double>(s.numerator) /
         (static_cast<double>(s.denominator) * n * n);
}

}  // namespace detail

/// Between-class variance of the split at t in [0, 254]; 0 when one class is empty.
inline double between_class_variance(const Histogram256& hist, int t) {
  if (t < 0 || t > 254) {
    throw Error(ErrorKind::invalid_argument, "between_class_variance: t must be in [0, 254]");
  }
  std::uint64_t n = 0, n0 = 0;
  detail::int256_t s = 0, s0 = 0;
  for (int k = 0; k < 256; ++k) {
    n += hist.counts[k];
    s += detail::int256_t(hist.counts[k]) * k;
    if (k <= t) {
      n0 += hist.counts[k];
      s0 += detail::int256_t(hist.counts[k]) * k;
    }
  }
  if (n0 == 0 || n0 == n) return 0.0;
  const detail::int256_t x = detail::int256_t(n) * s0 - detail::int256_t(n0) * s;
  return detail::score_to_variance({x * x, detail::int256_t(n0) * (n - n0)}, n);
}

inline ThresholdResult otsu_threshold(const Histogram256& hist) {
  using detail::int256_t;
  const std::uint64_t n = hist.total();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "otsu_threshold: empty histogram");

  int256_t s = 0;
  for (int k = 0; k < 256; ++k) s += int256_t(hist.counts[k]) * k;

  bool found = false;
  int best_t = 0;
  detail::SplitScore best{0, 1};
  std::uint64_t n0 = 0;
  int256_t s0 = 0;
  for (int t = 0; t < 255; ++t) {
    n0 += hist.counts[t];
    s0 += int256_t(hist.counts[t]) * t;
    if (n0 == 0 || n0 == n) continue;
    const int256_t x = int256_t(n) * s0 - int256_t(n0) * s;
    detail::SplitScore cur{x * x, int256_t(n0) * (n - n0)};
    // strict > keeps the earliest maximizer
    if (!found || cur.numerator * best.denominator > best.numerator * cur.denominator) {
      best = cur;
      best_t = t;
      found = true;
    }
  }

  if (!found) {
    int value = 0;
    while (hist.counts[value] == 0) ++value;
    return {value, 0.0, true};
  }
  return {best_t, detail::score_to_variance(best, n), false};
}

/// Foreground where pixel > threshold.
inline BinaryMask2D binarize(const ByteImage2D& img, int threshold) {
  if (threshold < 0 || threshold > 255) {
    throw Error(ErrorKind::invalid_argument,
                "binarize: threshold must be in [0, 255], got " + std::to_string(threshold));
  }
  BinaryMask2D out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    out[i] = img[i] > threshold ? 1 : 0;
  }
  return out;
}

}  // namespace bodysep
