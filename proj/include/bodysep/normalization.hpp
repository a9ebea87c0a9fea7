#pragma once

// Z-score standardization with symmetric outlier clipping, mapped onto the
// byte range. Statistics are taken over every pixel of the image
// (background included) with the population standard deviation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "bodysep/image.hpp"

namespace bodysep {

struct NormalizationParams {
  double limit = 3.0;  // z-score units, > 0
};

inline void validate_limit(double limit) {
  if (!(limit > 0.0) || !std::isfinite(limit)) {
    throw Error(ErrorKind::invalid_argument,
                "normalization limit must be a positive finite number, got " +
                    std::to_string(limit));
  }
}

struct PixelStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divisor N)
};

/// Two-pass mean / population standard deviation.
inline PixelStats pixel_stats(const ScalarImage2D& img) {
  const auto px = img.pixels();
  const double n = static_cast<double>(px.size());
  double sum = 0.0;
  for (double v : px) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  double comp = 0.0;  // compensation term of the corrected two-pass formula
  for (double v : px) {
    const double d = v - mean;
    ss += d * d;
    comp += d;
  }
  ss -= comp * comp / n;
  return {mean, std::sqrt(std::max(ss, 0.0) / n)};
}

inline ScalarImage2D zscore(const ScalarImage2D& img) {
  const PixelStats s = pixel_stats(img);
  const auto [mn, mx] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  if (*mn == *mx || !(s.stddev > 0.0)) {
    throw Error(ErrorKind::zero_variance, "zscore: image has zero variance");
  }
  std::vector<double> out(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), out.begin(),
                 [&](double v) { return (v - s.mean) / s.stddev; });
  return ScalarImage2D(img.width(), img.height(), std::move(out), SourceDtype::float64);
}

inline ScalarImage2D clip_outliers(const ScalarImage2D& img, double limit) {
  validate_limit(limit);
  std::vector<double> out(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), out.begin(),
                 [&](double v) { return std::clamp(v, -limit, limit); });
  return ScalarImage2D(img.width(), img.height(), std::move(out), img.source_dtype());
}

/// Maps an already clipped z value in [-limit, +limit] to [0, 255].
inline std::uint8_t map_clipped_to_byte(double z, double limit) noexcept {
  if (z <= -limit) return 0;
  if (z >= limit) return 255;
  const double u = round_half_away((z + limit) * 255.0 / (2.0 * limit));
  return static_cast<std::uint8_t>(std::clamp(u, 0.0, 255.0));
}

inline ByteImage2D normalize_for_uint8(const ScalarImage2D& img,
                                       const NormalizationParams& params = {}) {
  validate_limit(params.limit);
  const ScalarImage2D clipped = clip_outliers(zscore(img), params.limit);
  ByteImage2D out(img.width(), img.height());
  std::transform(clipped.pixels().begin(), clipped.pixels().end(), out.pixels().begin(),
                 [&](double z) { return map_clipped_to_byte(z, params.limit); });
  return out;
}

/// Fraction of pixels pinned at 0 or 255 after the byte mapping.
inline double clipped_fraction(const ByteImage2D& normalized) noexcept {
  if (normalized.empty()) return 0.0;
  const auto n = std::count_if(normalized.pixels().begin(), normalized.pixels().end(),
                               [](std::uint8_t v) { return v == 0 || v == 255; });
  return static_cast<double>(n) / static_cast<double>(normalized.size());
}

}  // namespace bodysep
