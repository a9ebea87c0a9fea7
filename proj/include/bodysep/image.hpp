#pragma once

// Core raster types shared by every stage of the body/background pipeline.
//
// All rasters are row-major. Coordinates are (row, col) with row 0 at the
// top. Values are immutable in spirit: stages take const references and
// return fresh rasters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bodysep/error.hpp"

namespace bodysep {

/// Round half away from zero. The single rounding rule used by every module.
inline double round_half_away(double v) noexcept { return std::round(v); }

enum class SourceDtype { uint8, uint16, int16, float64 };

constexpr std::string_view to_string(SourceDtype d) noexcept {
  switch (d) {
    case SourceDtype::uint8: return "uint8";
    case SourceDtype::uint16: return "uint16";
    case SourceDtype::int16: return "int16";
    case SourceDtype::float64: return "float64";
  }
  return "unknown";
}

inline SourceDtype parse_dtype(std::string_view s) {
  if (s == "uint8") return SourceDtype::uint8;
  if (s == "uint16") return SourceDtype::uint16;
  if (s == "int16") return SourceDtype::int16;
  if (s == "float64") return SourceDtype::float64;
  throw Error(ErrorKind::format, "unknown dtype '" + std::string(s) + "'");
}

constexpr std::size_t dtype_size(SourceDtype d) noexcept {
  switch (d) {
    case SourceDtype::uint8: return 1;
    case SourceDtype::uint16: return 2;
    case SourceDtype::int16: return 2;
    case SourceDtype::float64: return 8;
  }
  return 0;
}

constexpr bool is_integer_dtype(SourceDtype d) noexcept {
  return d != SourceDtype::float64;
}

/// Closed value range of an integer dtype; float64 reports +-max double.
constexpr std::pair<double, double> dtype_range(SourceDtype d) noexcept {
  switch (d) {
    case SourceDtype::uint8: return {0.0, 255.0};
    case SourceDtype::uint16: return {0.0, 65535.0};
    case SourceDtype::int16: return {-32768.0, 32767.0};
    case SourceDtype::float64: break;
  }
  return {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::max()};
}

inline bool value_fits_dtype(double v, SourceDtype d) noexcept {
  if (!std::isfinite(v)) return false;
  if (!is_integer_dtype(d)) return true;
  auto [lo, hi] = dtype_range(d);
  return v >= lo && v <= hi && std::trunc(v) == v;
}

namespace detail {

struct ByteTraits {
  static constexpr std::string_view name = "byte image";
  static constexpr bool valid(std::uint8_t) noexcept { return true; }
};

struct MaskTraits {
  static constexpr std::string_view name = "binary mask";
  static constexpr bool valid(std::uint8_t v) noexcept { return v <= 1; }
};

struct ScalarTraits {
  static constexpr std::string_view name = "scalar image";
  static bool valid(double v) noexcept { return std::isfinite(v); }
};

}  // namespace detail

/// Fixed-size row-major grid. `Traits::valid` is checked for every value
/// passed in through the data constructor.
template <typename T, typename Traits>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height) {
    check_dims();
    if (!Traits::valid(fill)) {
      throw Error(ErrorKind::invalid_image,
                  std::string(Traits::name) + ": invalid fill value");
    }
    data_.assign(width * height, fill);
  }

  Raster(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims();
    if (data_.size() != width_ * height_) {
      throw Error(ErrorKind::invalid_image,
                  std::string(Traits::name) + ": data length " +
                      std::to_string(data_.size()) + " != " +
                      std::to_string(width_) + "x" + std::to_string(height_));
    }
    for (const T& v : data_) {
      if (!Traits::valid(v)) {
        throw Error(ErrorKind::invalid_image,
                    std::string(Traits::name) + ": value out of range");
      }
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  const T& operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * width_ + col];
  }
  T& operator()(std::size_t row, std::size_t col) noexcept {
    return data_[row * width_ + col];
  }

  const T& operator[](std::size_t i) const noexcept { return data_[i]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }

  std::span<const T> pixels() const noexcept { return data_; }
  std::span<T> pixels() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(std::size_t w, std::size_t h) const noexcept {
    return width_ == w && height_ == h;
  }
  template <typename U, typename V>
  bool same_shape(const Raster<U, V>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  void check_dims() const {
    if (width_ == 0 || height_ == 0) {
      throw Error(ErrorKind::invalid_image,
                  std::string(Traits::name) + ": dimensions must be >= 1");
    }
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using ByteImage2D = Raster<std::uint8_t, detail::ByteTraits>;
using BinaryMask2D = Raster<std::uint8_t, detail::MaskTraits>;

/// Real-valued input image that remembers the dtype it was loaded from.
/// Integer dtypes additionally require integral, in-range values.
class ScalarImage2D : public Raster<double, detail::ScalarTraits> {
 public:
  using Base = Raster<double, detail::ScalarTraits>;

  ScalarImage2D() = default;

  ScalarImage2D(std::size_t width, std::size_t height, std::vector<double> data,
                SourceDtype dtype = SourceDtype::float64)
      : Base(width, height, std::move(data)), dtype_(dtype) {
    for (double v : pixels()) {
      if (!value_fits_dtype(v, dtype_)) {
        throw Error(ErrorKind::invalid_image,
                    "scalar image: value " + std::to_string(v) +
                        " is not representable as " + std::string(to_string(dtype_)));
      }
    }
  }

  SourceDtype source_dtype() const noexcept { return dtype_; }

  friend bool operator==(const ScalarImage2D&, const ScalarImage2D&) = default;

 private:
  SourceDtype dtype_ = SourceDtype::float64;
};

inline ScalarImage2D to_scalar(const ByteImage2D& img) {
  return ScalarImage2D(img.width(), img.height(),
                       std::vector<double>(img.data().begin(), img.data().end()),
                       SourceDtype::uint8);
}

/// Byte cast with wrap-around: truncate toward zero, then mod 256 into
/// [0, 255]. Integer inputs behave exactly like a C unsigned-char cast.
inline std::uint8_t wrap_uint8(double v) noexcept {
  double w = std::fmod(std::trunc(v), 256.0);
  if (w < 0) w += 256.0;
  return static_cast<std::uint8_t>(w);
}

inline ByteImage2D cast_wrap_uint8(const ScalarImage2D& img) {
  ByteImage2D out(img.width(), img.height());
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                 wrap_uint8);
  return out;
}

/// Alternative cast: round, then clamp to [0, 255]. Not used by the pipeline.
inline ByteImage2D cast_saturate_uint8(const ScalarImage2D& img) {
  ByteImage2D out(img.width(), img.height());
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                 [](double v) {
                   return static_cast<std::uint8_t>(
                       std::clamp(round_half_away(v), 0.0, 255.0));
                 });
  return out;
}

/// Linear display window. Missing bounds default to the image min/max.
/// A constant image rendered with both bounds defaulted is all zeros.
inline ByteImage2D window_render(const ScalarImage2D& img,
                                 std::optional<double> vmin = std::nullopt,
                                 std::optional<double> vmax = std::nullopt) {
  if (img.empty()) throw Error(ErrorKind::invalid_image, "window_render: empty image");
  if (vmin && vmax && !(*vmin < *vmax)) {
    throw Error(ErrorKind::invalid_window, "window_render: vmin must be < vmax");
  }
  auto [mn, mx] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const double lo = vmin.value_or(*mn);
  const double hi = vmax.value_or(*mx);
  ByteImage2D out(img.width(), img.height());
  if (!(lo < hi)) {
    if (vmin || vmax) {
      throw Error(ErrorKind::invalid_window,
                  "window_render: resolved window is empty (vmin >= vmax)");
    }
    return out;
  }
  const double span = hi - lo;
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                 [&](double v) -> std::uint8_t {
                   if (v <= lo) return 0;
                   if (v >= hi) return 255;
                   return static_cast<std::uint8_t>(
                       std::clamp(round_half_away((v - lo) * 255.0 / span), 0.0, 255.0));
                 });
  return out;
}

// Mask helpers.

inline std::size_t count_foreground(const BinaryMask2D& m) noexcept {
  return static_cast<std::size_t>(std::count(m.pixels().begin(), m.pixels().end(), 1));
}

/// True when every foreground pixel of `a` is foreground in `b`.
inline bool is_subset(const BinaryMask2D& a, const BinaryMask2D& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::invariant, "is_subset: shape mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

inline BinaryMask2D mask_union(const BinaryMask2D& a, const BinaryMask2D& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::invariant, "mask_union: shape mismatch");
  BinaryMask2D out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] | b[i];
  return out;
}

/// Dice overlap 2|A n B| / (|A| + |B|); two empty masks score 1.
inline double dice(const BinaryMask2D& a, const BinaryMask2D& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::invariant, "dice: shape mismatch");
  std::size_t both = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i];
    nb += b[i];
    both += a[i] & b[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

}  // namespace bodysep
