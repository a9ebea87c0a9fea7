#pragma once

// 3D grids and slicing. Storage is row-major over (d0, d1, d2); slicing
// along axis a fixes that index and keeps the remaining two axes in order
// as (rows, cols).

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bodysep/image.hpp"

namespace bodysep {

using Dims3 = std::array<std::size_t, 3>;

namespace detail {

inline void check_axis(int axis) {
  if (axis < 0 || axis > 2) {
    throw Error(ErrorKind::invalid_argument,
                "slice axis must be 0, 1 or 2, got " + std::to_string(axis));
  }
}

/// (rows, cols) of a slice taken along `axis`.
inline std::array<std::size_t, 2> slice_shape(const Dims3& d, int axis) {
  check_axis(axis);
  switch (axis) {
    case 0: return {d[1], d[2]};
    case 1: return {d[0], d[2]};
    default: return {d[0], d[1]};
  }
}

inline std::size_t flat_index(const Dims3& d, int axis, std::size_t i, std::size_t r,
                              std::size_t c) noexcept {
  switch (axis) {
    case 0: return (i * d[1] + r) * d[2] + c;
    case 1: return (r * d[1] + i) * d[2] + c;
    default: return (r * d[1] + c) * d[2] + i;
  }
}

}  // namespace detail

template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(Dims3 dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    for (std::size_t e : dims_) {
      if (e == 0) throw Error(ErrorKind::invalid_image, "volume extents must be >= 1");
    }
    if (data_.size() != dims_[0] * dims_[1] * dims_[2]) {
      throw Error(ErrorKind::invalid_image, "volume data length does not match its extents");
    }
  }
  explicit Grid3(Dims3 dims, T fill = T{})
      : Grid3(dims, std::vector<T>(dims[0] * dims[1] * dims[2], fill)) {}

  const Dims3& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }
  const std::vector<T>& data() const noexcept { return data_; }

  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }
  T& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }

  std::size_t num_slices(int axis) const {
    detail::check_axis(axis);
    return dims_[static_cast<std::size_t>(axis)];
  }

  std::vector<T> slice_values(int axis, std::size_t i) const {
    const auto [rows, cols] = detail::slice_shape(dims_, axis);
    if (i >= num_slices(axis)) throw Error(ErrorKind::invalid_argument, "slice index out of range");
    std::vector<T> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        out[r * cols + c] = data_[detail::flat_index(dims_, axis, i, r, c)];
      }
    }
    return out;
  }

  void assign_slice(int axis, std::size_t i, std::span<const T> values) {
    const auto [rows, cols] = detail::slice_shape(dims_, axis);
    if (i >= num_slices(axis) || values.size() != rows * cols) {
      throw Error(ErrorKind::invariant, "assign_slice: shape mismatch");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        data_[detail::flat_index(dims_, axis, i, r, c)] = values[r * cols + c];
      }
    }
  }

  friend bool operator==(const Grid3&, const Grid3&) = default;

 private:
  Dims3 dims_{0, 0, 0};
  std::vector<T> data_;
};

class Volume3D : public Grid3<double> {
 public:
  Volume3D() = default;
  Volume3D(Dims3 dims, std::vector<double> data, SourceDtype dtype = SourceDtype::float64)
      : Grid3<double>(dims, std::move(data)), dtype_(dtype) {
    for (double v : this->data()) {
      if (!value_fits_dtype(v, dtype_)) {
        throw Error(ErrorKind::invalid_image, "volume: value " + std::to_string(v) +
                                                  " is not representable as " +
                                                  std::string(to_string(dtype_)));
      }
    }
  }

  SourceDtype source_dtype() const noexcept { return dtype_; }

  ScalarImage2D slice(int axis, std::size_t i) const {
    const auto [rows, cols] = detail::slice_shape(dims(), axis);
    return ScalarImage2D(cols, rows, slice_values(axis, i), dtype_);
  }

  friend bool operator==(const Volume3D&, const Volume3D&) = default;

 private:
  SourceDtype dtype_ = SourceDtype::float64;
};

class BinaryMask3D : public Grid3<std::uint8_t> {
 public:
  BinaryMask3D() = default;
  explicit BinaryMask3D(Dims3 dims) : Grid3<std::uint8_t>(dims, std::uint8_t{0}) {}
  BinaryMask3D(Dims3 dims, std::vector<std::uint8_t> data)
      : Grid3<std::uint8_t>(dims, std::move(data)) {
    for (auto v : this->data()) {
      if (v > 1) throw Error(ErrorKind::invalid_image, "binary volume: value out of range");
    }
  }

  BinaryMask2D slice(int axis, std::size_t i) const {
    const auto [rows, cols] = detail::slice_shape(dims(), axis);
    return BinaryMask2D(cols, rows, slice_values(axis, i));
  }

  void set_slice(int axis, std::size_t i, const BinaryMask2D& m) {
    assign_slice(axis, i, m.pixels());
  }
};

}  // namespace bodysep
