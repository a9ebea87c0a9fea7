#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bodysep {

enum class ErrorKind {
  invalid_argument,  // bad parameter value (limit, thickness, threshold, ...)
  invalid_image,     // raster invariant violated on construction
  zero_variance,     // z-score of a constant image
  invalid_window,    // vmin >= vmax
  selection,         // contour number out of range
  io,                // file could not be opened / read / written
  format,            // unsupported or malformed file content
  invariant,         // internal consistency check failed
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_image: return "invalid-image";
    case ErrorKind::zero_variance: return "zero-variance";
    case ErrorKind::invalid_window: return "invalid-window";
    case ErrorKind::selection: return "selection";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bodysep
