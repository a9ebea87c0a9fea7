#pragma once

// Grayscale codecs: PGM (P2/P5, up to 16 bit), PNG (gray 1-16 bit, via
// libpng) and headerless little-endian .raw files described by an adjacent
// .json sidecar:
//
//   { "width": W, "height": H, "depth": D, "dtype": "int16", "byte_order": "little" }
//
// `depth` is optional (2D when absent). Loaders never rescale values.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include <nlohmann/json.hpp>

#include "bodysep/image.hpp"
#include "bodysep/volume.hpp"

namespace bodysep {

namespace fs = std::filesystem;

struct RawSidecar {
  std::size_t width = 0;
  std::size_t height = 0;
  std::optional<std::size_t> depth;
  SourceDtype dtype = SourceDtype::uint8;

  std::size_t voxel_count() const noexcept { return width * height * depth.value_or(1); }
  std::size_t byte_length() const noexcept { return voxel_count() * dtype_size(dtype); }
};

namespace detail {

inline std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

inline std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "read failed for '" + path.string() + "'");
  return bytes;
}

inline void write_file(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

// PGM -----------------------------------------------------------------------

struct PgmCursor {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const std::string& what) {
    skip_space_and_comments();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw Error(ErrorKind::format, "pgm: expected " + what);
    }
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1ull << 40)) throw Error(ErrorKind::format, "pgm: " + what + " too large");
    }
    return v;
  }
};

inline ScalarImage2D decode_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw Error(ErrorKind::format, "'" + name + "' is not a P2/P5 PGM file");
  }
  const bool ascii = bytes[1] == '2';
  PgmCursor cur{bytes, 2};
  const auto w = cur.number("width");
  const auto h = cur.number("height");
  const auto maxval = cur.number("maxval");
  if (w == 0 || h == 0) throw Error(ErrorKind::format, "pgm: zero dimension in '" + name + "'");
  if (maxval == 0 || maxval > 65535) throw Error(ErrorKind::format, "pgm: maxval out of range in '" + name + "'");
  const std::size_t n = w * h;
  std::vector<double> data(n);
  if (ascii) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = cur.number("pixel value");
      if (v > maxval) throw Error(ErrorKind::format, "pgm: pixel exceeds maxval in '" + name + "'");
      data[i] = static_cast<double>(v);
    }
  } else {
    // exactly one whitespace byte separates the header from the raster
    if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos])) {
      throw Error(ErrorKind::format, "pgm: malformed header in '" + name + "'");
    }
    ++cur.pos;
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() - cur.pos < n * bpp) {
      throw Error(ErrorKind::format, "pgm: truncated raster in '" + name + "'");
    }
    const unsigned char* p = bytes.data() + cur.pos;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t v = bpp == 2 ? (std::uint32_t{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
      if (v > maxval) throw Error(ErrorKind::format, "pgm: pixel exceeds maxval in '" + name + "'");
      data[i] = static_cast<double>(v);
    }
  }
  return ScalarImage2D(w, h, std::move(data),
                       maxval <= 255 ? SourceDtype::uint8 : SourceDtype::uint16);
}

inline std::vector<unsigned char> encode_pgm(std::size_t w, std::size_t h,
                                             std::span<const std::uint16_t> values, int bit_depth) {
  std::ostringstream header;
  header << "P5\n" << w << ' ' << h << '\n' << (bit_depth == 16 ? 65535 : 255) << '\n';
  const std::string hs = header.str();
  std::vector<unsigned char> out(hs.begin(), hs.end());
  out.reserve(hs.size() + values.size() * (bit_depth == 16 ? 2 : 1));
  for (std::uint16_t v : values) {
    if (bit_depth == 16) out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v & 0xFF));
  }
  return out;
}

// PNG -----------------------------------------------------------------------

struct PngReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  std::string message;
  std::vector<unsigned char> buffer;
  std::vector<png_bytep> rows;

  ~PngReadState() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  std::string message;
  std::vector<unsigned char> buffer;
  std::vector<png_bytep> rows;

  ~PngWriteState() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

template <typename State>
void png_error_handler(png_structp png, png_const_charp msg) {
  auto* st = static_cast<State*>(png_get_error_ptr(png));
  st->message = msg ? msg : "unknown libpng error";
  png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

inline ScalarImage2D load_png(const fs::path& path) {
  auto st = std::make_unique<PngReadState>();
  st->fp = std::fopen(path.string().c_str(), "rb");
  if (!st->fp) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, st->fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorKind::format, "'" + path.string() + "' is not a PNG file");
  }
  st->png = png_create_read_struct(PNG_LIBPNG_VER_STRING, st.get(),
                                   png_error_handler<PngReadState>, png_warning_handler);
  if (!st->png) throw Error(ErrorKind::io, "png: out of memory");
  st->info = png_create_info_struct(st->png);
  if (!st->info) throw Error(ErrorKind::io, "png: out of memory");

  if (setjmp(png_jmpbuf(st->png))) {
    throw Error(ErrorKind::format, "png: " + st->message + " in '" + path.string() + "'");
  }
  png_init_io(st->png, st->fp);
  png_set_sig_bytes(st->png, 8);
  png_read_info(st->png, st->info);
  const png_uint_32 w = png_get_image_width(st->png, st->info);
  const png_uint_32 h = png_get_image_height(st->png, st->info);
  const int depth = png_get_bit_depth(st->png, st->info);
  const int ctype = png_get_color_type(st->png, st->info);
  if (ctype != PNG_COLOR_TYPE_GRAY) {
    throw Error(ErrorKind::format, "'" + path.string() +
                                       "' is not single-channel grayscale (color or alpha PNG)");
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(st->png);
  png_read_update_info(st->png, st->info);
  const std::size_t rowbytes = png_get_rowbytes(st->png, st->info);
  st->buffer.resize(rowbytes * h);
  st->rows.resize(h);
  for (png_uint_32 r = 0; r < h; ++r) st->rows[r] = st->buffer.data() + r * rowbytes;
  png_read_image(st->png, st->rows.data());
  png_read_end(st->png, nullptr);

  const bool sixteen = depth == 16;
  std::vector<double> data(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = sixteen ? static_cast<double>((std::uint32_t{st->buffer[2 * i]} << 8) |
                                            st->buffer[2 * i + 1])
                      : static_cast<double>(st->buffer[i]);
  }
  return ScalarImage2D(w, h, std::move(data), sixteen ? SourceDtype::uint16 : SourceDtype::uint8);
}

inline void save_png(const fs::path& path, std::size_t w, std::size_t h,
                     std::span<const std::uint16_t> values, int bit_depth) {
  auto st = std::make_unique<PngWriteState>();
  const std::size_t bpp = bit_depth == 16 ? 2 : 1;
  st->buffer.resize(w * h * bpp);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (bpp == 2) {
      st->buffer[2 * i] = static_cast<unsigned char>(values[i] >> 8);
      st->buffer[2 * i + 1] = static_cast<unsigned char>(values[i] & 0xFF);
    } else {
      st->buffer[i] = static_cast<unsigned char>(values[i]);
    }
  }
  st->rows.resize(h);
  for (std::size_t r = 0; r < h; ++r) st->rows[r] = st->buffer.data() + r * w * bpp;

  st->fp = std::fopen(path.string().c_str(), "wb");
  if (!st->fp) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  st->png = png_create_write_struct(PNG_LIBPNG_VER_STRING, st.get(),
                                    png_error_handler<PngWriteState>, png_warning_handler);
  if (!st->png) throw Error(ErrorKind::io, "png: out of memory");
  st->info = png_create_info_struct(st->png);
  if (!st->info) throw Error(ErrorKind::io, "png: out of memory");
  if (setjmp(png_jmpbuf(st->png))) {
    throw Error(ErrorKind::io, "png: " + st->message + " while writing '" + path.string() + "'");
  }
  png_init_io(st->png, st->fp);
  png_set_IHDR(st->png, st->info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
               bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(st->png, st->info);
  png_write_image(st->png, st->rows.data());
  png_write_end(st->png, nullptr);
  if (std::fflush(st->fp) != 0) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

// RAW -----------------------------------------------------------------------

inline fs::path sidecar_path(const fs::path& raw) {
  fs::path p = raw;
  p.replace_extension(".json");
  return p;
}

inline double decode_le(const unsigned char* p, SourceDtype d) {
  switch (d) {
    case SourceDtype::uint8: return p[0];
    case SourceDtype::uint16: return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    case SourceDtype::int16: return static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
    case SourceDtype::float64: {
      std::uint64_t bits = 0;
      for (int k = 7; k >= 0; --k) bits = (bits << 8) | p[k];
      return std::bit_cast<double>(bits);
    }
  }
  return 0.0;
}

inline void encode_le(double v, SourceDtype d, std::vector<unsigned char>& out) {
  switch (d) {
    case SourceDtype::uint8: out.push_back(static_cast<unsigned char>(v)); return;
    case SourceDtype::uint16:
    case SourceDtype::int16: {
      const auto bits = d == SourceDtype::uint16
                            ? static_cast<std::uint16_t>(v)
                            : static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
      out.push_back(static_cast<unsigned char>(bits & 0xFF));
      out.push_back(static_cast<unsigned char>(bits >> 8));
      return;
    }
    case SourceDtype::float64: {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int k = 0; k < 8; ++k) out.push_back(static_cast<unsigned char>(bits >> (8 * k)));
      return;
    }
  }
}

inline std::vector<double> read_raw_values(const fs::path& raw, const RawSidecar& meta) {
  const auto bytes = read_file(raw);
  if (bytes.size() != meta.byte_length()) {
    throw Error(ErrorKind::format, "raw: '" + raw.string() + "' has " + std::to_string(bytes.size()) +
                                       " bytes, sidecar implies " + std::to_string(meta.byte_length()));
  }
  const std::size_t sz = dtype_size(meta.dtype);
  std::vector<double> data(meta.voxel_count());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = decode_le(bytes.data() + i * sz, meta.dtype);
    if (!std::isfinite(data[i])) {
      throw Error(ErrorKind::format, "raw: non-finite value in '" + raw.string() + "'");
    }
  }
  return data;
}

}  // namespace detail

inline RawSidecar parse_sidecar(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::format, "sidecar: expected a JSON object");
  auto extent = [&](const char* key) -> std::size_t {
    if (!j.contains(key) || !j[key].is_number_unsigned() || j[key].get<std::size_t>() == 0) {
      throw Error(ErrorKind::format, std::string("sidecar: '") + key + "' must be a positive integer");
    }
    return j[key].get<std::size_t>();
  };
  RawSidecar s;
  s.width = extent("width");
  s.height = extent("height");
  if (j.contains("depth")) s.depth = extent("depth");
  if (!j.contains("dtype") || !j["dtype"].is_string()) {
    throw Error(ErrorKind::format, "sidecar: 'dtype' missing");
  }
  s.dtype = parse_dtype(j["dtype"].get<std::string>());
  if (j.contains("byte_order") && j["byte_order"] != "little") {
    throw Error(ErrorKind::format, "sidecar: only little-endian raw data is supported");
  }
  for (const auto& [key, v] : j.items()) {
    if (key != "width" && key != "height" && key != "depth" && key != "dtype" && key != "byte_order") {
      throw Error(ErrorKind::format, "sidecar: unknown key '" + key + "'");
    }
  }
  return s;
}

inline nlohmann::json to_json(const RawSidecar& s) {
  nlohmann::json j{{"width", s.width}, {"height", s.height},
                   {"dtype", std::string(to_string(s.dtype))}, {"byte_order", "little"}};
  if (s.depth) j["depth"] = *s.depth;
  return j;
}

inline RawSidecar load_sidecar(const fs::path& raw) {
  const fs::path sc = detail::sidecar_path(raw);
  std::ifstream in(sc);
  if (!in) throw Error(ErrorKind::io, "missing sidecar '" + sc.string() + "' for '" + raw.string() + "'");
  try {
    return parse_sidecar(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, "sidecar '" + sc.string() + "': " + e.what());
  }
}

inline bool is_supported_image(const fs::path& p) {
  const std::string ext = detail::lower_extension(p);
  return ext == ".pgm" || ext == ".png" || ext == ".raw";
}

inline ScalarImage2D load_image(const fs::path& path) {
  const std::string ext = detail::lower_extension(path);
  if (ext == ".pgm") return detail::decode_pgm(detail::read_file(path), path.string());
  if (ext == ".png") return detail::load_png(path);
  if (ext == ".raw") {
    const RawSidecar meta = load_sidecar(path);
    if (meta.depth && *meta.depth != 1) {
      throw Error(ErrorKind::format, "'" + path.string() + "' is a volume (depth " +
                                         std::to_string(*meta.depth) + "); load it as a volume");
    }
    return ScalarImage2D(meta.width, meta.height, detail::read_raw_values(path, meta), meta.dtype);
  }
  if (!fs::exists(path)) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  throw Error(ErrorKind::format, "unknown image format '" + path.string() + "'");
}

namespace detail {

/// Smallest dtype able to hold values of both tags.
inline SourceDtype promote(SourceDtype a, SourceDtype b) {
  if (a == b) return a;
  if (a == SourceDtype::uint8) return b;
  if (b == SourceDtype::uint8) return a;
  return SourceDtype::float64;
}

}  // namespace detail

/// A directory of equally sized 2D files (sorted by name) or a .raw with a
/// `depth` in its sidecar. Slices are stacked along axis 0.
inline Volume3D load_volume(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && is_supported_image(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::io, "no image files in '" + path.string() + "'");
    std::vector<double> data;
    std::size_t w = 0, h = 0;
    SourceDtype dtype = SourceDtype::uint8;
    for (std::size_t i = 0; i < files.size(); ++i) {
      const ScalarImage2D img = load_image(files[i]);
      if (i == 0) {
        w = img.width();
        h = img.height();
        data.reserve(w * h * files.size());
      } else if (!img.same_shape(w, h)) {
        throw Error(ErrorKind::format, "slice '" + files[i].string() + "' is " +
                                           std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                           ", expected " + std::to_string(w) + "x" + std::to_string(h));
      }
      dtype = i == 0 ? img.source_dtype() : detail::promote(dtype, img.source_dtype());
      data.insert(data.end(), img.pixels().begin(), img.pixels().end());
    }
    return Volume3D({files.size(), h, w}, std::move(data), dtype);
  }
  if (detail::lower_extension(path) == ".raw") {
    const RawSidecar meta = load_sidecar(path);
    return Volume3D({meta.depth.value_or(1), meta.height, meta.width},
                    detail::read_raw_values(path, meta), meta.dtype);
  }
  const ScalarImage2D img = load_image(path);
  return Volume3D({1, img.height(), img.width()}, img.data(), img.source_dtype());
}

// Savers --------------------------------------------------------------------

namespace detail {

inline void save_gray(const fs::path& path, std::size_t w, std::size_t h,
                      std::span<const std::uint16_t> values, int bit_depth) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    save_png(path, w, h, values, bit_depth);
  } else if (ext == ".pgm") {
    write_file(path, encode_pgm(w, h, values, bit_depth));
  } else {
    throw Error(ErrorKind::format, "unsupported output extension for '" + path.string() +
                                       "' (use .png or .pgm)");
  }
}

inline std::vector<std::uint16_t> widen(std::span<const std::uint8_t> v, std::uint16_t scale = 1) {
  std::vector<std::uint16_t> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(),
                 [&](std::uint8_t x) { return static_cast<std::uint16_t>(x * scale); });
  return out;
}

}  // namespace detail

/// Mask as 8-bit grayscale with values {0, 255}.
inline void save_mask(const BinaryMask2D& mask, const fs::path& path) {
  detail::save_gray(path, mask.width(), mask.height(), detail::widen(mask.pixels(), 255), 8);
}

inline void save_panel(const ByteImage2D& panel, const fs::path& path) {
  detail::save_gray(path, panel.width(), panel.height(), detail::widen(panel.pixels()), 8);
}

/// Reads a mask written by save_mask. Only 0 and 255 are accepted.
inline BinaryMask2D load_mask(const fs::path& path) {
  const ScalarImage2D img = load_image(path);
  std::vector<std::uint8_t> bits(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (img[i] != 0.0 && img[i] != 255.0) {
      throw Error(ErrorKind::format, "'" + path.string() + "' is not a {0,255} mask");
    }
    bits[i] = img[i] != 0.0;
  }
  return BinaryMask2D(img.width(), img.height(), std::move(bits));
}

inline void save_raw(const fs::path& path, std::size_t width, std::size_t height,
                     std::optional<std::size_t> depth, std::span<const double> values,
                     SourceDtype dtype) {
  if (detail::lower_extension(path) != ".raw") {
    throw Error(ErrorKind::format, "raw output must use the .raw extension: '" + path.string() + "'");
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(values.size() * dtype_size(dtype));
  for (double v : values) {
    if (!value_fits_dtype(v, dtype)) {
      throw Error(ErrorKind::invalid_argument, "raw: value not representable as " +
                                                   std::string(to_string(dtype)));
    }
    detail::encode_le(v, dtype, bytes);
  }
  detail::write_file(path, bytes);
  RawSidecar meta{width, height, depth, dtype};
  std::ofstream sc(detail::sidecar_path(path));
  if (!sc) throw Error(ErrorKind::io, "cannot write sidecar for '" + path.string() + "'");
  sc << to_json(meta).dump(2) << '\n';
}

/// .raw keeps the dtype; .png/.pgm need integer values in [0, 65535]
/// (8-bit when the image dtype is uint8, 16-bit otherwise).
inline void save_image(const ScalarImage2D& img, const fs::path& path) {
  if (detail::lower_extension(path) == ".raw") {
    save_raw(path, img.width(), img.height(), std::nullopt, img.pixels(), img.source_dtype());
    return;
  }
  const int depth = img.source_dtype() == SourceDtype::uint8 ? 8 : 16;
  const double hi = depth == 8 ? 255.0 : 65535.0;
  std::vector<std::uint16_t> v(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double x = img[i];
    if (x < 0 || x > hi || std::trunc(x) != x) {
      throw Error(ErrorKind::invalid_argument, "'" + path.string() +
                                                   "': value not storable in an unsigned " +
                                                   std::to_string(depth) + "-bit image (use .raw)");
    }
    v[i] = static_cast<std::uint16_t>(x);
  }
  detail::save_gray(path, img.width(), img.height(), v, depth);
}

inline void save_volume_raw(const Volume3D& vol, const fs::path& path) {
  const auto& d = vol.dims();
  save_raw(path, d[2], d[1], d[0], vol.data(), vol.source_dtype());
}

inline std::string slice_file_name(const std::string& prefix, std::size_t i, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return prefix + "_" + buf + ext;
}

/// Writes mask_0000.png, mask_0001.png, ... (one file per axis-0 slice).
inline std::vector<fs::path> save_mask_volume(const BinaryMask3D& mask, const fs::path& dir,
                                              const std::string& ext = ".png") {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < mask.num_slices(0); ++i) {
    out.push_back(dir / slice_file_name("mask", i, ext));
    save_mask(mask.slice(0, i), out.back());
  }
  return out;
}

}  // namespace bodysep
