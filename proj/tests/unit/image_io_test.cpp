#include <gtest/gtest.h>

#include <png.h>

#include <cstdio>
#include <fstream>

#include "bodysep/image_io.hpp"

namespace bodysep {
namespace {

class ImageIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bodysep_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_bytes(const std::string& name, const std::string& bytes) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << bytes;
    return p;
  }

  fs::path dir_;
};

std::string pgm5(std::size_t w, std::size_t h, const std::vector<unsigned char>& px, int maxval = 255) {
  std::string s = "P5\n# comment\n" + std::to_string(w) + " " + std::to_string(h) + "\n" +
                  std::to_string(maxval) + "\n";
  s.append(px.begin(), px.end());
  return s;
}

TEST_F(ImageIo, BinaryPgm) {
  const ScalarImage2D img = load_image(write_bytes("a.pgm", pgm5(3, 2, {0, 255, 7, 8, 9, 10})));
  EXPECT_EQ(img.source_dtype(), SourceDtype::uint8);
  EXPECT_EQ(img.width(), 3u);
  EXPECT_EQ(img.height(), 2u);
  EXPECT_EQ(img(0, 1), 255);
  EXPECT_EQ(img(1, 2), 10);
}

TEST_F(ImageIo, AsciiPgmSixteenBit) {
  const ScalarImage2D img = load_image(write_bytes("a.pgm", "P2\n2 2\n4095\n0 4095\n17 300\n"));
  EXPECT_EQ(img.source_dtype(), SourceDtype::uint16);
  EXPECT_EQ(img(0, 1), 4095);
  EXPECT_EQ(img(1, 1), 300);
}

TEST_F(ImageIo, BinaryPgmSixteenBitBigEndian) {
  const ScalarImage2D img = load_image(write_bytes("a.pgm", pgm5(2, 1, {0x01, 0x02, 0xFF, 0xFF}, 65535)));
  EXPECT_EQ(img[0], 258);
  EXPECT_EQ(img[1], 65535);
}

TEST_F(ImageIo, TruncatedPgmIsFormatError) {
  try {
    load_image(write_bytes("a.pgm", pgm5(4, 4, {1, 2, 3})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::format);
  }
}

TEST_F(ImageIo, RawInt16WithSidecar) {
  const ScalarImage2D src(2, 2, {-2000, 3172, 0, -1}, SourceDtype::int16);
  const fs::path p = dir_ / "ct.raw";
  save_image(src, p);
  EXPECT_TRUE(fs::exists(dir_ / "ct.json"));
  const ScalarImage2D img = load_image(p);
  EXPECT_EQ(img, src);
  EXPECT_EQ(img.source_dtype(), SourceDtype::int16);
}

TEST_F(ImageIo, RawFloatRoundTrip) {
  const ScalarImage2D src(3, 1, {0.0, 936.0, 0.125}, SourceDtype::float64);
  save_image(src, dir_ / "f.raw");
  EXPECT_EQ(load_image(dir_ / "f.raw"), src);
}

TEST_F(ImageIo, TruncatedRawIsByteLengthError) {
  write_bytes("t.json", R"({"width":4,"height":4,"dtype":"int16","byte_order":"little"})");
  const fs::path p = write_bytes("t.raw", std::string(31, '\0'));
  try {
    load_image(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::format);
    EXPECT_NE(std::string(e.what()).find("32"), std::string::npos);
  }
}

TEST_F(ImageIo, SidecarValidation) {
  EXPECT_THROW(parse_sidecar(nlohmann::json::parse(R"({"width":2,"height":2,"dtype":"int8"})")), Error);
  EXPECT_THROW(parse_sidecar(nlohmann::json::parse(R"({"width":2,"height":2,"dtype":"int16","byte_order":"big"})")), Error);
  EXPECT_THROW(parse_sidecar(nlohmann::json::parse(R"({"width":2,"dtype":"int16"})")), Error);
  EXPECT_THROW(parse_sidecar(nlohmann::json::parse(R"({"width":2,"height":2,"dtype":"int16","extra":1})")), Error);
  const RawSidecar s = parse_sidecar(nlohmann::json::parse(R"({"width":3,"height":2,"depth":4,"dtype":"uint16"})"));
  EXPECT_EQ(s.byte_length(), 48u);
  EXPECT_THROW(load_image(write_bytes("m.raw", "")), Error);  // no sidecar
}

TEST_F(ImageIo, PngRoundTripEightAndSixteenBit) {
  const ScalarImage2D a(3, 2, {0, 1, 2, 3, 254, 255}, SourceDtype::uint8);
  save_image(a, dir_ / "a.png");
  EXPECT_EQ(load_image(dir_ / "a.png"), a);
  const ScalarImage2D b(2, 2, {0, 300, 4095, 65535}, SourceDtype::uint16);
  save_image(b, dir_ / "b.png");
  EXPECT_EQ(load_image(dir_ / "b.png"), b);
  EXPECT_THROW(save_image(ScalarImage2D(1, 1, {-5}, SourceDtype::int16), dir_ / "c.png"), Error);
}

TEST_F(ImageIo, ColorPngRejected) {
  const fs::path p = dir_ / "rgb.png";
  FILE* fp = std::fopen(p.c_str(), "wb");
  ASSERT_NE(fp, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, 2, 1, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  unsigned char row[6] = {255, 0, 0, 0, 255, 0};
  png_write_row(png, row);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  try {
    load_image(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::format);
  }
}

TEST_F(ImageIo, CorruptPngIsError) {
  EXPECT_THROW(load_image(write_bytes("x.png", "\x89PNG\r\n\x1a\nnot really")), Error);
}

TEST_F(ImageIo, MissingAndUnknownFiles) {
  try {
    load_image(dir_ / "missing.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
  EXPECT_THROW(load_image(write_bytes("a.bmp", "BM")), Error);
}

TEST_F(ImageIo, DirectoryOfSlices) {
  fs::create_directories(dir_ / "vol");
  for (int i = 0; i < 3; ++i) {
    std::vector<unsigned char> px(16, static_cast<unsigned char>(10 * i));
    std::ofstream(dir_ / "vol" / ("s" + std::to_string(i) + ".pgm"), std::ios::binary) << pgm5(4, 4, px);
  }
  const Volume3D v = load_volume(dir_ / "vol");
  EXPECT_EQ(v.dims(), (Dims3{3, 4, 4}));
  EXPECT_EQ(v(2, 3, 3), 20);
  EXPECT_EQ(v(0, 0, 0), 0);
}

TEST_F(ImageIo, DirectoryWithMixedDimensionsNamesFile) {
  fs::create_directories(dir_ / "vol");
  std::ofstream(dir_ / "vol" / "a.pgm", std::ios::binary) << pgm5(4, 4, std::vector<unsigned char>(16, 1));
  std::ofstream(dir_ / "vol" / "b.pgm", std::ios::binary) << pgm5(5, 4, std::vector<unsigned char>(20, 1));
  try {
    load_volume(dir_ / "vol");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("b.pgm"), std::string::npos);
  }
}

TEST_F(ImageIo, EmptyDirectoryIsError) {
  fs::create_directories(dir_ / "empty");
  EXPECT_THROW(load_volume(dir_ / "empty"), Error);
}

TEST_F(ImageIo, RawVolumeRoundTrip) {
  std::vector<double> data(2 * 3 * 4);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = -2000.0 + 211.0 * double(i);
  const Volume3D v({2, 3, 4}, data, SourceDtype::int16);
  save_volume_raw(v, dir_ / "v.raw");
  const Volume3D back = load_volume(dir_ / "v.raw");
  EXPECT_EQ(back, v);
  EXPECT_THROW(load_image(dir_ / "v.raw"), Error);  // depth 2 is not a 2D image
}

TEST_F(ImageIo, MaskStoredAsZeroAnd255) {
  const BinaryMask2D m(3, 1, std::vector<std::uint8_t>{0, 1, 1});
  save_mask(m, dir_ / "m.png");
  const ScalarImage2D raw = load_image(dir_ / "m.png");
  EXPECT_EQ(raw[1], 255);
  EXPECT_EQ(raw[0], 0);
  EXPECT_EQ(load_mask(dir_ / "m.png"), m);
  save_mask(m, dir_ / "m.pgm");
  EXPECT_EQ(load_mask(dir_ / "m.pgm"), m);
  EXPECT_THROW(save_mask(m, dir_ / "m.raw"), Error);
  save_image(ScalarImage2D(1, 1, {7}, SourceDtype::uint8), dir_ / "seven.png");
  EXPECT_THROW(load_mask(dir_ / "seven.png"), Error);
}

TEST_F(ImageIo, MaskVolumeNaming) {
  BinaryMask3D m({3, 2, 2});
  EXPECT_EQ(slice_file_name("mask", 7, ".png"), "mask_0007.png");
  const auto paths = save_mask_volume(m, dir_ / "out");
  ASSERT_EQ(paths.size(), 3u);
  EXPECT_EQ(paths[0].filename(), "mask_0000.png");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "mask_0002.png"));
}

}  // namespace
}  // namespace bodysep
