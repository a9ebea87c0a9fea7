#include <gtest/gtest.h>

#include "bodysep/phantoms.hpp"
#include "bodysep/pipeline.hpp"

namespace bodysep {
namespace {

TEST(Phantom, DiskTruthIsAnalytic) {
  const Phantom p = generate(disk_phantom(40, 200, 7, 128));
  std::size_t expect = 0;
  for (int r = 0; r < 128; ++r)
    for (int c = 0; c < 128; ++c) {
      const bool in = (r - 64) * (r - 64) + (c - 64) * (c - 64) <= 1600;
      expect += in;
      ASSERT_EQ(p.truth(r, c), in ? 1 : 0);
    }
  EXPECT_EQ(count_foreground(p.truth), expect);
  EXPECT_EQ(p.image.source_dtype(), SourceDtype::uint8);
}

TEST(Phantom, IntensitiesFollowSpec) {
  const Phantom p = generate(disk_phantom(40, 200, 2));
  double in = 0, out = 0;
  std::size_t ni = 0, no = 0;
  for (std::size_t i = 0; i < p.image.size(); ++i) {
    (p.truth[i] ? in : out) += p.image[i];
    ++(p.truth[i] ? ni : no);
  }
  EXPECT_NEAR(in / ni, 200, 0.5);
  EXPECT_NEAR(out / no, 10, 0.5);
  for (double v : p.image.pixels()) {
    EXPECT_GE(v, 0);
    EXPECT_EQ(v, std::round(v));
  }
}

TEST(Phantom, SeedDeterminesImage) {
  EXPECT_EQ(generate(disk_phantom(40, 200, 5)).image, generate(disk_phantom(40, 200, 5)).image);
  EXPECT_NE(generate(disk_phantom(40, 200, 5)).image, generate(disk_phantom(40, 200, 6)).image);
}

TEST(Phantom, TruthIndependentOfNoise) {
  PhantomSpec a = disk_phantom(30, 200, 1), b = a;
  b.seed = 99;
  b.noise_sigma = 20;
  EXPECT_EQ(generate(a).truth, generate(b).truth);
  EXPECT_EQ(generate(a).truth, phantom_truth(a));
}

TEST(Phantom, CShapeHasSlitAndCavity) {
  const Phantom p = generate(c_shape_phantom(40, 20, 2));
  EXPECT_EQ(p.truth(64, 64), 0);   // cavity
  EXPECT_EQ(p.truth(64, 90), 0);   // slit
  EXPECT_EQ(p.truth(63, 90), 0);
  EXPECT_EQ(p.truth(62, 90), 1);
  EXPECT_EQ(p.truth(65, 90), 1);
  EXPECT_EQ(p.truth(64, 38), 1);   // ring on the closed side
}

TEST(Phantom, ArtifactsAreNotBody) {
  PhantomSpec s = disk_phantom(35, 200, 3);
  s.artifacts.push_back({JewelryArtifact{10, 10, 3}, 250});
  s.artifacts.push_back({TableArtifact{64, 64, 55, 3, 250, 290}, 180});
  const Phantom p = generate(s);
  EXPECT_EQ(p.truth(10, 10), 0);
  EXPECT_GT(p.image(10, 10), 200);
  EXPECT_EQ(p.truth, phantom_truth(disk_phantom(35, 200, 3)));

  MaskPipelineConfig c;
  c.plot = false;
  const MaskResult all = body_mask_2d(p.image, c);
  EXPECT_EQ(all.mask(10, 10), 1);
  c.contour_numbers = std::vector<int>{1};
  const MaskResult largest = body_mask_2d(p.image, c);
  EXPECT_EQ(largest.mask(10, 10), 0);
  EXPECT_EQ(largest.mask(119, 64), 0);  // table arc below the disk
  EXPECT_GE(dice(largest.mask, p.truth), 0.99);
}

TEST(Phantom, StreaksDrawRays) {
  PhantomSpec s = disk_phantom(20, 200, 3);
  s.artifacts.push_back({StreakArtifact{64, 64, 40, 1, 4}, 250});
  const Phantom p = generate(s);
  EXPECT_GT(p.image(64, 100), 200);  // ray along +col
  EXPECT_EQ(p.truth(64, 100), 0);
}

TEST(Phantom, IntegerDtypesClampAndRound) {
  PhantomSpec s = disk_phantom(20, 200, 3, 64);
  s.dtype = SourceDtype::int16;
  s.noise_mean = -2000;
  s.noise_sigma = 40;
  s.shapes[0].intensity = 3172;
  const Phantom p = generate(s);
  EXPECT_EQ(p.image.source_dtype(), SourceDtype::int16);
  for (double v : p.image.pixels()) EXPECT_EQ(v, std::round(v));
  s.dtype = SourceDtype::uint8;
  s.noise_mean = 0;
  const Phantom q = generate(s);
  for (double v : q.image.pixels()) {
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 255);
  }
}

TEST(Phantom, ShapesMustFit) {
  EXPECT_THROW(generate(disk_phantom(80, 200, 1, 128)), Error);
  PhantomSpec s = disk_phantom();
  s.noise_sigma = -1;
  EXPECT_THROW(generate(s), Error);
}

TEST(Phantom, JsonRoundTrip) {
  const auto j = nlohmann::json::parse(R"({
    "width": 96, "height": 80, "dtype": "uint16", "seed": 12,
    "noise": {"mean": 100, "sigma": 8},
    "shapes": [
      {"type": "disk", "center": [40, 30], "radius": 20, "intensity": 900},
      {"type": "rectangle", "top": 5, "left": 60, "height": 10, "width": 20},
      {"type": "ring", "center": [40, 70], "outer_radius": 9, "inner_radius": 4},
      {"type": "c-shape", "center": [60, 70], "outer_radius": 9, "inner_radius": 4, "gap": 2}
    ],
    "artifacts": [
      {"type": "jewelry", "center": [5, 5]},
      {"type": "table", "center": [40, 48], "radius": 38, "start_deg": 240, "end_deg": 300},
      {"type": "streak", "center": [40, 30], "rays": 6}
    ]})");
  const PhantomSpec s = phantom_from_json(j);
  EXPECT_EQ(s.width, 96u);
  EXPECT_EQ(s.shapes.size(), 4u);
  EXPECT_EQ(s.artifacts.size(), 3u);
  const PhantomSpec back = phantom_from_json(to_json(s));
  EXPECT_EQ(generate(back).image, generate(s).image);
  EXPECT_EQ(generate(back).truth, generate(s).truth);
  EXPECT_THROW(phantom_from_json(nlohmann::json::parse(R"({"width":4,"height":4,"shapes":[{"type":"star"}]})")), Error);
  EXPECT_THROW(phantom_from_json(nlohmann::json::parse(R"({"width":4})")), Error);
}

}  // namespace
}  // namespace bodysep
