#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "pothole/imaging.hpp"
#include "pothole/road_model.hpp"
#include "pothole/text_io.hpp"
#include "test_util.hpp"

namespace pothole {
namespace {

RawRaster raw(int w, int h, int depth, std::vector<std::uint16_t> samples) { return {w, h, depth, std::move(samples)}; }

TEST(LoadDisparity, SixteenBitScaled) {
  test::TempDir dir;
  for (const char* name : {"d.png", "d.pgm"}) {
    write_raster(dir / name, raw(2, 1, 16, {12800, 0}));
    const DisparityImage d = load_disparity(dir / name, 256.0);
    EXPECT_TRUE(d.is_valid(0, 0));
    EXPECT_DOUBLE_EQ(d.at(0, 0), 50.0);
    EXPECT_FALSE(d.is_valid(1, 0));
    EXPECT_EQ(d.valid_count(), 1u);
  }
}

TEST(LoadDisparity, EightBitIdentityScale) {
  test::TempDir dir;
  write_raster(dir / "d.png", raw(1, 1, 8, {37}));
  EXPECT_DOUBLE_EQ(load_disparity(dir / "d.png", 1.0).at(0, 0), 37.0);
  EXPECT_DOUBLE_EQ(load_disparity(dir / "d.png").at(0, 0), 37.0);
}

TEST(LoadDisparity, DefaultScaleForSixteenBitIs256) {
  test::TempDir dir;
  write_raster(dir / "d.png", raw(1, 1, 16, {512}));
  EXPECT_DOUBLE_EQ(load_disparity(dir / "d.png").at(0, 0), 2.0);
}

TEST(LoadDisparity, CustomInvalidValue) {
  test::TempDir dir;
  write_raster(dir / "d.png", raw(2, 1, 16, {65535, 0}));
  const DisparityImage d = load_disparity(dir / "d.png", 256.0, 65535);
  EXPECT_FALSE(d.is_valid(0, 0));
  EXPECT_TRUE(d.is_valid(1, 0));
  EXPECT_DOUBLE_EQ(d.at(1, 0), 0.0);
}

TEST(LoadDisparity, Errors) {
  test::TempDir dir;
  EXPECT_THROW(load_disparity(dir / "missing.png"), Error);
  {
    std::ofstream(dir / "junk.png") << "not an image";
  }
  try {
    load_disparity(dir / "junk.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == Errc::io || e.code() == Errc::unsupported_format);
  }
  {
    std::ofstream(dir / "rgb.pgm", std::ios::binary) << "P6\n1 1\n255\nabc";
  }
  EXPECT_THROW(load_disparity(dir / "rgb.pgm"), Error);
  EXPECT_THROW(load_disparity(dir / "junk.png", 0.0), Error);
}

TEST(RasterIo, PngAndPgmRoundTrip) {
  test::TempDir dir;
  std::mt19937_64 rng(5);
  for (const int depth : {8, 16}) {
    RawRaster r{13, 7, depth, {}};
    for (int i = 0; i < 13 * 7; ++i) r.samples.push_back(static_cast<std::uint16_t>(rng() % (depth == 8 ? 256 : 65536)));
    for (const char* name : {"r.png", "r.pgm"}) {
      write_raster(dir / name, r);
      const RawRaster back = read_raster(dir / name);
      EXPECT_EQ(back.width, 13);
      EXPECT_EQ(back.height, 7);
      EXPECT_EQ(back.bit_depth, depth);
      EXPECT_EQ(back.samples, r.samples);
    }
  }
}

TEST(SaveDisparity, RoundTripAndInvalidCode) {
  test::TempDir dir;
  DisparityImage d(3, 2);
  d.set(0, 0, 50.0);
  d.set(1, 0, 0.001);  // would round to raw 0
  d.set(2, 1, 300.0);  // saturates
  save_disparity(d, dir / "d.png");
  const RawRaster r = read_raster(dir / "d.png");
  EXPECT_EQ(r.samples[0], 12800);
  EXPECT_EQ(r.samples[1], 1);
  EXPECT_EQ(r.samples[2], 0);
  EXPECT_EQ(r.samples[5], 65535);
  const DisparityImage back = load_disparity(dir / "d.png");
  EXPECT_EQ(back.valid_count(), d.valid_count());
}

TEST(SaveMask, AllBackground) {
  test::TempDir dir;
  save_mask(BinaryMask(4, 3, 0), dir / "m.png");
  const RawRaster r = read_raster(dir / "m.png");
  EXPECT_EQ(r.bit_depth, 8);
  EXPECT_TRUE(std::all_of(r.samples.begin(), r.samples.end(), [](auto s) { return s == 0; }));
}

TEST(SaveMask, SingleDamagedPixel) {
  test::TempDir dir;
  BinaryMask m(5, 4, 0);
  m(3, 2) = 1;
  save_mask(m, dir / "m.png");
  const RawRaster r = read_raster(dir / "m.png");
  for (int v = 0; v < 4; ++v) {
    for (int u = 0; u < 5; ++u) EXPECT_EQ(r.samples[v * 5 + u], (u == 3 && v == 2) ? 255 : 0);
  }
}

TEST(SaveMask, RoundTripIsIdempotent) {
  test::TempDir dir;
  std::mt19937_64 rng(17);
  BinaryMask m(31, 17, 0);
  for (auto& p : m.pixels()) p = rng() % 2;
  DamageMask dm{m, LabelImage(31, 17, 0), {}};
  save_mask(dm, dir / "a.png");
  const BinaryMask once = load_mask(dir / "a.png");
  EXPECT_EQ(once, m);
  save_mask(once, dir / "b.png");
  EXPECT_EQ(load_mask(dir / "b.png"), once);
  EXPECT_EQ(read_file(dir / "a.png"), read_file(dir / "b.png"));
}

TEST(SaveMask, UnwritablePath) {
  test::TempDir dir;
  EXPECT_THROW(save_mask(BinaryMask(2, 2, 0), dir / "no" / "such" / "dir" / "m.png"), Error);
}

GrayImage random_image(int w, int h, std::uint64_t seed, int levels = 256) {
  std::mt19937_64 rng(seed);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = static_cast<double>(rng() % levels);
  return img;
}

TEST(MedianFilter, ConstantImageIsFixedPoint) {
  const GrayImage img(9, 6, 4.25);
  EXPECT_EQ(median_filter(img, 2), img);
}

TEST(MedianFilter, ImpulseRemoved) {
  GrayImage img(5, 5, 0.0);
  img(2, 2) = 255.0;
  EXPECT_EQ(median_filter(img, 1)(2, 2), 0.0);
}

TEST(MedianFilter, MatchesSortAndPick) {
  const GrayImage img = random_image(7, 7, 3);
  const GrayImage out = median_filter(img, 1);
  for (int v = 0; v < 7; ++v) {
    for (int u = 0; u < 7; ++u) {
      std::vector<double> w;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          w.push_back(img(std::clamp(u + du, 0, 6), std::clamp(v + dv, 0, 6)));
        }
      }
      std::sort(w.begin(), w.end());
      EXPECT_EQ(out(u, v), w[4]) << u << "," << v;
    }
  }
}

TEST(MedianFilter, OutputWithinInputRange) {
  const GrayImage img = random_image(20, 11, 9);
  const GrayImage out = median_filter(img, 3);
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  for (const double p : out.pixels()) {
    EXPECT_GE(p, *lo);
    EXPECT_LE(p, *hi);
  }
}

TEST(MedianFilter, RejectsOversizedRadius) {
  const GrayImage img(8, 5, 1.0);
  EXPECT_THROW(median_filter(img, 5), Error);
  EXPECT_THROW(median_filter(img, 0), Error);
  EXPECT_NO_THROW(median_filter(img, 4));
}

TEST(DisparityImage, SetRejectsNegativeAndNonFinite) {
  DisparityImage d(2, 2);
  EXPECT_THROW(d.set(0, 0, -1.0), Error);
  EXPECT_THROW(d.set(0, 0, std::nan("")), Error);
  d.set(1, 1, 3.0);
  EXPECT_EQ(d.valid_count(), 1u);
  d.invalidate(1, 1);
  EXPECT_EQ(d.valid_count(), 0u);
  EXPECT_EQ(d.at(1, 1), 0.0);
}

TEST(DisparityImage, TransformPreservesInvalidCount) {
  DisparityImage d(16, 12);
  std::mt19937_64 rng(2);
  for (int v = 0; v < 12; ++v) {
    for (int u = 0; u < 16; ++u) {
      if (rng() % 5 != 0) d.set(u, v, 0.3 * (v + 40) + 0.01 * static_cast<double>(rng() % 100));
    }
  }
  const auto t = transform_disparity(d, fit_model(collect_road_samples(d)));
  std::size_t valid = 0;
  for (const auto b : t.valid.pixels()) valid += b;
  EXPECT_EQ(valid, d.valid_count());
  EXPECT_EQ(t.valid, d.validity());
}

}  // namespace
}  // namespace pothole
