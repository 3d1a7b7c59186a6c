#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pothole/road_model.hpp"
#include "pothole/testkit/oracles.hpp"
#include "pothole/testkit/synth.hpp"
#include "test_util.hpp"

namespace pothole::testkit {
namespace {

TEST(GenerateScene, NoiseFreeRecoversParameters) {
  SceneSpec spec;
  spec.phi_star = -0.06;
  spec.kappa_star = 25;
  spec.varkappa_star = 0.3;
  const auto truth = generate_scene(spec);
  const auto m = fit_model(collect_road_samples(truth.disparity));
  EXPECT_NEAR(m.phi, spec.phi_star, 1e-6);
  EXPECT_NEAR(m.kappa, spec.kappa_star, 1e-6 * spec.kappa_star);
  EXPECT_NEAR(m.varkappa, spec.varkappa_star, 1e-6 * spec.varkappa_star);
  EXPECT_EQ(truth.model.phi, spec.phi_star);
  EXPECT_EQ(truth.model.lambda, 0.0);
}

TEST(GenerateScene, FlatPotholeMaskIsExactDisk) {
  SceneSpec spec;
  spec.potholes.push_back({200.5, 300.25, 15.0, 6.0, PotholeProfile::flat});
  const auto truth = generate_scene(spec);
  std::size_t count = 0;
  for (int v = 0; v < spec.height; ++v) {
    for (int u = 0; u < spec.width; ++u) {
      const bool inside = (u - 200.5) * (u - 200.5) + (v - 300.25) * (v - 300.25) <= 225.0;
      EXPECT_EQ(truth.gt_mask(u, v), inside ? 1 : 0);
      count += inside;
      const double road = spec.varkappa_star * (v + spec.kappa_star);
      EXPECT_NEAR(truth.disparity.at(u, v), inside ? road - 6.0 : road, 1e-12);
    }
  }
  EXPECT_GT(count, 600u);
}

TEST(GenerateScene, ParabolicMaskIsHalfDepthDisk) {
  SceneSpec spec;
  spec.potholes.push_back({100, 300, 20.0, 8.0, PotholeProfile::parabolic});
  const auto truth = generate_scene(spec);
  for (int v = 270; v < 330; ++v) {
    for (int u = 70; u < 130; ++u) {
      const double r2 = (u - 100.0) * (u - 100.0) + (v - 300.0) * (v - 300.0);
      EXPECT_EQ(truth.gt_mask(u, v), r2 <= 200.0 ? 1 : 0) << u << "," << v;
    }
  }
}

TEST(GenerateScene, SeedsChangeNoiseNotMask) {
  SceneSpec a;
  a.noise_sigma = 0.3;
  a.potholes.push_back({320, 400, 12, 6});
  SceneSpec b = a;
  b.seed = 1;
  const auto ta = generate_scene(a);
  const auto tb = generate_scene(b);
  EXPECT_EQ(ta.gt_mask, tb.gt_mask);
  EXPECT_NE(ta.disparity.values(), tb.disparity.values());
  EXPECT_EQ(generate_scene(a).disparity.values(), ta.disparity.values());
}

TEST(GenerateScene, HorizonRowsStayInvalid) {
  SceneSpec spec;
  spec.horizon_row = 100;
  spec.noise_sigma = 0.2;
  const auto truth = generate_scene(spec);
  EXPECT_EQ(truth.disparity.valid_count(), static_cast<std::size_t>(spec.width) * (spec.height - 100));
  EXPECT_FALSE(truth.disparity.is_valid(5, 99));
  EXPECT_TRUE(truth.disparity.is_valid(5, 100));
}

TEST(GenerateScene, RejectsInconsistentSpecs) {
  SceneSpec neg;
  neg.phi_star = 0.3;  // top-right corner goes below zero
  try {
    generate_scene(neg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::negative_disparity);
  }
  SceneSpec outside;
  outside.potholes.push_back({5, 5, 10, 6});
  EXPECT_THROW(generate_scene(outside), Error);
  SceneSpec zero;
  zero.varkappa_star = 0;
  EXPECT_THROW(generate_scene(zero), Error);
  SceneSpec shallow;
  shallow.potholes.push_back({320, 300, 10, 0});
  EXPECT_THROW(generate_scene(shallow), Error);
}

TEST(GenerateScene, TransformLeavesRoadWithinFourSigma) {
  for (const auto& spec : detection_suite(4, 21)) {
    const auto truth = generate_scene(spec);
    const auto t = transform_disparity(truth.disparity, fit_model(collect_road_samples(truth.disparity)));
    // Lambda sits at the deepest pothole pixel; the road level is the median of road pixels.
    std::vector<double> road;
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      bool in_pothole = false;
      const int u = static_cast<int>(i % spec.width), v = static_cast<int>(i / spec.width);
      for (const auto& p : spec.potholes) in_pothole = in_pothole || pothole_depth(p, u, v) > 0;
      if (!in_pothole) road.push_back(t.values[i]);
    }
    std::nth_element(road.begin(), road.begin() + road.size() / 2, road.end());
    const double level = road[road.size() / 2];
    std::size_t within = 0;
    for (const double g : road) within += std::abs(g - level) <= 4 * spec.noise_sigma;
    EXPECT_GE(within, 0.99 * road.size());
  }
}

TEST(DetectionSuite, Shape) {
  const auto suite = detection_suite(10, 3);
  ASSERT_EQ(suite.size(), 10u);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& s = suite[i];
    EXPECT_EQ(s.potholes.size(), 2u);
    EXPECT_EQ(s.noise_sigma, 0.3);
    if (i % 2 == 0) {
      EXPECT_EQ(s.phi_star, 0.0);
    } else {
      EXPECT_GE(std::abs(s.phi_star), 0.04);
      EXPECT_LE(std::abs(s.phi_star), 0.1);
    }
    const auto truth = generate_scene(s);
    std::size_t area = 0;
    for (const auto m : truth.gt_mask.pixels()) area += m;
    EXPECT_NEAR(static_cast<double>(area), 1300.0, 40.0);
  }
  EXPECT_EQ(detection_suite(10, 3)[7].phi_star, suite[7].phi_star);
}

TEST(GaussianStream, MomentsAndDeterminism) {
  GaussianStream a(5), b(5);
  double s = 0, ss = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    s += x;
    ss += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.01);
}

// ---------------------------------------------------------------------------
// Oracles

TEST(OraclePlanarFit, ExactPlaneHasZeroResidual) {
  RoadSampleSet s;
  for (int i = 0; i < 40; ++i) {
    const double u = i % 8 * 10.0, v = i / 8 * 7.0;
    s.push_back({u, v, 3.0 + 0.4 * v - 0.02 * u});
  }
  const auto f = oracle_planar_fit(s);
  EXPECT_NEAR(f.a, 3.0, 1e-10);
  EXPECT_NEAR(f.b, 0.4, 1e-12);
  EXPECT_NEAR(f.c, -0.02, 1e-12);
  EXPECT_NEAR(f.rss, 0.0, 1e-18);
}

TEST(OraclePlanarFit, ThreePointsInterpolate) {
  RoadSampleSet s;
  s.push_back({0, 0, 1});
  s.push_back({5, 1, 7});
  s.push_back({2, 9, -3});
  const auto f = oracle_planar_fit(s);
  EXPECT_NEAR(f.rss, 0.0, 1e-20);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(f.a + f.b * s[i].v + f.c * s[i].u, s[i].g, 1e-12);
}

TEST(OraclePlanarFit, MatchesMinimumRollEnergy) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    RoadSampleSet s;
    const double phi = test::uniform(rng, -0.3, 0.3);
    std::normal_distribution<double> noise(0, 0.5);
    for (int i = 0; i < 100; ++i) {
      const double u = test::uniform(rng, 0, 640), v = test::uniform(rng, 100, 480);
      s.push_back({u, v, 0.3 * (std::cos(phi) * v - std::sin(phi) * u + 50) + noise(rng)});
    }
    const auto f = oracle_planar_fit(s);
    const double e = roll_energy(fit_roll_angle(s), s);
    EXPECT_LE(std::abs(e - f.rss), 1e-9 * f.rss);
  }
}

TEST(OraclePlanarFit, RankDeficient) {
  RoadSampleSet s;
  for (int i = 0; i < 10; ++i) s.push_back({1.0 * i, 2.0 * i, 1.0});
  try {
    oracle_planar_fit(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::rank_deficient);
  }
}

TEST(OracleQuadraticFit, ExactDataAndRankDeficiency) {
  SurfacePoints p;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double x = i - 3.0, z = j + 2.0;
      p.push_back(x, z, 0.5 + 0.1 * x - 0.2 * z + 0.01 * x * x + 0.02 * z * z - 0.005 * x * z);
    }
  }
  const auto a = oracle_quadratic_fit(p);
  const double want[6] = {0.5, 0.1, -0.2, 0.01, 0.02, -0.005};
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(a[k], want[k], 1e-12);
  SurfacePoints line;
  for (int i = 0; i < 10; ++i) line.push_back(i, i, 1.0);
  EXPECT_THROW(oracle_quadratic_fit(line), Error);
}

TEST(OracleRollEnergy, ZeroForExactLine) {
  RoadSampleSet s;
  for (int i = 0; i < 30; ++i) {
    const double u = i * 3.0, v = 100.0 + i % 5 * 11.0;
    s.push_back({u, v, 0.4 * (std::cos(0.1) * v - std::sin(0.1) * u + 60)});
  }
  EXPECT_NEAR(oracle_roll_energy(0.1, s), 0.0, 1e-9);
}

}  // namespace
}  // namespace pothole::testkit
