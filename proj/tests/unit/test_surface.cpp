#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "pothole/surface.hpp"
#include "pothole/testkit/oracles.hpp"
#include "test_util.hpp"

namespace pothole {
namespace {

using Coeffs = std::array<double, 6>;

double eval(const Coeffs& a, double x, double z) {
  return a[0] + a[1] * x + a[2] * z + a[3] * x * x + a[4] * z * z + a[5] * x * z;
}

double rel_norm_error(const Coeffs& got, const Coeffs& want) {
  double d = 0, n = 0;
  for (int i = 0; i < 6; ++i) {
    d += (got[i] - want[i]) * (got[i] - want[i]);
    n += want[i] * want[i];
  }
  return std::sqrt(d / n);
}

SurfacePoints grid_points(const Coeffs& a, int nx, int nz, double x0, double x1, double z0, double z1) {
  SurfacePoints p;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nz; ++j) {
      const double x = x0 + (x1 - x0) * i / (nx - 1);
      const double z = z0 + (z1 - z0) * j / (nz - 1);
      p.push_back(x, z, eval(a, x, z));
    }
  }
  return p;
}

const CameraModel kCam{700.0, 0.12, 320.0, 240.0, 256.0};

// ---------------------------------------------------------------------------
// Back-projection

TEST(PointCloud, UnitDepth) {
  DisparityImage d(4, 4);
  d.set(1, 2, kCam.focal_length * kCam.baseline);
  const auto c = disparity_to_pointcloud(d, kCam);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_NEAR(c.points[0].Z, 1.0, 1e-15);
  EXPECT_EQ(c.source_pixel[0], (PixelCoord{1, 2}));
}

TEST(PointCloud, PrincipalPointOnOpticalAxis) {
  DisparityImage d(640, 480);
  d.set(320, 240, 37.0);
  const auto c = disparity_to_pointcloud(d, kCam);
  EXPECT_EQ(c.points[0].X, 0.0);
  EXPECT_EQ(c.points[0].Y, 0.0);
}

TEST(PointCloud, ReprojectionRoundTrip) {
  std::mt19937_64 rng(2);
  DisparityImage d(64, 48);
  for (int v = 0; v < 48; ++v) {
    for (int u = 0; u < 64; ++u) d.set(u, v, test::uniform(rng, 0.5, 90));
  }
  const auto c = disparity_to_pointcloud(d, kCam, 1.0);
  std::size_t expected = 0;
  for (int v = 0; v < 48; ++v) {
    for (int u = 0; u < 64; ++u) expected += d.at(u, v) >= 1.0;
  }
  ASSERT_EQ(c.points.size(), expected);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto& p = c.points[i];
    const auto px = c.source_pixel[i];
    EXPECT_NEAR(kCam.focal_length * p.X / p.Z + kCam.cx, px.u, 1e-9 * std::max(1, px.u));
    EXPECT_NEAR(kCam.focal_length * p.Y / p.Z + kCam.cy, px.v, 1e-9 * std::max(1, px.v));
    EXPECT_LE(test::rel_error(kCam.focal_length * kCam.baseline / p.Z, d.at(px.u, px.v)), 1e-9);
  }
}

TEST(PointCloud, EmptyCloudAndBadCamera) {
  DisparityImage d(3, 3);
  d.set(0, 0, 0.5);
  try {
    disparity_to_pointcloud(d, kCam, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_cloud);
  }
  CameraModel bad = kCam;
  bad.baseline = 0;
  EXPECT_THROW(disparity_to_pointcloud(d, bad, 0.1), Error);
}

// ---------------------------------------------------------------------------
// Least squares

TEST(FitQuadratic, ConstantSurface) {
  const auto s = fit_quadratic_surface(grid_points({2, 0, 0, 0, 0, 0}, 5, 5, -2, 2, 4, 9));
  EXPECT_NEAR(s.a[0], 2.0, 1e-10);
  for (int i = 1; i < 6; ++i) EXPECT_NEAR(s.a[i], 0.0, 1e-10);
}

TEST(FitQuadratic, PlanarSurface) {
  const auto s = fit_quadratic_surface(grid_points({0, 1, -0.5, 0, 0, 0}, 6, 4, -3, 3, 2, 12));
  const Coeffs want{0, 1, -0.5, 0, 0, 0};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.a[i], want[i], 1e-10);
}

TEST(FitQuadratic, GridRecoveryAgreesWithOracle) {
  const Coeffs star{0.5, 0.1, -0.2, 0.01, 0.02, -0.005};
  const SurfacePoints p = grid_points(star, 20, 10, -5, 5, 2, 20);
  ASSERT_EQ(p.size(), 200u);
  const auto s = fit_quadratic_surface(p);
  EXPECT_LE(rel_norm_error(s.a, star), 1e-8);
  EXPECT_LE(rel_norm_error(testkit::oracle_quadratic_fit(p), s.a), 1e-8);
}

TEST(FitQuadratic, SixGenericPointsInterpolate) {
  SurfacePoints p;
  const double xs[6] = {0.1, 1.3, -2.2, 0.7, 3.1, -1.4};
  const double zs[6] = {4.0, 7.5, 5.2, 11.0, 9.3, 14.1};
  const double ys[6] = {1.0, -0.4, 2.5, 0.3, 0.9, -1.7};
  for (int i = 0; i < 6; ++i) p.push_back(xs[i], zs[i], ys[i]);
  const auto s = fit_quadratic_surface(p);
  const auto o = testkit::oracle_quadratic_fit(p);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(s(xs[i], zs[i]), ys[i], 1e-8);
    EXPECT_NEAR(eval(o, xs[i], zs[i]), ys[i], 1e-10);
  }
}

TEST(FitQuadratic, ResidualOrthogonality) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0, 0.05);
  for (int trial = 0; trial < 20; ++trial) {
    SurfacePoints p;
    for (int i = 0; i < 300; ++i) {
      const double x = test::uniform(rng, -4, 4), z = test::uniform(rng, 3, 25);
      p.push_back(x, z, 1.5 + 0.01 * x - 0.02 * z + 0.001 * x * z + noise(rng));
    }
    const auto s = fit_quadratic_surface(p);
    double wtr[6] = {}, scale[6] = {};
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double x = p.x[i], z = p.z[i];
      const double w[6] = {1, x, z, x * x, z * z, x * z};
      const double r = p.y[i] - s(x, z);
      for (int k = 0; k < 6; ++k) {
        wtr[k] += w[k] * r;
        scale[k] += std::abs(w[k] * p.y[i]);
      }
    }
    for (int k = 0; k < 6; ++k) EXPECT_LE(std::abs(wtr[k]), 1e-9 * scale[k]);
  }
}

TEST(FitQuadratic, ExplicitSumsMatchKernelAssembly) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    SurfacePoints p;
    for (int i = 0; i < 150; ++i) p.push_back(test::uniform(rng, -2, 2), test::uniform(rng, -1, 3), test::uniform(rng, -1, 1));
    const auto kernel = assemble_normal_equations(p);
    const auto sums = testkit::normal_equations_from_sums(p);
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 6; ++c) {
        EXPECT_LE(std::abs(kernel.m[r][c] - sums.m[r][c]), 1e-10 * std::max(1.0, std::abs(sums.m[r][c])));
      }
      EXPECT_LE(std::abs(kernel.q[r] - sums.q[r]), 1e-10 * std::max(1.0, std::abs(sums.q[r])));
    }
  }
}

TEST(FitQuadratic, Errors) {
  SurfacePoints few;
  for (int i = 0; i < 5; ++i) few.push_back(i, i * i, 1.0);
  try {
    fit_quadratic_surface(few);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::insufficient_points);
  }
  SurfacePoints line;
  for (int i = 0; i < 20; ++i) line.push_back(i, 2.0 * i, 1.0);
  try {
    fit_quadratic_surface(line);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_configuration);
  }
}

TEST(FitQuadratic, SelectRestrictsPoints) {
  const Coeffs star{1, 0.2, -0.1, 0.03, 0.01, 0.02};
  SurfacePoints p = grid_points(star, 8, 8, -2, 2, 3, 9);
  std::vector<std::uint8_t> sel(p.size(), 1);
  for (std::size_t i = 0; i < p.size(); i += 5) {
    p.y[i] += 10.0;
    sel[i] = 0;
  }
  EXPECT_LE(rel_norm_error(fit_quadratic_surface(p, SurfaceFrame::metric_xz, sel.data()).a, star), 1e-10);
}

// ---------------------------------------------------------------------------
// Evaluation

TEST(EvaluateSurface, Examples) {
  QuadraticSurface s;
  EXPECT_EQ(evaluate_surface(s, 3.0, -2.0), 0.0);
  s.a = {1, 0, 0, 1, 0, 0};
  EXPECT_EQ(evaluate_surface(s, 2.0, 123.0), 5.0);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    for (auto& c : s.a) c = test::uniform(rng, -2, 2);
    const double x = test::uniform(rng, -10, 10), z = test::uniform(rng, -10, 10);
    const double terms[6] = {s.a[0], s.a[1] * x, s.a[2] * z, s.a[3] * x * x, s.a[4] * z * z, s.a[5] * x * z};
    double want = 0;
    for (const double t : terms) want += t;
    EXPECT_NEAR(s(x, z), want, 1e-12 * 400);
  }
}

// ---------------------------------------------------------------------------
// RANSAC

struct Contaminated {
  SurfacePoints points;
  std::vector<bool> is_inlier;
};

const Coeffs kRoad{1.5, 0.01, -0.02, 0.002, 0.0005, -0.001};

Contaminated contaminated(std::size_t n, double outlier_fraction, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0, sigma > 0 ? sigma : 1);
  Contaminated c;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = test::uniform(rng, -3, 3), z = test::uniform(rng, 5, 20);
    const double y = eval(kRoad, x, z);
    const bool outlier = test::uniform(rng, 0, 1) < outlier_fraction;
    c.points.push_back(x, z, outlier ? y + test::uniform(rng, -0.5, 0.5) : y + (sigma > 0 ? noise(rng) : 0.0));
    c.is_inlier.push_back(!outlier);
  }
  return c;
}

TEST(Ransac, AllInliersReproducesDirectFit) {
  const Contaminated c = contaminated(400, 0.0, 0.0, 1);
  RansacConfig cfg;
  const auto r = ransac_fit(c.points, cfg);
  EXPECT_EQ(r.inlier_count, 400u);
  const auto direct = fit_quadratic_surface(c.points);
  EXPECT_LE(rel_norm_error(r.surface.a, direct.a), 1e-12);
}

TEST(Ransac, ThirtyPercentOutliers) {
  const Contaminated c = contaminated(1000, 0.3, 0.005, 7);
  RansacConfig cfg;
  cfg.inlier_threshold = 0.04;
  cfg.confidence = 0.999;
  cfg.seed = 42;
  const auto r = ransac_fit(c.points, cfg);
  std::size_t true_in = 0, kept = 0;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const double dev = std::abs(c.points.y[i] - eval(kRoad, c.points.x[i], c.points.z[i]));
    if (c.is_inlier[i]) {
      ++true_in;
      kept += r.inliers[i];
    } else if (dev > cfg.inlier_threshold) {
      EXPECT_FALSE(r.inliers[i]) << "outlier " << i << " at " << dev;
    }
  }
  EXPECT_GE(kept, 0.95 * true_in);
  EXPECT_LE(rel_norm_error(r.surface.a, kRoad), 1e-3);
}

TEST(Ransac, DeterministicPerSeedAndThreadCount) {
  const Contaminated c = contaminated(800, 0.4, 0.01, 3);
  RansacConfig cfg;
  cfg.seed = 9;
  const auto a = ransac_fit(c.points, cfg);
  const auto b = ransac_fit(c.points, cfg);
  EXPECT_EQ(a.surface.a, b.surface.a);
  EXPECT_EQ(a.inliers, b.inliers);
  for (const unsigned threads : {2u, 3u, 8u}) {
    cfg.threads = threads;
    const auto t = ransac_fit(c.points, cfg);
    EXPECT_EQ(t.surface.a, a.surface.a);
    EXPECT_EQ(t.inliers, a.inliers);
    EXPECT_EQ(t.iterations_used, a.iterations_used);
  }
}

TEST(Ransac, Errors) {
  SurfacePoints few;
  for (int i = 0; i < 5; ++i) few.push_back(i, i + 1, 0);
  try {
    ransac_fit(few, RansacConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::insufficient_points);
  }
  std::mt19937_64 rng(1);
  SurfacePoints junk;
  for (int i = 0; i < 200; ++i) junk.push_back(test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), test::uniform(rng, -100, 100));
  RansacConfig tight;
  tight.inlier_threshold = 1e-9;
  tight.max_iterations = 50;
  try {
    ransac_fit(junk, tight);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_consensus);
  }
  RansacConfig bad;
  bad.confidence = 1.5;
  EXPECT_THROW(ransac_fit(junk, bad), Error);
}

// ---------------------------------------------------------------------------
// Damage extraction

// Flat road 1.5 m below a level camera with a 0.06 m deep disk pothole of
// radius 1 m centred 8 m ahead.
struct MetricScene {
  DisparityImage disp{640, 480};
  BinaryMask footprint{640, 480, 0};
};

MetricScene metric_scene(double depth) {
  MetricScene s;
  const double h = 1.5;
  for (int v = 250; v < 480; ++v) {
    for (int u = 0; u < 640; ++u) {
      const double rx = (u - kCam.cx) / kCam.focal_length;
      const double ry = (v - kCam.cy) / kCam.focal_length;
      double Z = (h + depth) / ry;
      const double X = rx * Z;
      const bool inside = depth > 0 && X * X + (Z - 8.0) * (Z - 8.0) <= 1.0;
      if (!inside) Z = h / ry;
      s.disp.set(u, v, kCam.focal_length * kCam.baseline / Z);
      s.footprint(u, v) = inside;
    }
  }
  return s;
}

TEST(ExtractDamage, ExactSurfaceGivesEmptyMask) {
  const MetricScene s = metric_scene(0.0);
  const auto cloud = disparity_to_pointcloud(s.disp, kCam);
  const auto surf = fit_quadratic_surface(surface_points(cloud));
  EXPECT_EQ(extract_damage(cloud, surf, DamageCriteria{}).damaged_count(), 0u);
}

TEST(ExtractDamage, MetricPotholeFootprint) {
  const MetricScene s = metric_scene(0.06);
  const auto cloud = disparity_to_pointcloud(s.disp, kCam);
  RansacConfig cfg;
  cfg.inlier_threshold = 0.02;
  const auto fit = ransac_fit(surface_points(cloud), cfg);
  DamageCriteria crit;
  crit.tau = 0.04;
  const DamageMask m = extract_damage(cloud, fit.surface, crit);
  std::size_t gt = 0, diff = 0;
  for (std::size_t i = 0; i < m.damaged.size(); ++i) {
    gt += s.footprint[i];
    diff += m.damaged[i] != s.footprint[i];
  }
  ASSERT_GT(gt, 1000u);
  EXPECT_LE(diff, 0.02 * gt);
  EXPECT_EQ(m.regions.size(), 1u);
}

TEST(ExtractDamage, ZeroToleranceFlagsEveryOffSurfacePoint) {
  DisparityImage d(20, 20);
  QuadraticSurface s;
  s.frame = SurfaceFrame::image_uv;
  s.a = {30, 0, 0.5, 0, 0, 0};
  BinaryMask off(20, 20, 0);
  for (int v = 0; v < 20; ++v) {
    for (int u = 0; u < 20; ++u) {
      const double bump = (u * 7 + v * 3) % 5 == 0 ? 0.0 : ((u + v) % 2 ? 0.25 : -0.25);
      d.set(u, v, s(u, v) + bump);
      off(u, v) = bump != 0.0;
    }
  }
  DamageCriteria c;
  c.tau = 0.0;
  c.polarity = Polarity::both;
  c.open_radius = 0;
  c.min_region_area = 0;
  const DamageMask m = extract_damage(d, s, c);
  for (std::size_t i = 0; i < off.size(); ++i) {
    if (off[i]) { EXPECT_TRUE(m.damaged[i]); }
  }
  c.tau = 0.2;
  EXPECT_EQ(extract_damage(d, s, c).damaged, off);
}

TEST(ExtractDamage, PolaritySelectsSide) {
  DisparityImage d(3, 1);
  QuadraticSurface s;
  s.frame = SurfaceFrame::image_uv;
  s.a = {10, 0, 0, 0, 0, 0};
  d.set(0, 0, 9.0);   // below the road: smaller disparity
  d.set(1, 0, 11.0);  // above
  d.set(2, 0, 10.0);
  DamageCriteria c;
  c.tau = 0.5;
  c.open_radius = 0;
  c.min_region_area = 0;
  c.polarity = Polarity::below;
  EXPECT_EQ(extract_damage(d, s, c).damaged(0, 0), 1);
  EXPECT_EQ(extract_damage(d, s, c).damaged_count(), 1u);
  c.polarity = Polarity::above;
  EXPECT_EQ(extract_damage(d, s, c).damaged(1, 0), 1);
  c.polarity = Polarity::both;
  EXPECT_EQ(extract_damage(d, s, c).damaged_count(), 2u);
}

TEST(ExtractDamage, MonotoneInTau) {
  const MetricScene s = metric_scene(0.06);
  const auto cloud = disparity_to_pointcloud(s.disp, kCam);
  const auto surf = fit_quadratic_surface(surface_points(cloud));
  DamageCriteria c;
  c.open_radius = 0;
  c.min_region_area = 0;
  BinaryMask prev(640, 480, 1);
  for (double tau = 0.0; tau <= 0.1; tau += 0.01) {
    c.tau = tau;
    const DamageMask m = extract_damage(cloud, surf, c);
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (m.damaged[i]) { EXPECT_TRUE(prev[i]); }
    }
    prev = m.damaged;
  }
}

TEST(ExtractDamage, FrameMismatch) {
  DisparityImage d(3, 3);
  d.set(1, 1, 5.0);
  QuadraticSurface metric;
  metric.frame = SurfaceFrame::metric_xz;
  try {
    extract_damage(d, metric, DamageCriteria{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::frame_mismatch);
  }
  QuadraticSurface image;
  image.frame = SurfaceFrame::image_uv;
  EXPECT_THROW(extract_damage(disparity_to_pointcloud(d, kCam), image, DamageCriteria{}), Error);
}

// ---------------------------------------------------------------------------
// Files

TEST(Ply, RoundTripKeepsPointsAndPixels) {
  test::TempDir dir;
  const MetricScene s = metric_scene(0.06);
  const auto cloud = disparity_to_pointcloud(s.disp, kCam);
  write_ply(dir / "c.ply", cloud);
  const auto back = read_ply(dir / "c.ply");
  EXPECT_EQ(back.width, 640);
  EXPECT_EQ(back.height, 480);
  ASSERT_EQ(back.points.size(), cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); i += 97) {
    EXPECT_EQ(back.points[i].X, cloud.points[i].X);
    EXPECT_EQ(back.points[i].Y, cloud.points[i].Y);
    EXPECT_EQ(back.points[i].Z, cloud.points[i].Z);
    EXPECT_EQ(back.source_pixel[i], cloud.source_pixel[i]);
  }
}

TEST(Ply, RejectsBinaryAndGarbage) {
  test::TempDir dir;
  {
    std::ofstream(dir / "b.ply") << "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
    std::ofstream(dir / "g.ply") << "hello\n";
  }
  EXPECT_THROW(read_ply(dir / "b.ply"), Error);
  EXPECT_THROW(read_ply(dir / "g.ply"), Error);
}

TEST(FitReport, ContainsCoefficientsAndCounts) {
  const Contaminated c = contaminated(200, 0.0, 0.0, 2);
  const auto r = ransac_fit(c.points, RansacConfig{});
  const std::string text = format_fit_report(r);
  EXPECT_NE(text.find("frame = metric-xz"), std::string::npos);
  EXPECT_NE(text.find("a5 = "), std::string::npos);
  EXPECT_NE(text.find("inliers = 200"), std::string::npos);
}

TEST(Polarity, ParseAndFormat) {
  for (const auto p : {Polarity::below, Polarity::above, Polarity::both}) EXPECT_EQ(parse_polarity(to_string(p)), p);
  EXPECT_THROW(parse_polarity("sideways"), Error);
}

}  // namespace
}  // namespace pothole
