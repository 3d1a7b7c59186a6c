#pragma once

// Quadratic road-surface modelling
//
//   y = f(x, z) = a0 + a1 x + a2 z + a3 x^2 + a4 z^2 + a5 x z
//
// either in the metric camera frame (x = X, z = Z, y = Y with Y pointing
// down) or in the image frame (x = u, z = v, y = disparity).

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pothole/imaging.hpp"
#include "pothole/segmentation.hpp"

namespace pothole {

enum class SurfaceFrame { metric_xz, image_uv };

std::string_view to_string(SurfaceFrame frame) noexcept;

/// Camera frame: X right, Y down, Z forward, metres.
struct Point3 {
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;
};

struct PointCloud3D {
  int width = 0;   ///< dimensions of the originating raster (0 when unknown)
  int height = 0;
  std::vector<Point3> points;
  std::vector<PixelCoord> source_pixel;  ///< parallel to `points`
};

/// Back-projects every valid pixel with disparity >= min_disparity:
/// Z = f b / g, X = (u - cx) Z / f, Y = (v - cy) Z / f.
PointCloud3D disparity_to_pointcloud(const DisparityImage& disp, const CameraModel& cam, double min_disparity = 1.0);

/// Samples (x, z, y) for surface fitting, stored per coordinate.
struct SurfacePoints {
  std::vector<double> x, z, y;

  std::size_t size() const noexcept { return y.size(); }
  void push_back(double xi, double zi, double yi) {
    x.push_back(xi);
    z.push_back(zi);
    y.push_back(yi);
  }
};

SurfacePoints surface_points(const PointCloud3D& cloud);
/// (u, v, disparity) at every valid pixel, optionally restricted to `select`.
SurfacePoints surface_points(const DisparityImage& disp, const BinaryMask* select = nullptr);

/// Centre and spread applied to (x, z) before solving.
struct Conditioning {
  double center_x = 0.0;
  double center_z = 0.0;
  double scale_x = 1.0;
  double scale_z = 1.0;
};

struct QuadraticSurface {
  std::array<double, 6> a{};  ///< coefficients in the original (unconditioned) frame
  SurfaceFrame frame = SurfaceFrame::metric_xz;
  Conditioning conditioning;

  double operator()(double x, double z) const noexcept;
};

double evaluate_surface(const QuadraticSurface& s, double x, double z) noexcept;

/// Least squares through the normal equations (W'W) a = W'y, assembled on
/// conditioned coordinates and solved by Cholesky, then mapped back to the
/// original frame. `select`, when given, restricts the fit to nonzero
/// entries.
QuadraticSurface fit_quadratic_surface(const SurfacePoints& points, SurfaceFrame frame = SurfaceFrame::metric_xz,
                                       const std::uint8_t* select = nullptr);

/// Raw normal equations M a = q with M = W'W and q = W'y for design rows
/// (1, x, z, x^2, z^2, x z), no conditioning applied.
struct NormalEquations {
  std::array<std::array<double, 6>, 6> m{};
  std::array<double, 6> q{};
};

NormalEquations assemble_normal_equations(const SurfacePoints& points);

/// Cholesky solve; throws degenerate_configuration when M is not positive definite.
std::array<double, 6> solve_normal_equations(const NormalEquations& eq);

struct RansacConfig {
  std::size_t max_iterations = 1000;
  double inlier_threshold = 0.04;  ///< frame units (m or px)
  double confidence = 0.999;
  std::size_t min_sample = 6;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

struct FitReport {
  QuadraticSurface surface;
  std::vector<std::uint8_t> inliers;  ///< parallel to the fitted points
  std::size_t inlier_count = 0;
  std::size_t point_count = 0;
  double rms_residual = 0.0;  ///< over inliers
  std::size_t iterations_used = 0;
};

/// Hypothesise-and-verify: hypothesis i draws `min_sample` points with a
/// generator seeded from (seed, i), so results do not depend on how
/// hypotheses are spread over threads. The iteration bound adapts as
/// log(1 - confidence) / log(1 - w^n); the best consensus set is refitted.
FitReport ransac_fit(const SurfacePoints& points, const RansacConfig& cfg,
                     SurfaceFrame frame = SurfaceFrame::metric_xz);

enum class Polarity { below, above, both };

std::string_view to_string(Polarity p) noexcept;
Polarity parse_polarity(std::string_view text);

struct DamageCriteria {
  double tau = 0.04;
  Polarity polarity = Polarity::below;
  int open_radius = 1;  ///< 0 disables the opening
  std::size_t min_region_area = 50;
  Connectivity connectivity = Connectivity::four;
};

/// Metric frame: depth residual r = Y - f(X, Z); potholes sit below the road
/// so r > 0. Polarity below flags r >= tau, above flags -r >= tau, both
/// flags |r| >= tau.
DamageMask extract_damage(const PointCloud3D& cloud, const QuadraticSurface& s, const DamageCriteria& criteria);

/// Image frame: r = f(u, v) - g, since a depression is farther away and so
/// has smaller disparity than the fitted road.
DamageMask extract_damage(const DisparityImage& disp, const QuadraticSurface& s, const DamageCriteria& criteria);

void write_ply(const std::filesystem::path& path, const PointCloud3D& cloud);
PointCloud3D read_ply(const std::filesystem::path& path);

std::string format_fit_report(const FitReport& report);
void write_fit_report(const std::filesystem::path& path, const FitReport& report);

}  // namespace pothole
