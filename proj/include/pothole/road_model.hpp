#pragma once

// Road-disparity projection model. On an undamaged road every pixel (u, v)
// projects into the v-disparity plane as
//
//   g = varkappa * (-sin(phi) u + cos(phi) v + kappa)
//
// with stereo-rig roll angle phi. Fitting recovers (phi, kappa, varkappa);
// the transformation subtracts the model so the road becomes flat.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pothole/imaging.hpp"

namespace pothole {

struct RoadDisparityModel {
  double phi = 0.0;       ///< roll angle, rad, in (-pi/4, pi/4)
  double kappa = 0.0;
  double varkappa = 0.0;  ///< px per px
  double lambda = 0.0;    ///< offset making the transformed raster non-negative, px

  friend bool operator==(const RoadDisparityModel&, const RoadDisparityModel&) = default;
};

struct RoadPixelSample {
  double u = 0.0;
  double v = 0.0;
  double g = 0.0;  ///< disparity, px
};

/// Structure-of-arrays sample store; the kernels stream each coordinate.
class RoadSampleSet {
 public:
  RoadSampleSet() = default;
  explicit RoadSampleSet(std::span<const RoadPixelSample> samples);

  void reserve(std::size_t n);
  void push_back(const RoadPixelSample& s);
  std::size_t size() const noexcept { return g_.size(); }
  RoadPixelSample operator[](std::size_t i) const noexcept { return {u_[i], v_[i], g_[i]}; }

  std::span<const double> u() const noexcept { return u_; }
  std::span<const double> v() const noexcept { return v_; }
  std::span<const double> g() const noexcept { return g_; }

 private:
  std::vector<double> u_, v_, g_;
};

/// Every `stride`-th valid pixel in both directions, optionally restricted
/// to pixels where `select` is nonzero.
RoadSampleSet collect_road_samples(const DisparityImage& disp, int stride = 1, const BinaryMask* select = nullptr);

struct VDisparityMap {
  int rows = 0;
  int bins = 0;
  double bin_width = 1.0;
  std::vector<std::uint32_t> counts;  ///< rows x bins, row-major

  std::uint32_t at(int v, int bin) const noexcept { return counts[static_cast<std::size_t>(v) * bins + bin]; }
  std::uint64_t total() const noexcept;
};

/// Row-wise disparity histogram. Without an explicit bin count the map is
/// wide enough for the largest disparity; with one, larger disparities land
/// in the last bin.
VDisparityMap build_v_disparity(const DisparityImage& disp, double bin_width = 1.0,
                                std::optional<int> bins = std::nullopt);

double predict_road_disparity(const RoadDisparityModel& model, PixelCoord p);

/// Residual energy of a candidate roll angle, evaluated in O(1) per
/// angle from centered moments of the samples:
///
///   E(phi) = g'g - g'T (T'T)^-1 T'g,   T = [1, cos(phi) v - sin(phi) u]
///
/// Whenever the (u, v) scatter is non-degenerate the value is assembled as
/// the planar residual plus a non-negative angular excess, so the minimum
/// is located without cancellation error.
class RollEnergy {
 public:
  explicit RollEnergy(const RoadSampleSet& samples);

  double operator()(double phi) const;

  /// E(phi) - min over all angles; zero exactly at the optimal direction.
  double excess(double phi) const;

  /// Least-squares slope and intercept of g against t = cos(phi) v - sin(phi) u.
  struct LineFit {
    double intercept;
    double slope;
  };
  LineFit solve(double phi) const;

  bool planar_scatter() const noexcept { return planar_; }
  double sum_g_squared() const noexcept { return gtg_; }
  std::size_t sample_count() const noexcept { return n_; }

 private:
  double denominator(double c, double s) const;

  std::size_t n_ = 0;
  double mean_u_ = 0, mean_v_ = 0, mean_g_ = 0;
  double suu_ = 0, svv_ = 0, suv_ = 0, sug_ = 0, svg_ = 0, sgg_ = 0;
  double gtg_ = 0;
  bool planar_ = false;
  double det_ = 0;
  double beta_v_ = 0, beta_u_ = 0;  // planar slopes of g against v and u
  double planar_rss_ = 0;
};

double roll_energy(double phi, const RoadSampleSet& samples);

struct RollSearchOptions {
  int grid_points = 181;
  double tolerance = 1e-9;  ///< final golden-section bracket width, rad
};

/// Global minimiser of the roll energy on (-pi/4, pi/4): coarse grid, then
/// golden-section refinement around the best grid cell.
double fit_roll_angle(const RoadSampleSet& samples, const RollSearchOptions& options = {});

/// Roll angle plus (kappa, varkappa) from the line fit at that angle;
/// lambda starts at 0.
RoadDisparityModel fit_model(const RoadSampleSet& samples, const RollSearchOptions& options = {});

struct TransformedDisparity {
  GrayImage values;  ///< 0 at invalid pixels
  BinaryMask valid;
  RoadDisparityModel model;  ///< input model with lambda set
};

/// G'(p) = G(p) - varkappa (cos(phi) v - sin(phi) u) - varkappa kappa + lambda,
/// with lambda chosen so the minimum over valid pixels is exactly 0.
TransformedDisparity transform_disparity(const DisparityImage& disp, const RoadDisparityModel& model);

void write_model(const std::filesystem::path& path, const RoadDisparityModel& model);
RoadDisparityModel read_model(const std::filesystem::path& path);
std::string format_model(const RoadDisparityModel& model);
RoadDisparityModel parse_model(std::string_view text);

}  // namespace pothole
