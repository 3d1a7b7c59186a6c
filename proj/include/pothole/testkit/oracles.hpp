#pragma once

// Reference solvers that share no code path with the library's fitting
// routines. Used only to check them.

#include <array>

#include "pothole/road_model.hpp"
#include "pothole/surface.hpp"

namespace pothole::testkit {

/// g ~ a + b v + c u by Gaussian elimination with partial pivoting on the
/// mean-shifted normal equations; rss is summed from explicit residuals.
struct PlanarFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double rss = 0.0;
};
PlanarFit oracle_planar_fit(const RoadSampleSet& samples);

/// Least squares for the quadratic surface via column-pivoting Householder
/// QR on the raw design matrix.
std::array<double, 6> oracle_quadratic_fit(const SurfacePoints& points);

using Matrix6 = std::array<std::array<double, 6>, 6>;

/// M and q assembled entry by entry from the named power sums
/// S_X, S_Z, S_X2, ..., S_XYZ, without forming the design matrix.
struct PowerSumSystem {
  Matrix6 m{};
  std::array<double, 6> q{};
};
PowerSumSystem normal_equations_from_sums(const SurfacePoints& points);

/// Projection energy g'g - ||P_T g||^2 with P_T built by modified
/// Gram-Schmidt on T = [1, cos(phi) v - sin(phi) u].
double oracle_roll_energy(double phi, const RoadSampleSet& samples);

}  // namespace pothole::testkit
