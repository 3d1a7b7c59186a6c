#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and, where the CPU allows, a vector variant selected at
// runtime. Element-wise kernels are bit-identical across variants;
// reductions agree to rounding.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace pothole::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Centered second moments of (u, v, g) about the given means.
struct CenteredMoments {
  double uu = 0, vv = 0, uv = 0, ug = 0, vg = 0, gg = 0;
};

/// Quadratic-surface coefficients in evaluation order
/// f(x, z) = c0 + c1 x + c2 z + c3 x^2 + c4 z^2 + c5 x z.
struct Quadratic {
  double c[6] = {0, 0, 0, 0, 0, 0};
};

/// Upper triangle of W^T W (row-major, 21 entries) and W^T y for the design
/// row (1, x, z, x^2, z^2, x z).
struct NormalSums {
  double wtw[21] = {};
  double wty[6] = {};
};

struct KernelTable {
  Isa isa;

  /// Sums of u, v and g.
  void (*sum3)(const double* u, const double* v, const double* g, std::size_t n, double out[3]);

  CenteredMoments (*centered_moments)(const double* u, const double* v, const double* g, std::size_t n,
                                      double mean_u, double mean_v, double mean_g);

  /// out[i] = (disp[i] - varkappa * (cos_phi * row - sin_phi * i)) - varkappa_kappa
  /// for i in [0, n); `row` is the image row, i the column.
  void (*road_residual_row)(const double* disp, std::size_t n, double row, double cos_phi, double sin_phi,
                            double varkappa, double varkappa_kappa, double* out);

  /// out[i] = y[i] - f(x[i], z[i]).
  void (*quadratic_residuals)(const double* x, const double* z, const double* y, std::size_t n,
                              const Quadratic& q, double* out);

  /// inlier[i] = |y[i] - f(x[i], z[i])| <= threshold; returns the inlier count.
  /// `inlier` may be null when only the count is needed.
  std::size_t (*count_inliers)(const double* x, const double* z, const double* y, std::size_t n,
                               const Quadratic& q, double threshold, std::uint8_t* inlier);

  /// Accumulates the normal-equation sums over the points where `select` is
  /// nonzero (all points when `select` is null).
  void (*normal_sums)(const double* x, const double* z, const double* y, const std::uint8_t* select,
                      std::size_t n, NormalSums& out);
};

const KernelTable& scalar_table() noexcept;
/// Null when the variant is not compiled in or the CPU lacks the extension.
const KernelTable* table_for(Isa isa) noexcept;

bool isa_available(Isa isa) noexcept;

/// Kernel set in use. Defaults to the widest available variant; the
/// POTHOLE_FORCE_SCALAR environment variable pins the scalar set.
const KernelTable& active() noexcept;
Isa active_isa() noexcept;

/// Overrides runtime selection; returns false if `isa` is unavailable.
bool select(Isa isa) noexcept;

/// Index of the upper-triangle entry (row, col) with row <= col in a 6x6 matrix.
constexpr int upper_index(int row, int col) noexcept { return row * 6 - row * (row - 1) / 2 + (col - row); }

}  // namespace pothole::kernels
