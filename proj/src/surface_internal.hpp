#pragma once

#include <optional>
#include <vector>

#include "pothole/kernels.hpp"
#include "pothole/surface.hpp"

namespace pothole::detail {

struct ConditionedBuffers {
  std::vector<double> x, z;
};

kernels::Quadratic as_kernel(const QuadraticSurface& s) noexcept;

/// Cholesky solve of the 6x6 normal equations; false when singular.
bool solve_normal_equations(const kernels::NormalSums& sums, std::array<double, 6>& solution);

std::array<double, 6> decondition(const std::array<double, 6>& conditioned, const Conditioning& c);

/// Conditioned fit over the selected points; nullopt for fewer than 6
/// points or a singular system.
std::optional<QuadraticSurface> try_fit(const double* x, const double* z, const double* y, const std::uint8_t* select,
                                        std::size_t n, SurfaceFrame frame, ConditionedBuffers& buf);

}  // namespace pothole::detail
