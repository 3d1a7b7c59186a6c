#pragma once

#include "pothole/kernels.hpp"

namespace pothole::kernels {

/// Reference evaluation order shared by every variant.
inline double eval_quadratic(const Quadratic& q, double x, double z) noexcept {
  return ((((q.c[0] + q.c[1] * x) + q.c[2] * z) + q.c[3] * (x * x)) + q.c[4] * (z * z)) + q.c[5] * (x * z);
}

namespace scalar {
void sum3(const double* u, const double* v, const double* g, std::size_t n, double out[3]);
CenteredMoments centered_moments(const double* u, const double* v, const double* g, std::size_t n, double mean_u,
                                 double mean_v, double mean_g);
void road_residual_row(const double* disp, std::size_t n, double row, double cos_phi, double sin_phi,
                       double varkappa, double varkappa_kappa, double* out);
void quadratic_residuals(const double* x, const double* z, const double* y, std::size_t n, const Quadratic& q,
                         double* out);
std::size_t count_inliers(const double* x, const double* z, const double* y, std::size_t n, const Quadratic& q,
                          double threshold, std::uint8_t* inlier);
void normal_sums(const double* x, const double* z, const double* y, const std::uint8_t* select, std::size_t n,
                 NormalSums& out);
}  // namespace scalar

#if defined(POTHOLE_HAVE_AVX2)
namespace avx2 {
void sum3(const double* u, const double* v, const double* g, std::size_t n, double out[3]);
CenteredMoments centered_moments(const double* u, const double* v, const double* g, std::size_t n, double mean_u,
                                 double mean_v, double mean_g);
void road_residual_row(const double* disp, std::size_t n, double row, double cos_phi, double sin_phi,
                       double varkappa, double varkappa_kappa, double* out);
void quadratic_residuals(const double* x, const double* z, const double* y, std::size_t n, const Quadratic& q,
                         double* out);
std::size_t count_inliers(const double* x, const double* z, const double* y, std::size_t n, const Quadratic& q,
                          double threshold, std::uint8_t* inlier);
void normal_sums(const double* x, const double* z, const double* y, const std::uint8_t* select, std::size_t n,
                 NormalSums& out);
}  // namespace avx2
#endif

}  // namespace pothole::kernels
