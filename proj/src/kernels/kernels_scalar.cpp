#include <cmath>

#include "kernels_impl.hpp"

namespace pothole::kernels::scalar {

void sum3(const double* u, const double* v, const double* g, std::size_t n, double out[3]) {
  double su = 0.0, sv = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    su += u[i];
    sv += v[i];
    sg += g[i];
  }
  out[0] = su;
  out[1] = sv;
  out[2] = sg;
}

CenteredMoments centered_moments(const double* u, const double* v, const double* g, std::size_t n, double mean_u,
                                 double mean_v, double mean_g) {
  CenteredMoments m;
  for (std::size_t i = 0; i < n; ++i) {
    const double du = u[i] - mean_u;
    const double dv = v[i] - mean_v;
    const double dg = g[i] - mean_g;
    m.uu += du * du;
    m.vv += dv * dv;
    m.uv += du * dv;
    m.ug += du * dg;
    m.vg += dv * dg;
    m.gg += dg * dg;
  }
  return m;
}

void road_residual_row(const double* disp, std::size_t n, double row, double cos_phi, double sin_phi,
                       double varkappa, double varkappa_kappa, double* out) {
  const double row_term = cos_phi * row;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = row_term - sin_phi * static_cast<double>(i);
    out[i] = (disp[i] - varkappa * t) - varkappa_kappa;
  }
}

void quadratic_residuals(const double* x, const double* z, const double* y, std::size_t n, const Quadratic& q,
                         double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = y[i] - eval_quadratic(q, x[i], z[i]);
  }
}

std::size_t count_inliers(const double* x, const double* z, const double* y, std::size_t n, const Quadratic& q,
                          double threshold, std::uint8_t* inlier) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool in = std::fabs(y[i] - eval_quadratic(q, x[i], z[i])) <= threshold;
    if (inlier != nullptr) inlier[i] = in ? 1 : 0;
    count += in ? 1 : 0;
  }
  return count;
}

void normal_sums(const double* x, const double* z, const double* y, const std::uint8_t* select, std::size_t n,
                 NormalSums& out) {
  for (std::size_t i = 0; i < n; ++i) {
    if (select != nullptr && select[i] == 0) continue;
    const double w[6] = {1.0, x[i], z[i], x[i] * x[i], z[i] * z[i], x[i] * z[i]};
    int k = 0;
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) out.wtw[k++] += w[r] * w[c];
      out.wty[r] += w[r] * y[i];
    }
  }
}

}  // namespace pothole::kernels::scalar
