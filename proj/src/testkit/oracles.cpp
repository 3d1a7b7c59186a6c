#include <Eigen/Dense>

#include <cmath>
#include <utility>

#include "pothole/testkit/oracles.hpp"

namespace pothole::testkit {

PlanarFit oracle_planar_fit(const RoadSampleSet& samples) {
  const std::size_t n = samples.size();
  if (n < 3) throw Error(Errc::rank_deficient, "planar fit needs at least 3 samples");
  long double mu = 0, mv = 0, mg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mu += samples[i].u;
    mv += samples[i].v;
    mg += samples[i].g;
  }
  mu /= n;
  mv /= n;
  mg /= n;

  // Unknowns (a', b, c) for g - mg ~ a' + b (v - mv) + c (u - mu).
  long double m[3][4] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const long double row[3] = {1.0L, samples[i].v - mv, samples[i].u - mu};
    const long double rhs = samples[i].g - mg;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += row[r] * row[c];
      m[r][3] += row[r] * rhs;
    }
  }
  long double scale = 0;
  for (int r = 0; r < 3; ++r) scale = std::max(scale, std::fabs(m[r][r]));
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    }
    if (std::fabs(m[pivot][col]) <= 1e-13L * scale) throw Error(Errc::rank_deficient, "collinear samples");
    if (pivot != col) std::swap(m[pivot], m[col]);
    for (int r = col + 1; r < 3; ++r) {
      const long double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  long double x[3];
  for (int r = 2; r >= 0; --r) {
    long double s = m[r][3];
    for (int c = r + 1; c < 3; ++c) s -= m[r][c] * x[c];
    x[r] = s / m[r][r];
  }

  PlanarFit fit;
  fit.b = static_cast<double>(x[1]);
  fit.c = static_cast<double>(x[2]);
  fit.a = static_cast<double>(mg + x[0] - x[1] * mv - x[2] * mu);
  long double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double r = (samples[i].g - mg) - (x[0] + x[1] * (samples[i].v - mv) + x[2] * (samples[i].u - mu));
    rss += r * r;
  }
  fit.rss = static_cast<double>(rss);
  return fit;
}

std::array<double, 6> oracle_quadratic_fit(const SurfacePoints& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 6) throw Error(Errc::rank_deficient, "quadratic fit needs at least 6 points");
  Eigen::MatrixXd w(n, 6);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points.x[i];
    const double z = points.z[i];
    w.row(i) << 1.0, x, z, x * x, z * z, x * z;
    y(i) = points.y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w);
  if (qr.rank() < 6) throw Error(Errc::rank_deficient, "design matrix is rank deficient");
  const Eigen::VectorXd a = qr.solve(y);
  return {a(0), a(1), a(2), a(3), a(4), a(5)};
}

PowerSumSystem normal_equations_from_sums(const SurfacePoints& points) {
  // S(i, j, k) = sum X^i Z^j Y^k
  auto S = [&](int i, int j, int k) {
    double s = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      s += std::pow(points.x[p], i) * std::pow(points.z[p], j) * std::pow(points.y[p], k);
    }
    return s;
  };
  const double K = static_cast<double>(points.size());
  const double sx = S(1, 0, 0), sz = S(0, 1, 0), sx2 = S(2, 0, 0), sz2 = S(0, 2, 0), sxz = S(1, 1, 0);
  const double sx3 = S(3, 0, 0), sz3 = S(0, 3, 0), sxz2 = S(1, 2, 0), szx2 = S(2, 1, 0);
  const double sx4 = S(4, 0, 0), sz4 = S(0, 4, 0), sx2z2 = S(2, 2, 0), szx3 = S(3, 1, 0), sxz3 = S(1, 3, 0);

  PowerSumSystem sys;
  sys.m = {{
      {K, sx, sz, sx2, sz2, sxz},
      {sx, sx2, sxz, sx3, sxz2, szx2},
      {sz, sxz, sz2, szx2, sz3, sxz2},
      {sx2, sx3, szx2, sx4, sx2z2, szx3},
      {sz2, sxz2, sz3, sx2z2, sz4, sxz3},
      {sxz, szx2, sxz2, szx3, sxz3, sx2z2},
  }};
  sys.q = {S(0, 0, 1), S(1, 0, 1), S(0, 1, 1), S(2, 0, 1), S(0, 2, 1), S(1, 1, 1)};
  return sys;
}

double oracle_roll_energy(double phi, const RoadSampleSet& samples) {
  const std::size_t n = samples.size();
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  std::vector<long double> q1(n, 1.0L / std::sqrt(static_cast<long double>(n)));
  std::vector<long double> q2(n);
  for (std::size_t i = 0; i < n; ++i) q2[i] = c * samples[i].v - s * samples[i].u;
  long double proj = 0;
  for (std::size_t i = 0; i < n; ++i) proj += q1[i] * q2[i];
  for (std::size_t i = 0; i < n; ++i) q2[i] -= proj * q1[i];
  long double norm = 0;
  for (std::size_t i = 0; i < n; ++i) norm += q2[i] * q2[i];
  norm = std::sqrt(norm);
  if (norm == 0) throw Error(Errc::rank_deficient, "T has rank 1");
  for (auto& e : q2) e /= norm;

  long double gg = 0, d1 = 0, d2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double g = samples[i].g;
    gg += g * g;
    d1 += q1[i] * g;
    d2 += q2[i] * g;
  }
  return static_cast<double>(gg - d1 * d1 - d2 * d2);
}

}  // namespace pothole::testkit
