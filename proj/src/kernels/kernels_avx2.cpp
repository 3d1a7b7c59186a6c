// AVX2 variants. Functions carry a target attribute instead of the whole
// file being built with -mavx2, so no inline helper shared with the scalar
// path is ever emitted with vector instructions.

#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

#define POTHOLE_AVX2 __attribute__((target("avx2")))

namespace pothole::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

POTHOLE_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

POTHOLE_AVX2 inline __m256d eval(const Quadratic& q, __m256d x, __m256d z) {
  __m256d f = _mm256_add_pd(_mm256_set1_pd(q.c[0]), _mm256_mul_pd(_mm256_set1_pd(q.c[1]), x));
  f = _mm256_add_pd(f, _mm256_mul_pd(_mm256_set1_pd(q.c[2]), z));
  f = _mm256_add_pd(f, _mm256_mul_pd(_mm256_set1_pd(q.c[3]), _mm256_mul_pd(x, x)));
  f = _mm256_add_pd(f, _mm256_mul_pd(_mm256_set1_pd(q.c[4]), _mm256_mul_pd(z, z)));
  f = _mm256_add_pd(f, _mm256_mul_pd(_mm256_set1_pd(q.c[5]), _mm256_mul_pd(x, z)));
  return f;
}

// Same operation order as the scalar reference.
double eval_tail(const Quadratic& q, double x, double z) {
  return ((((q.c[0] + q.c[1] * x) + q.c[2] * z) + q.c[3] * (x * x)) + q.c[4] * (z * z)) + q.c[5] * (x * z);
}

}  // namespace

POTHOLE_AVX2 void sum3(const double* u, const double* v, const double* g, std::size_t n, double out[3]) {
  __m256d su = _mm256_setzero_pd(), sv = _mm256_setzero_pd(), sg = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    su = _mm256_add_pd(su, _mm256_loadu_pd(u + i));
    sv = _mm256_add_pd(sv, _mm256_loadu_pd(v + i));
    sg = _mm256_add_pd(sg, _mm256_loadu_pd(g + i));
  }
  double a = hsum(su), b = hsum(sv), c = hsum(sg);
  for (; i < n; ++i) {
    a += u[i];
    b += v[i];
    c += g[i];
  }
  out[0] = a;
  out[1] = b;
  out[2] = c;
}

POTHOLE_AVX2 CenteredMoments centered_moments(const double* u, const double* v, const double* g, std::size_t n,
                                              double mean_u, double mean_v, double mean_g) {
  const __m256d mu = _mm256_set1_pd(mean_u), mv = _mm256_set1_pd(mean_v), mg = _mm256_set1_pd(mean_g);
  __m256d uu = _mm256_setzero_pd(), vv = _mm256_setzero_pd(), uv = _mm256_setzero_pd();
  __m256d ug = _mm256_setzero_pd(), vg = _mm256_setzero_pd(), gg = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d du = _mm256_sub_pd(_mm256_loadu_pd(u + i), mu);
    const __m256d dv = _mm256_sub_pd(_mm256_loadu_pd(v + i), mv);
    const __m256d dg = _mm256_sub_pd(_mm256_loadu_pd(g + i), mg);
    uu = _mm256_add_pd(uu, _mm256_mul_pd(du, du));
    vv = _mm256_add_pd(vv, _mm256_mul_pd(dv, dv));
    uv = _mm256_add_pd(uv, _mm256_mul_pd(du, dv));
    ug = _mm256_add_pd(ug, _mm256_mul_pd(du, dg));
    vg = _mm256_add_pd(vg, _mm256_mul_pd(dv, dg));
    gg = _mm256_add_pd(gg, _mm256_mul_pd(dg, dg));
  }
  CenteredMoments m{hsum(uu), hsum(vv), hsum(uv), hsum(ug), hsum(vg), hsum(gg)};
  for (; i < n; ++i) {
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

POTHOLE_AVX2 void road_residual_row(const double* disp, std::size_t n, double row, double cos_phi, double sin_phi,
                                    double varkappa, double varkappa_kappa, double* out) {
  const double row_term = cos_phi * row;
  const __m256d vrow = _mm256_set1_pd(row_term);
  const __m256d vsin = _mm256_set1_pd(sin_phi);
  const __m256d vk = _mm256_set1_pd(varkappa);
  const __m256d vkk = _mm256_set1_pd(varkappa_kappa);
  const __m256d step = _mm256_set1_pd(static_cast<double>(kLanes));
  __m256d col = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d t = _mm256_sub_pd(vrow, _mm256_mul_pd(vsin, col));
    const __m256d r = _mm256_sub_pd(_mm256_sub_pd(_mm256_loadu_pd(disp + i), _mm256_mul_pd(vk, t)), vkk);
    _mm256_storeu_pd(out + i, r);
    col = _mm256_add_pd(col, step);
  }
  for (; i < n; ++i) {
    const double t = row_term - sin_phi * static_cast<double>(i);
    out[i] = (disp[i] - varkappa * t) - varkappa_kappa;
  }
}

POTHOLE_AVX2 void quadratic_residuals(const double* x, const double* z, const double* y, std::size_t n,
                                      const Quadratic& q, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d f = eval(q, _mm256_loadu_pd(x + i), _mm256_loadu_pd(z + i));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(y + i), f));
  }
  for (; i < n; ++i) out[i] = y[i] - eval_tail(q, x[i], z[i]);
}

POTHOLE_AVX2 std::size_t count_inliers(const double* x, const double* z, const double* y, std::size_t n,
                                       const Quadratic& q, double threshold, std::uint8_t* inlier) {
  const __m256d thr = _mm256_set1_pd(threshold);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d f = eval(q, _mm256_loadu_pd(x + i), _mm256_loadu_pd(z + i));
    const __m256d r = _mm256_and_pd(_mm256_sub_pd(_mm256_loadu_pd(y + i), f), abs_mask);
    const int bits = _mm256_movemask_pd(_mm256_cmp_pd(r, thr, _CMP_LE_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(bits)));
    if (inlier != nullptr) {
      for (std::size_t l = 0; l < kLanes; ++l) inlier[i + l] = static_cast<std::uint8_t>((bits >> l) & 1);
    }
  }
  for (; i < n; ++i) {
    const bool in = std::fabs(y[i] - eval_tail(q, x[i], z[i])) <= threshold;
    if (inlier != nullptr) inlier[i] = in ? 1 : 0;
    count += in ? 1 : 0;
  }
  return count;
}

POTHOLE_AVX2 void normal_sums(const double* x, const double* z, const double* y, const std::uint8_t* select,
                              std::size_t n, NormalSums& out) {
  __m256d acc[21];
  __m256d accy[6];
  for (auto& a : acc) a = _mm256_setzero_pd();
  for (auto& a : accy) a = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d keep = one;
    if (select != nullptr) {
      const std::uint32_t packed = static_cast<std::uint32_t>(select[i] != 0) |
                                   static_cast<std::uint32_t>(select[i + 1] != 0) << 1 |
                                   static_cast<std::uint32_t>(select[i + 2] != 0) << 2 |
                                   static_cast<std::uint32_t>(select[i + 3] != 0) << 3;
      if (packed == 0) continue;
      keep = _mm256_setr_pd(packed & 1 ? 1.0 : 0.0, packed & 2 ? 1.0 : 0.0, packed & 4 ? 1.0 : 0.0,
                            packed & 8 ? 1.0 : 0.0);
    }
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d zv = _mm256_loadu_pd(z + i);
    // Deselected lanes get an all-zero design row, which contributes exactly 0.
    const __m256d w[6] = {keep,
                          _mm256_mul_pd(xv, keep),
                          _mm256_mul_pd(zv, keep),
                          _mm256_mul_pd(_mm256_mul_pd(xv, xv), keep),
                          _mm256_mul_pd(_mm256_mul_pd(zv, zv), keep),
                          _mm256_mul_pd(_mm256_mul_pd(xv, zv), keep)};
    const __m256d yv = _mm256_mul_pd(_mm256_loadu_pd(y + i), keep);
    int k = 0;
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c, ++k) acc[k] = _mm256_add_pd(acc[k], _mm256_mul_pd(w[r], w[c]));
      accy[r] = _mm256_add_pd(accy[r], _mm256_mul_pd(w[r], yv));
    }
  }
  for (int k = 0; k < 21; ++k) out.wtw[k] += hsum(acc[k]);
  for (int r = 0; r < 6; ++r) out.wty[r] += hsum(accy[r]);
  for (; i < n; ++i) {
    if (select != nullptr && select[i] == 0) continue;
    const double w[6] = {1.0, x[i], z[i], x[i] * x[i], z[i] * z[i], x[i] * z[i]};
    int k = 0;
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) out.wtw[k++] += w[r] * w[c];
      out.wty[r] += w[r] * y[i];
    }
  }
}

}  // namespace pothole::kernels::avx2
