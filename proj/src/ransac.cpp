#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "pothole/kernels.hpp"
#include "pothole/surface.hpp"
#include "surface_internal.hpp"

namespace pothole {
namespace {

// Hypotheses are scored in blocks; within a block they may run on any
// thread, and the block is then reduced strictly in index order.
constexpr std::size_t kBlock = 32;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

struct Hypothesis {
  std::size_t inliers = 0;
  QuadraticSurface surface;
};

Hypothesis score_hypothesis(const SurfacePoints& pts, const RansacConfig& cfg, SurfaceFrame frame,
                            std::size_t iteration) {
  std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(iteration)));
  const std::size_t n = pts.size();
  std::vector<std::size_t> idx;
  idx.reserve(cfg.min_sample);
  while (idx.size() < cfg.min_sample) {
    const std::size_t i = uniform_index(rng, n);
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
  }
  std::vector<double> x(idx.size()), z(idx.size()), y(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    x[k] = pts.x[idx[k]];
    z[k] = pts.z[idx[k]];
    y[k] = pts.y[idx[k]];
  }
  detail::ConditionedBuffers buf;
  const auto s = detail::try_fit(x.data(), z.data(), y.data(), nullptr, idx.size(), frame, buf);
  if (!s) return {};
  const std::size_t count = kernels::active().count_inliers(pts.x.data(), pts.z.data(), pts.y.data(), n,
                                                            detail::as_kernel(*s), cfg.inlier_threshold, nullptr);
  return {count, *s};
}

std::size_t required_iterations(const RansacConfig& cfg, std::size_t inliers, std::size_t n) {
  const double w = static_cast<double>(inliers) / static_cast<double>(n);
  const double all_good = std::pow(w, static_cast<double>(cfg.min_sample));
  if (all_good >= 1.0) return 1;
  if (all_good <= 0.0) return cfg.max_iterations;
  const double bound = std::ceil(std::log(1.0 - cfg.confidence) / std::log1p(-all_good));
  if (!std::isfinite(bound) || bound >= static_cast<double>(cfg.max_iterations)) return cfg.max_iterations;
  return std::max<std::size_t>(1, static_cast<std::size_t>(bound));
}

}  // namespace

void RansacConfig::validate() const {
  if (max_iterations < 1) throw Error(Errc::invalid_argument, "RANSAC needs at least one iteration");
  if (!(inlier_threshold > 0.0)) throw Error(Errc::invalid_argument, "RANSAC inlier threshold must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error(Errc::invalid_argument, "RANSAC confidence must be in (0, 1)");
  if (min_sample < 6) throw Error(Errc::invalid_argument, "RANSAC minimal sample must be >= 6");
  if (threads < 1) throw Error(Errc::invalid_argument, "RANSAC needs at least one thread");
}

FitReport ransac_fit(const SurfacePoints& points, const RansacConfig& cfg, SurfaceFrame frame) {
  cfg.validate();
  const std::size_t n = points.size();
  if (points.x.size() != n || points.z.size() != n) {
    throw Error(Errc::dimension_mismatch, "surface point coordinate arrays differ in length");
  }
  if (n < cfg.min_sample) throw Error(Errc::insufficient_points, "fewer points than the minimal sample");

  Hypothesis best;
  std::size_t bound = cfg.max_iterations;
  std::size_t used = 0;
  std::vector<Hypothesis> block;
  for (std::size_t start = 0; start < bound; start += kBlock) {
    const std::size_t len = std::min(kBlock, cfg.max_iterations - start);
    block.assign(len, Hypothesis{});
    const unsigned workers = std::min<unsigned>(cfg.threads, static_cast<unsigned>(len));
    if (workers <= 1) {
      for (std::size_t i = 0; i < len; ++i) block[i] = score_hypothesis(points, cfg, frame, start + i);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t i = t; i < len; i += workers) block[i] = score_hypothesis(points, cfg, frame, start + i);
        });
      }
    }
    for (std::size_t i = 0; i < len && start + i < bound; ++i) {
      used = start + i + 1;
      if (block[i].inliers > best.inliers) {
        best = block[i];
        bound = std::min(bound, required_iterations(cfg, best.inliers, n));
      }
    }
  }
  if (best.inliers < 2 * cfg.min_sample) {
    throw Error(Errc::no_consensus, "best consensus set is smaller than twice the minimal sample");
  }

  const auto& k = kernels::active();
  std::vector<std::uint8_t> mask(n, 0);
  k.count_inliers(points.x.data(), points.z.data(), points.y.data(), n, detail::as_kernel(best.surface),
                  cfg.inlier_threshold, mask.data());
  detail::ConditionedBuffers buf;
  auto refit = detail::try_fit(points.x.data(), points.z.data(), points.y.data(), mask.data(), n, frame, buf);
  if (!refit) throw Error(Errc::degenerate_configuration, "consensus set is degenerate");

  FitReport report;
  report.surface = *refit;
  report.point_count = n;
  report.iterations_used = used;
  report.inliers.assign(n, 0);
  report.inlier_count = k.count_inliers(points.x.data(), points.z.data(), points.y.data(), n,
                                        detail::as_kernel(report.surface), cfg.inlier_threshold,
                                        report.inliers.data());
  std::vector<double> r(n);
  k.quadratic_residuals(points.x.data(), points.z.data(), points.y.data(), n, detail::as_kernel(report.surface),
                        r.data());
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (report.inliers[i] != 0) ss += r[i] * r[i];
  }
  report.rms_residual = report.inlier_count > 0 ? std::sqrt(ss / static_cast<double>(report.inlier_count)) : 0.0;
  return report;
}

}  // namespace pothole
