#include <cmath>
#include <numbers>
#include <sstream>

#include "pothole/testkit/synth.hpp"
#include "pothole/text_io.hpp"

namespace pothole::testkit {

double GaussianStream::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

double GaussianStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double pothole_depth(const Pothole& p, double u, double v) {
  const double du = u - p.center_u;
  const double dv = v - p.center_v;
  const double r2 = du * du + dv * dv;
  const double R2 = p.radius * p.radius;
  if (p.profile == PotholeProfile::flat) return r2 <= R2 ? p.depth : 0.0;
  return r2 < R2 ? p.depth * (1.0 - r2 / R2) : 0.0;
}

SceneTruth generate_scene(const SceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw Error(Errc::invalid_argument, "scene dimensions must be positive");
  if (!(spec.varkappa_star > 0.0)) throw Error(Errc::invalid_argument, "scene varkappa must be positive");
  if (!(spec.noise_sigma >= 0.0)) throw Error(Errc::invalid_argument, "noise sigma must be >= 0");
  if (spec.horizon_row < 0 || spec.horizon_row >= spec.height) {
    throw Error(Errc::invalid_argument, "horizon row must lie inside the image");
  }
  for (const auto& p : spec.potholes) {
    if (!(p.depth > 0.0) || !(p.radius > 0.0)) {
      throw Error(Errc::invalid_argument, "pothole depth and radius must be positive");
    }
    if (p.center_u - p.radius < 0.0 || p.center_v - p.radius < spec.horizon_row || p.center_u + p.radius > spec.width - 1 ||
        p.center_v + p.radius > spec.height - 1) {
      throw Error(Errc::invalid_argument, "pothole footprint leaves the image");
    }
  }

  const double c = std::cos(spec.phi_star);
  const double s = std::sin(spec.phi_star);
  const double vk = spec.varkappa_star;
  const double vkk = spec.varkappa_star * spec.kappa_star;
  GaussianStream noise(spec.seed);

  SceneTruth truth{DisparityImage(spec.width, spec.height), BinaryMask(spec.width, spec.height, 0),
                   RoadDisparityModel{spec.phi_star, spec.kappa_star, spec.varkappa_star, 0.0}};
  for (int v = spec.horizon_row; v < spec.height; ++v) {
    for (int u = 0; u < spec.width; ++u) {
      double depth = 0.0;
      double nominal = 0.0;
      for (const auto& p : spec.potholes) {
        const double d = pothole_depth(p, u, v);
        if (d > depth) {
          depth = d;
          nominal = p.depth;
        }
      }
      const double road = vk * (c * v - s * u) + vkk;
      const double n = spec.noise_sigma > 0.0 ? spec.noise_sigma * noise.normal() : 0.0;
      const double g = road + n - depth;
      if (g < 0.0) throw Error(Errc::negative_disparity, "scene parameters produce a negative disparity");
      truth.disparity.set(u, v, g);
      if (depth > 0.0 && depth >= 0.5 * nominal) truth.gt_mask(u, v) = 1;
    }
  }
  return truth;
}

std::vector<SceneSpec> detection_suite(int count, std::uint64_t seed) {
  std::vector<SceneSpec> out;
  GaussianStream rng(seed);
  const double radii[2] = {std::sqrt(400.0 / std::numbers::pi), std::sqrt(900.0 / std::numbers::pi)};
  for (int i = 0; i < count; ++i) {
    SceneSpec spec;
    spec.width = 640;
    spec.height = 360;
    spec.noise_sigma = 0.3;
    spec.varkappa_star = 0.25 + 0.15 * rng.uniform();
    spec.kappa_star = 70.0 + 20.0 * rng.uniform();
    if (i % 2 == 1) {
      const double magnitude = 0.04 + 0.06 * rng.uniform();
      spec.phi_star = rng.uniform() < 0.5 ? -magnitude : magnitude;
    }
    spec.seed = seed * 7919 + static_cast<std::uint64_t>(i) + 1;
    for (int k = 0; k < 2; ++k) {
      Pothole p;
      p.radius = radii[k];
      p.depth = 6.0;
      for (;;) {
        p.center_u = p.radius + 10.0 + (spec.width - 2.0 * p.radius - 20.0) * rng.uniform();
        p.center_v = spec.height / 2.0 + (spec.height / 2.0 - p.radius - 10.0) * rng.uniform();
        bool clear = true;
        for (const auto& q : spec.potholes) {
          clear = clear && std::hypot(p.center_u - q.center_u, p.center_v - q.center_v) > p.radius + q.radius + 10.0;
        }
        if (clear) break;
      }
      spec.potholes.push_back(p);
    }
    out.push_back(spec);
  }
  return out;
}

void write_scene(const std::filesystem::path& dir, const std::string& stem, const SceneSpec& spec,
                 const SceneTruth& truth) {
  std::filesystem::create_directories(dir);
  save_disparity(truth.disparity, dir / (stem + "_disp.png"), 256.0);
  save_mask(truth.gt_mask, dir / (stem + "_gt.png"));
  std::ostringstream os;
  os << "phi_rad = " << format_double(spec.phi_star) << '\n';
  os << "kappa = " << format_double(spec.kappa_star) << '\n';
  os << "varkappa = " << format_double(spec.varkappa_star) << '\n';
  os << "lambda = " << format_double(0.0) << '\n';
  os << "noise_sigma = " << format_double(spec.noise_sigma) << '\n';
  os << "seed = " << spec.seed << '\n';
  os << "horizon_row = " << spec.horizon_row << '\n';
  os << "disparity_scale = 256\n";
  os << "potholes = " << spec.potholes.size() << '\n';
  for (std::size_t i = 0; i < spec.potholes.size(); ++i) {
    const auto& p = spec.potholes[i];
    os << "pothole" << i << " = " << format_double(p.center_u) << ' ' << format_double(p.center_v) << ' '
       << format_double(p.radius) << ' ' << format_double(p.depth) << ' '
       << (p.profile == PotholeProfile::flat ? "flat" : "parabolic") << '\n';
  }
  write_file_atomic(dir / (stem + "_truth.txt"), os.str());
}

}  // namespace pothole::testkit
