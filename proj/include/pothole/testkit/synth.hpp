#pragma once

// Deterministic synthetic road scenes.
//
// Noise is reproducible across platforms: a std::mt19937_64 seeded with
// SceneSpec::seed yields uniforms u = (x >> 11) * 2^-53, and each Gaussian
// sample is sqrt(-2 ln(1 - u1)) * cos(2 pi u2) from two consecutive
// uniforms. Pixels draw noise in raster order.

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "pothole/imaging.hpp"
#include "pothole/road_model.hpp"

namespace pothole::testkit {

class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}
  double uniform();
  double normal();

 private:
  std::mt19937_64 rng_;
};

enum class PotholeProfile { flat, parabolic };

struct Pothole {
  double center_u = 0.0;
  double center_v = 0.0;
  double radius = 10.0;  ///< px
  double depth = 6.0;    ///< disparity drop at the centre, px
  PotholeProfile profile = PotholeProfile::flat;
};

struct SceneSpec {
  int width = 640;
  int height = 480;
  double phi_star = 0.0;
  double kappa_star = 40.0;
  double varkappa_star = 0.4;
  double noise_sigma = 0.0;
  int horizon_row = 0;  ///< rows above stay invalid (sky) and draw no noise
  std::vector<Pothole> potholes;
  std::uint64_t seed = 0;
};

struct SceneTruth {
  DisparityImage disparity;
  BinaryMask gt_mask;  ///< pixels lowered by at least half their pothole's depth
  RoadDisparityModel model;
};

/// G(u, v) = varkappa (cos(phi) v - sin(phi) u) + varkappa kappa + noise - depth(u, v)
/// for rows v >= horizon_row.
/// Overlapping potholes take the deeper perturbation.
SceneTruth generate_scene(const SceneSpec& spec);

double pothole_depth(const Pothole& p, double u, double v);

/// Scenes with two flat potholes (areas 400 and 900 px, depth 6 px) and
/// sigma = 0.3 px noise. Even indices have zero roll, odd indices a roll
/// of 0.04..0.1 rad with random sign.
std::vector<SceneSpec> detection_suite(int count, std::uint64_t seed);

/// Writes <stem>_disp.png (16-bit, scale 256), <stem>_gt.png and
/// <stem>_truth.txt into `dir`.
void write_scene(const std::filesystem::path& dir, const std::string& stem, const SceneSpec& spec,
                 const SceneTruth& truth);

}  // namespace pothole::testkit
