#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pothole/kernels.hpp"
#include "pothole/road_model.hpp"
#include "pothole/text_io.hpp"

namespace pothole {
namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;

// Relative size of det(A) / (Svv Suu) below which the (u, v) scatter is
// treated as collinear.
constexpr double kCollinearTolerance = 1e-12;

}  // namespace

RoadSampleSet::RoadSampleSet(std::span<const RoadPixelSample> samples) {
  reserve(samples.size());
  for (const auto& s : samples) push_back(s);
}

void RoadSampleSet::reserve(std::size_t n) {
  u_.reserve(n);
  v_.reserve(n);
  g_.reserve(n);
}

void RoadSampleSet::push_back(const RoadPixelSample& s) {
  u_.push_back(s.u);
  v_.push_back(s.v);
  g_.push_back(s.g);
}

RoadSampleSet collect_road_samples(const DisparityImage& disp, int stride, const BinaryMask* select) {
  if (stride < 1) throw Error(Errc::invalid_argument, "sample stride must be >= 1");
  if (select != nullptr && !select->same_shape(disp.width(), disp.height())) {
    throw Error(Errc::dimension_mismatch, "sample selection mask differs in shape from the disparity image");
  }
  RoadSampleSet out;
  out.reserve(disp.valid_count() / (static_cast<std::size_t>(stride) * stride) + 1);
  for (int v = 0; v < disp.height(); v += stride) {
    for (int u = 0; u < disp.width(); u += stride) {
      if (!disp.is_valid(u, v)) continue;
      if (select != nullptr && (*select)(u, v) == 0) continue;
      out.push_back({static_cast<double>(u), static_cast<double>(v), disp.at(u, v)});
    }
  }
  return out;
}

std::uint64_t VDisparityMap::total() const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

VDisparityMap build_v_disparity(const DisparityImage& disp, double bin_width, std::optional<int> bins) {
  if (!(bin_width > 0.0)) throw Error(Errc::invalid_argument, "v-disparity bin width must be positive");
  if (bins && *bins < 1) throw Error(Errc::invalid_argument, "v-disparity needs at least one bin");
  double max_g = -1.0;
  for (std::size_t i = 0; i < disp.size(); ++i) {
    if (disp.validity()[i] != 0) max_g = std::max(max_g, disp.values()[i]);
  }
  if (max_g < 0.0) throw Error(Errc::empty_selection, "disparity image has no valid pixels");

  VDisparityMap map;
  map.rows = disp.height();
  map.bin_width = bin_width;
  map.bins = bins.value_or(static_cast<int>(std::floor(max_g / bin_width)) + 1);
  map.counts.assign(static_cast<std::size_t>(map.rows) * map.bins, 0);
  for (int v = 0; v < disp.height(); ++v) {
    for (int u = 0; u < disp.width(); ++u) {
      if (!disp.is_valid(u, v)) continue;
      const double b = std::floor(disp.at(u, v) / bin_width);
      const int bin = b >= map.bins - 1 ? map.bins - 1 : static_cast<int>(b);
      ++map.counts[static_cast<std::size_t>(v) * map.bins + bin];
    }
  }
  return map;
}

double predict_road_disparity(const RoadDisparityModel& model, PixelCoord p) {
  return model.varkappa *
         (-std::sin(model.phi) * p.u + std::cos(model.phi) * p.v + model.kappa);
}

RollEnergy::RollEnergy(const RoadSampleSet& samples) : n_(samples.size()) {
  if (n_ < 3) throw Error(Errc::degenerate_geometry, "roll energy needs at least 3 samples");
  const auto& k = kernels::active();
  double sums[3];
  k.sum3(samples.u().data(), samples.v().data(), samples.g().data(), n_, sums);
  const double inv_n = 1.0 / static_cast<double>(n_);
  mean_u_ = sums[0] * inv_n;
  mean_v_ = sums[1] * inv_n;
  mean_g_ = sums[2] * inv_n;
  const auto m = k.centered_moments(samples.u().data(), samples.v().data(), samples.g().data(), n_, mean_u_,
                                    mean_v_, mean_g_);
  suu_ = m.uu;
  svv_ = m.vv;
  suv_ = m.uv;
  sug_ = m.ug;
  svg_ = m.vg;
  sgg_ = m.gg;
  gtg_ = sgg_ + static_cast<double>(n_) * mean_g_ * mean_g_;

  const double scale = svv_ * suu_;
  det_ = scale - suv_ * suv_;
  planar_ = scale > 0.0 && det_ > kCollinearTolerance * scale;
  if (planar_) {
    beta_v_ = (suu_ * svg_ - suv_ * sug_) / det_;
    beta_u_ = (svv_ * sug_ - suv_ * svg_) / det_;
    planar_rss_ = std::max(0.0, sgg_ - (svg_ * beta_v_ + sug_ * beta_u_));
  }
}

double RollEnergy::denominator(double c, double s) const {
  const double d = c * c * svv_ - 2.0 * c * s * suv_ + s * s * suu_;
  if (!(d > 1e-14 * (svv_ + suu_)) || !(d > 0.0)) {
    throw Error(Errc::degenerate_geometry, "all samples share one rotated row coordinate");
  }
  return d;
}

double RollEnergy::excess(double phi) const {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double d = denominator(c, s);
  if (planar_) {
    // Cauchy-Schwarz gap for 2x2 SPD A: (b'A^-1 b) - (w'b)^2 / (w'Aw)
    // = det(A) (w x beta)^2 / (w'Aw) with w = (cos, -sin) in (v, u) order.
    const double cross = c * beta_u_ + s * beta_v_;
    return det_ * cross * cross / d;
  }
  const double num = c * svg_ - s * sug_;
  return std::max(0.0, sgg_ - num * num / d);
}

double RollEnergy::operator()(double phi) const {
  if (planar_) return planar_rss_ + excess(phi);
  return excess(phi);
}

RollEnergy::LineFit RollEnergy::solve(double phi) const {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double slope = (c * svg_ - s * sug_) / denominator(c, s);
  const double mean_t = c * mean_v_ - s * mean_u_;
  return {mean_g_ - slope * mean_t, slope};
}

double roll_energy(double phi, const RoadSampleSet& samples) { return RollEnergy(samples)(phi); }

double fit_roll_angle(const RoadSampleSet& samples, const RollSearchOptions& options) {
  if (options.grid_points < 3) throw Error(Errc::invalid_argument, "roll search needs at least 3 grid points");
  if (!(options.tolerance > 0.0)) throw Error(Errc::invalid_argument, "roll search tolerance must be positive");
  const RollEnergy energy(samples);
  if (!energy.planar_scatter()) {
    throw Error(Errc::degenerate_geometry, "road samples must span two distinct (u, v) directions");
  }

  const double step = 2.0 * kQuarterPi / (options.grid_points + 1);
  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  int best_index = 0;
  for (int i = 0; i < options.grid_points; ++i) {
    const double e = energy.excess(-kQuarterPi + (i + 1) * step);
    if (e < best) {
      best = e;
      best_index = i;
    }
    worst = std::max(worst, e);
  }
  if (worst - best <= 1e-12 * energy.sum_g_squared()) {
    throw Error(Errc::flat_energy, "roll energy is flat over the search interval");
  }

  const double centre = -kQuarterPi + (best_index + 1) * step;
  double a = std::max(-kQuarterPi, centre - step);
  double b = std::min(kQuarterPi, centre + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = energy.excess(x1);
  double f2 = energy.excess(x2);
  while (b - a > options.tolerance) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = energy.excess(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = energy.excess(x2);
    }
  }
  return 0.5 * (a + b);
}

RoadDisparityModel fit_model(const RoadSampleSet& samples, const RollSearchOptions& options) {
  const double phi = fit_roll_angle(samples, options);
  const auto line = RollEnergy(samples).solve(phi);
  if (!(std::fabs(line.slope) >= 1e-12)) {
    throw Error(Errc::varkappa_zero, "fitted road model has zero disparity slope");
  }
  return RoadDisparityModel{phi, line.intercept / line.slope, line.slope, 0.0};
}

TransformedDisparity transform_disparity(const DisparityImage& disp, const RoadDisparityModel& model) {
  if (disp.size() == 0) throw Error(Errc::invalid_argument, "empty disparity image");
  if (!std::isfinite(model.phi) || !std::isfinite(model.kappa) || !std::isfinite(model.varkappa) ||
      model.varkappa == 0.0) {
    throw Error(Errc::invalid_argument, "road model is not fitted");
  }
  const int w = disp.width();
  const int h = disp.height();
  const double c = std::cos(model.phi);
  const double s = std::sin(model.phi);
  const double vk = model.varkappa;
  const double vkk = model.varkappa * model.kappa;
  const auto& k = kernels::active();

  TransformedDisparity out{GrayImage(w, h, 0.0), disp.validity(), model};
  double min_residual = std::numeric_limits<double>::infinity();
  for (int v = 0; v < h; ++v) {
    auto row = out.values.row(v);
    k.road_residual_row(disp.values().row(v).data(), static_cast<std::size_t>(w), static_cast<double>(v), c, s, vk,
                        vkk, row.data());
    const auto valid = disp.validity().row(v);
    for (int u = 0; u < w; ++u) {
      if (valid[u] != 0) min_residual = std::min(min_residual, row[u]);
    }
  }
  if (!std::isfinite(min_residual)) throw Error(Errc::empty_selection, "disparity image has no valid pixels");

  const double lambda = -min_residual;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = out.valid[i] != 0 ? out.values[i] + lambda : 0.0;
  }
  out.model.lambda = lambda;
  return out;
}

std::string format_model(const RoadDisparityModel& model) {
  std::ostringstream os;
  os << "phi_rad = " << format_double(model.phi) << '\n';
  os << "kappa = " << format_double(model.kappa) << '\n';
  os << "varkappa = " << format_double(model.varkappa) << '\n';
  os << "lambda = " << format_double(model.lambda) << '\n';
  return os.str();
}

RoadDisparityModel parse_model(std::string_view text) {
  const auto kv = parse_key_values(text);
  auto get = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(Errc::invalid_argument, std::string("model file lacks key ") + key);
    return parse_double(key, it->second);
  };
  return RoadDisparityModel{get("phi_rad"), get("kappa"), get("varkappa"), get("lambda")};
}

void write_model(const std::filesystem::path& path, const RoadDisparityModel& model) {
  write_file_atomic(path, format_model(model));
}

RoadDisparityModel read_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace pothole
