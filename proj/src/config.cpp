#include <sstream>

#include "pothole/pipeline.hpp"
#include "pothole/text_io.hpp"

namespace pothole {

std::string_view to_string(ThresholdMethod m) noexcept { return m == ThresholdMethod::otsu ? "otsu" : "triangle"; }

double PipelineConfig::damage_threshold() const noexcept {
  if (tau) return *tau;
  return camera ? 0.04 : 1.0;
}

double PipelineConfig::inlier_threshold() const noexcept { return ransac_threshold.value_or(damage_threshold()); }

void PipelineConfig::validate() const {
  if (disparity_scale && !(*disparity_scale > 0.0)) throw Error(Errc::invalid_argument, "disparity_scale must be > 0");
  if (fit_stride < 1) throw Error(Errc::invalid_argument, "fit_stride must be >= 1");
  if (histogram_bins < 2) throw Error(Errc::invalid_argument, "histogram_bins must be >= 2");
  if (median_radius < 0) throw Error(Errc::invalid_argument, "median_radius must be >= 0");
  if (open_radius < 0) throw Error(Errc::invalid_argument, "open_radius must be >= 0");
  if (!(damage_threshold() >= 0.0)) throw Error(Errc::invalid_argument, "tau must be >= 0");
  if (!(min_disparity > 0.0)) throw Error(Errc::invalid_argument, "min_disparity must be > 0");
  RansacConfig r = ransac;
  r.inlier_threshold = inlier_threshold();
  r.validate();
  if (camera) camera->validate();
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  auto integer = [&](long long lo) {
    const long long v = parse_integer(key, value);
    if (v < lo) throw Error(Errc::invalid_argument, key + " must be >= " + std::to_string(lo));
    return v;
  };
  auto cam = [&]() -> CameraModel& {
    if (!camera) camera = CameraModel{};
    return *camera;
  };
  if (key == "disparity_scale") {
    disparity_scale = parse_double(key, value);
  } else if (key == "invalid_value") {
    const long long v = integer(0);
    if (v > 65535) throw Error(Errc::invalid_argument, "invalid_value must fit 16 bits");
    invalid_value = static_cast<std::uint16_t>(v);
  } else if (key == "fit_stride") {
    fit_stride = static_cast<int>(integer(1));
  } else if (key == "histogram_bins") {
    histogram_bins = static_cast<int>(integer(2));
  } else if (key == "threshold_method") {
    if (value == "otsu") {
      threshold_method = ThresholdMethod::otsu;
    } else if (value == "triangle") {
      threshold_method = ThresholdMethod::triangle;
    } else {
      throw Error(Errc::invalid_argument, "threshold_method must be otsu or triangle");
    }
  } else if (key == "median_radius") {
    median_radius = static_cast<int>(integer(0));
  } else if (key == "ransac_max_iterations") {
    ransac.max_iterations = static_cast<std::size_t>(integer(1));
  } else if (key == "ransac_inlier_threshold") {
    ransac_threshold = parse_double(key, value);
  } else if (key == "ransac_confidence") {
    ransac.confidence = parse_double(key, value);
  } else if (key == "ransac_seed" || key == "seed") {
    ransac.seed = static_cast<std::uint64_t>(integer(0));
  } else if (key == "ransac_threads" || key == "threads") {
    ransac.threads = static_cast<unsigned>(integer(1));
  } else if (key == "tau") {
    tau = parse_double(key, value);
  } else if (key == "polarity") {
    polarity = parse_polarity(value);
  } else if (key == "min_region_area") {
    min_region_area = static_cast<std::size_t>(integer(0));
  } else if (key == "open_radius") {
    open_radius = static_cast<int>(integer(0));
  } else if (key == "connectivity") {
    if (value == "4") {
      connectivity = Connectivity::four;
    } else if (value == "8") {
      connectivity = Connectivity::eight;
    } else {
      throw Error(Errc::invalid_argument, "connectivity must be 4 or 8");
    }
  } else if (key == "focal_length") {
    cam().focal_length = parse_double(key, value);
  } else if (key == "baseline") {
    cam().baseline = parse_double(key, value);
  } else if (key == "cx") {
    cam().cx = parse_double(key, value);
  } else if (key == "cy") {
    cam().cy = parse_double(key, value);
  } else if (key == "min_disparity") {
    min_disparity = parse_double(key, value);
  } else {
    throw Error(Errc::invalid_argument, "unknown configuration key: " + key);
  }
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  for (const auto& [key, value] : parse_key_values(text)) cfg.set(key, value);
  if (cfg.camera && cfg.disparity_scale) cfg.camera->disparity_scale = *cfg.disparity_scale;
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string format_config(const PipelineConfig& cfg) {
  std::ostringstream os;
  if (cfg.disparity_scale) os << "disparity_scale = " << format_double(*cfg.disparity_scale) << '\n';
  os << "invalid_value = " << cfg.invalid_value << '\n';
  os << "fit_stride = " << cfg.fit_stride << '\n';
  os << "histogram_bins = " << cfg.histogram_bins << '\n';
  os << "threshold_method = " << to_string(cfg.threshold_method) << '\n';
  os << "median_radius = " << cfg.median_radius << '\n';
  os << "ransac_max_iterations = " << cfg.ransac.max_iterations << '\n';
  os << "ransac_inlier_threshold = " << format_double(cfg.inlier_threshold()) << '\n';
  os << "ransac_confidence = " << format_double(cfg.ransac.confidence) << '\n';
  os << "ransac_seed = " << cfg.ransac.seed << '\n';
  os << "ransac_threads = " << cfg.ransac.threads << '\n';
  os << "tau = " << format_double(cfg.damage_threshold()) << '\n';
  os << "polarity = " << to_string(cfg.polarity) << '\n';
  os << "min_region_area = " << cfg.min_region_area << '\n';
  os << "open_radius = " << cfg.open_radius << '\n';
  os << "connectivity = " << static_cast<int>(cfg.connectivity) << '\n';
  if (cfg.camera) {
    os << "focal_length = " << format_double(cfg.camera->focal_length) << '\n';
    os << "baseline = " << format_double(cfg.camera->baseline) << '\n';
    os << "cx = " << format_double(cfg.camera->cx) << '\n';
    os << "cy = " << format_double(cfg.camera->cy) << '\n';
  }
  os << "min_disparity = " << format_double(cfg.min_disparity) << '\n';
  return os.str();
}

}  // namespace pothole
