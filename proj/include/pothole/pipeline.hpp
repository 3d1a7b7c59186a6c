#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pothole/imaging.hpp"
#include "pothole/road_model.hpp"
#include "pothole/segmentation.hpp"
#include "pothole/surface.hpp"

namespace pothole {

enum class ThresholdMethod { otsu, triangle };

std::string_view to_string(ThresholdMethod m) noexcept;

struct PipelineConfig {
  std::optional<double> disparity_scale;  ///< unset: 256 for 16-bit rasters, 1 for 8-bit
  std::uint16_t invalid_value = 0;
  int fit_stride = 1;
  int histogram_bins = 256;
  ThresholdMethod threshold_method = ThresholdMethod::otsu;
  int median_radius = 0;  ///< median prefilter on the transformed raster; 0 disables
  RansacConfig ransac{};
  std::optional<double> ransac_threshold;  ///< unset: same as the damage threshold
  std::optional<double> tau;               ///< unset: 0.04 m metric, 1.0 px image frame
  Polarity polarity = Polarity::below;
  std::size_t min_region_area = 50;
  int open_radius = 1;
  Connectivity connectivity = Connectivity::four;
  std::optional<CameraModel> camera;  ///< when set, the surface is fitted in metric space
  double min_disparity = 1.0;

  SurfaceFrame frame() const noexcept { return camera ? SurfaceFrame::metric_xz : SurfaceFrame::image_uv; }
  double damage_threshold() const noexcept;
  double inlier_threshold() const noexcept;
  void validate() const;

  /// Applies one `key = value` setting; unknown keys are rejected.
  void set(const std::string& key, const std::string& value);
};

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string format_config(const PipelineConfig& cfg);

struct DetectionResult {
  DamageMask mask;
  RoadDisparityModel road_model;
  FitReport fit;
  ThresholdResult threshold;
  TransformedDisparity transformed;
  BinaryMask road_mask;  ///< pixels used for the surface fit
};

/// Transform the disparity with the fitted road model, threshold it to
/// find undamaged road, fit a quadratic surface to the original disparities
/// of that road with RANSAC, and flag pixels lying below the surface by at
/// least tau.
DetectionResult detect_potholes(const DisparityImage& disp, const PipelineConfig& cfg);

/// Threshold-only route for data that ships transformed disparities
/// without the raw disparity: optional median filter, histogram threshold,
/// below-threshold segmentation, opening and area filter.
DamageMask detect_from_transformed(const GrayImage& transformed, const BinaryMask& validity,
                                   const PipelineConfig& cfg, ThresholdResult* threshold = nullptr);

// ---------------------------------------------------------------------------
// Evaluation

struct PixelCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Empty prediction and empty truth score 1 everywhere. An empty
/// prediction against nonempty truth has precision 1, recall 0. A nonempty
/// prediction against empty truth has precision 0, recall 1.
struct EvalReport {
  std::string id;
  PixelCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double iou = 0.0;
};

EvalReport evaluate(const BinaryMask& pred, const BinaryMask& gt);
EvalReport evaluate(const DamageMask& pred, const BinaryMask& gt);

struct EvalSummary {
  std::vector<EvalReport> images;
  EvalReport mean;  ///< per-image mean of the ratios; counts are summed
};

EvalSummary summarize(std::vector<EvalReport> images);
/// Header, one row per image, a final `mean` row; 6 decimals.
std::string format_eval_csv(const EvalSummary& summary);

// ---------------------------------------------------------------------------
// Datasets

enum class DatasetLayout { stereo_potholes, pothole600, flat_pairs };

DatasetLayout parse_layout(std::string_view text);

struct DatasetSample {
  std::string id;
  std::optional<std::filesystem::path> disparity;
  std::optional<std::filesystem::path> transformed;
  std::optional<std::filesystem::path> rgb;
  std::filesystem::path label;
};

struct DatasetListing {
  std::vector<DatasetSample> samples;  ///< sorted by id
  std::vector<std::string> warnings;   ///< orphaned files
};

/// stereo-potholes: <root>[/<group>]/{disp,label}/<stem>.png, optional
///   tdisp/ and rgb/.
/// pothole600: <root>[/<split>]/{tdisp,label}/<stem>.png, optional rgb/.
/// flat-pairs: <root>/<id>_disp.png with <id>_gt.png (or _label), optional
///   <id>_tdisp and <id>_rgb.
DatasetListing load_dataset(const std::filesystem::path& root, DatasetLayout layout);

/// Identifier used to pair prediction and truth files: the stem with a
/// trailing _gt, _label, _mask, _pred or _disp removed.
std::string sample_key(const std::filesystem::path& file);

}  // namespace pothole
