#include "pothole/pipeline.hpp"

namespace pothole {
namespace {

ThresholdResult pick_threshold(const GrayImage& img, const BinaryMask& validity, const PipelineConfig& cfg) {
  const Histogram hist = histogram(img, &validity, cfg.histogram_bins);
  return cfg.threshold_method == ThresholdMethod::otsu ? otsu_threshold(hist) : triangle_threshold(hist);
}

GrayImage maybe_median(const GrayImage& img, const PipelineConfig& cfg) {
  return cfg.median_radius > 0 ? median_filter(img, cfg.median_radius) : img;
}

DamageCriteria criteria_of(const PipelineConfig& cfg) {
  return DamageCriteria{cfg.damage_threshold(), cfg.polarity, cfg.open_radius, cfg.min_region_area,
                        cfg.connectivity};
}

}  // namespace

DetectionResult detect_potholes(const DisparityImage& disp, const PipelineConfig& cfg) {
  cfg.validate();
  if (disp.size() == 0) throw Error(Errc::invalid_argument, "empty disparity image");
  DetectionResult out;

  out.road_model = fit_model(collect_road_samples(disp, cfg.fit_stride));
  out.transformed = transform_disparity(disp, out.road_model);
  out.road_model = out.transformed.model;

  const GrayImage smoothed = maybe_median(out.transformed.values, cfg);
  out.threshold = pick_threshold(smoothed, out.transformed.valid, cfg);
  out.road_mask = BinaryMask(disp.width(), disp.height(), 0);
  std::size_t road_pixels = 0;
  for (std::size_t i = 0; i < out.road_mask.size(); ++i) {
    if (out.transformed.valid[i] != 0 && smoothed[i] >= out.threshold.threshold) {
      out.road_mask[i] = 1;
      ++road_pixels;
    }
  }
  if (road_pixels < 6) throw Error(Errc::empty_road_mask, "thresholding left fewer than 6 road pixels");

  RansacConfig rc = cfg.ransac;
  rc.inlier_threshold = cfg.inlier_threshold();
  const DamageCriteria criteria = criteria_of(cfg);

  if (cfg.camera) {
    const PointCloud3D cloud = disparity_to_pointcloud(disp, *cfg.camera, cfg.min_disparity);
    PointCloud3D road;
    road.width = cloud.width;
    road.height = cloud.height;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const auto p = cloud.source_pixel[i];
      if (out.road_mask(p.u, p.v) == 0) continue;
      road.points.push_back(cloud.points[i]);
      road.source_pixel.push_back(p);
    }
    if (road.points.size() < 6) throw Error(Errc::empty_road_mask, "too few road points above min_disparity");
    out.fit = ransac_fit(surface_points(road), rc, SurfaceFrame::metric_xz);
    out.mask = extract_damage(cloud, out.fit.surface, criteria);
  } else {
    out.fit = ransac_fit(surface_points(disp, &out.road_mask), rc, SurfaceFrame::image_uv);
    out.mask = extract_damage(disp, out.fit.surface, criteria);
  }
  return out;
}

DamageMask detect_from_transformed(const GrayImage& transformed, const BinaryMask& validity,
                                   const PipelineConfig& cfg, ThresholdResult* threshold) {
  cfg.validate();
  const GrayImage smoothed = maybe_median(transformed, cfg);
  const ThresholdResult t = pick_threshold(smoothed, validity, cfg);
  if (threshold != nullptr) *threshold = t;
  DamageMask below = segment_below(smoothed, t.threshold, validity, cfg.connectivity);
  BinaryMask raw = below.damaged;
  if (cfg.open_radius > 0) raw = morphological_open(raw, cfg.open_radius);
  return label_damage(raw, cfg.connectivity, cfg.min_region_area);
}

}  // namespace pothole
