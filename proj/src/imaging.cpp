#include <algorithm>
#include <cmath>
#include <numeric>

#include "pothole/imaging.hpp"

namespace pothole {

DisparityImage::DisparityImage(int width, int height) : values_(width, height, 0.0), valid_(width, height, 0) {}

DisparityImage::DisparityImage(GrayImage values, BinaryMask valid) : values_(std::move(values)), valid_(std::move(valid)) {
  if (!values_.same_shape(valid_)) {
    throw Error(Errc::dimension_mismatch, "disparity and validity rasters differ in shape");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (valid_[i] == 0) {
      values_[i] = 0.0;
      continue;
    }
    valid_[i] = 1;
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw Error(Errc::invalid_argument, "valid disparity must be finite and non-negative");
    }
  }
}

void DisparityImage::set(int u, int v, double disparity) {
  if (!std::isfinite(disparity) || disparity < 0.0) {
    throw Error(Errc::invalid_argument, "valid disparity must be finite and non-negative");
  }
  values_(u, v) = disparity;
  valid_(u, v) = 1;
}

void DisparityImage::invalidate(int u, int v) noexcept {
  values_(u, v) = 0.0;
  valid_(u, v) = 0;
}

std::size_t DisparityImage::valid_count() const noexcept {
  const auto px = valid_.pixels();
  return static_cast<std::size_t>(std::count_if(px.begin(), px.end(), [](std::uint8_t b) { return b != 0; }));
}

std::size_t DamageMask::damaged_count() const noexcept {
  const auto px = damaged.pixels();
  return static_cast<std::size_t>(std::count_if(px.begin(), px.end(), [](std::uint8_t b) { return b != 0; }));
}

void CameraModel::validate() const {
  if (!(focal_length > 0.0) || !(baseline > 0.0) || !(disparity_scale > 0.0)) {
    throw Error(Errc::invalid_argument, "camera focal length, baseline and disparity scale must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw Error(Errc::invalid_argument, "camera principal point must be finite");
  }
}

GrayImage median_filter(const GrayImage& img, int radius) {
  if (radius < 1) throw Error(Errc::invalid_argument, "median radius must be >= 1");
  if (radius >= std::min(img.width(), img.height())) {
    throw Error(Errc::invalid_argument, "median radius must be smaller than both image dimensions");
  }
  const int w = img.width();
  const int h = img.height();
  const int side = 2 * radius + 1;
  std::vector<double> window(static_cast<std::size_t>(side) * side);
  const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
  GrayImage out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      std::size_t k = 0;
      for (int dv = -radius; dv <= radius; ++dv) {
        const int vv = std::clamp(v + dv, 0, h - 1);
        for (int du = -radius; du <= radius; ++du) {
          window[k++] = img(std::clamp(u + du, 0, w - 1), vv);
        }
      }
      std::nth_element(window.begin(), mid, window.end());
      out(u, v) = *mid;
    }
  }
  return out;
}

}  // namespace pothole
