#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pothole/error.hpp"

namespace pothole {

/// Pixel position: u is the column, v the row.
struct PixelCoord {
  int u = 0;
  int v = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Dense row-major raster. Element (u, v) lives at index v * width + u.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw Error(Errc::invalid_argument, "raster dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Raster(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) {
      throw Error(Errc::invalid_argument, "raster dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw Error(Errc::dimension_mismatch, "raster data length does not match width x height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }
  bool contains(int u, int v) const noexcept { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  T& operator()(int u, int v) noexcept { return data_[index(u, v)]; }
  const T& operator()(int u, int v) const noexcept { return data_[index(u, v)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  std::span<const T> row(int v) const noexcept {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(v) * width_, width_);
  }
  std::span<T> row(int v) noexcept { return std::span<T>(data_).subspan(static_cast<std::size_t>(v) * width_, width_); }

  bool same_shape(int width, int height) const noexcept { return width_ == width && height_ == height; }
  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Raster<double>;
/// 0 = false, 1 = true.
using BinaryMask = Raster<std::uint8_t>;
using LabelImage = Raster<std::int32_t>;

/// Horizontal disparity in pixels with a parallel validity raster. Invalid
/// pixels hold 0 and must never feed arithmetic.
class DisparityImage {
 public:
  DisparityImage() = default;
  /// All pixels start invalid.
  DisparityImage(int width, int height);
  DisparityImage(GrayImage values, BinaryMask valid);

  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }
  std::size_t size() const noexcept { return values_.size(); }

  double at(int u, int v) const noexcept { return values_(u, v); }
  bool is_valid(int u, int v) const noexcept { return valid_(u, v) != 0; }

  /// Stores a finite, non-negative disparity and marks the pixel valid.
  void set(int u, int v, double disparity);
  void invalidate(int u, int v) noexcept;

  const GrayImage& values() const noexcept { return values_; }
  const BinaryMask& validity() const noexcept { return valid_; }
  std::size_t valid_count() const noexcept;

 private:
  GrayImage values_;
  BinaryMask valid_;
};

struct RegionStats {
  int id = 0;
  std::size_t area = 0;
  int min_u = 0, min_v = 0, max_u = 0, max_v = 0;
  double centroid_u = 0.0;
  double centroid_v = 0.0;
};

/// Binary detection output with labeled connected regions; labels are
/// contiguous 1..regions.size(), 0 marks background.
struct DamageMask {
  BinaryMask damaged;
  LabelImage labels;
  std::vector<RegionStats> regions;

  int width() const noexcept { return damaged.width(); }
  int height() const noexcept { return damaged.height(); }
  std::size_t damaged_count() const noexcept;
};

/// Rectified stereo intrinsics needed to turn disparity into metric depth.
struct CameraModel {
  double focal_length = 0.0;  ///< px
  double baseline = 0.0;      ///< m
  double cx = 0.0;            ///< principal point, px
  double cy = 0.0;
  double disparity_scale = 256.0;  ///< raw raster units per px

  void validate() const;
};

// ---------------------------------------------------------------------------
// Raster files. PNG and binary PGM (P5), 8- or 16-bit single channel.

struct RawRaster {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

RawRaster read_raster(const std::filesystem::path& path);
/// Written through a temporary file and renamed into place.
void write_raster(const std::filesystem::path& path, const RawRaster& raster);

/// Decodes value = raw / scale; pixels equal to `invalid_value` become
/// invalid. Without an explicit scale, 16-bit rasters use 256 and 8-bit use 1.
DisparityImage load_disparity(const std::filesystem::path& path, std::optional<double> scale = std::nullopt,
                              std::uint16_t invalid_value = 0);

/// Encodes round(value * scale) as 16-bit, invalid pixels as raw 0. Valid
/// pixels are clamped to [1, 65535] so they never alias the invalid code.
void save_disparity(const DisparityImage& disp, const std::filesystem::path& path, double scale = 256.0);

/// 8-bit: damaged = 255, background = 0.
void save_mask(const DamageMask& mask, const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);
/// Any nonzero sample reads as true.
BinaryMask load_mask(const std::filesystem::path& path);

/// Median of the (2r+1)^2 window with replicated borders.
GrayImage median_filter(const GrayImage& img, int radius);

}  // namespace pothole
