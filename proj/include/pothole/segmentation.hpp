#pragma once

#include <cstdint>
#include <vector>

#include "pothole/imaging.hpp"

namespace pothole {

/// Linear binning of the observed [min, max] range; the maximum lands in
/// the last bin. A constant image puts everything in bin 0.
struct Histogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  double min = 0.0;
  double max = 0.0;

  int bins() const noexcept { return static_cast<int>(counts.size()); }
  double bin_width() const noexcept { return (max - min) / bins(); }
  /// Intensity at the lower edge of `bin`.
  double lower_edge(int bin) const noexcept { return min + bin * bin_width(); }
  int bin_of(double value) const noexcept;
  int occupied_bins() const noexcept;
};

Histogram histogram(const GrayImage& img, const BinaryMask* mask = nullptr, int bins = 256);

/// `bin` splits the histogram into [0, bin) and [bin, bins); `threshold`
/// is the intensity at that boundary.
struct ThresholdResult {
  double threshold = 0.0;
  int bin = 0;
  double criterion = 0.0;
};

/// Maximises the between-class variance w0 w1 (mu0 - mu1)^2 over every
/// split. Candidates are compared exactly in integer arithmetic; ties go to
/// the lowest split. `criterion` is the maximum, normalised by total^2.
ThresholdResult otsu_threshold(const Histogram& hist);

/// Zack's triangle method: chord from the peak to the farthest nonempty
/// bin, threshold at the bin lying farthest below it (ties toward the
/// tail). `criterion` is that perpendicular distance.
ThresholdResult triangle_threshold(const Histogram& hist);

enum class Connectivity { four = 4, eight = 8 };

struct Components {
  LabelImage labels;
  std::vector<RegionStats> regions;  ///< regions[i].id == i + 1
};

/// Ids are contiguous and ordered by each region's first pixel in raster
/// scan order.
Components connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::four);

/// Square (2r+1)^2 structuring element; the image border is replicated.
BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask morphological_open(const BinaryMask& mask, int radius);

/// Labels `mask` and drops regions smaller than `min_area` pixels.
DamageMask label_damage(const BinaryMask& mask, Connectivity connectivity = Connectivity::four,
                        std::size_t min_area = 0);

/// damaged = valid && img < threshold.
DamageMask segment_below(const GrayImage& img, double threshold, const BinaryMask& validity,
                         Connectivity connectivity = Connectivity::four);

}  // namespace pothole
