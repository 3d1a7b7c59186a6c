#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pothole/segmentation.hpp"

namespace pothole {

using boost::multiprecision::cpp_int;

int Histogram::bin_of(double value) const noexcept {
  if (!(max > min)) return 0;
  const double pos = std::floor((value - min) * bins() / (max - min));
  if (pos <= 0.0) return 0;
  if (pos >= bins() - 1) return bins() - 1;
  return static_cast<int>(pos);
}

int Histogram::occupied_bins() const noexcept {
  return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c != 0; }));
}

Histogram histogram(const GrayImage& img, const BinaryMask* mask, int bins) {
  if (bins < 2) throw Error(Errc::invalid_argument, "histogram needs at least 2 bins");
  if (mask != nullptr && !mask->same_shape(img)) {
    throw Error(Errc::dimension_mismatch, "histogram mask differs in shape from the image");
  }
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  h.min = std::numeric_limits<double>::infinity();
  h.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (mask != nullptr && (*mask)[i] == 0) continue;
    h.min = std::min(h.min, img[i]);
    h.max = std::max(h.max, img[i]);
    ++h.total;
  }
  if (h.total == 0) throw Error(Errc::empty_selection, "histogram over zero pixels");
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (mask != nullptr && (*mask)[i] == 0) continue;
    ++h.counts[static_cast<std::size_t>(h.bin_of(img[i]))];
  }
  return h;
}

ThresholdResult otsu_threshold(const Histogram& hist) {
  if (hist.occupied_bins() < 2) throw Error(Errc::degenerate_histogram, "Otsu needs mass in at least 2 bins");
  const int bins = hist.bins();
  std::uint64_t total = 0;
  cpp_int weighted_total = 0;
  for (int i = 0; i < bins; ++i) {
    total += hist.counts[i];
    weighted_total += cpp_int(hist.counts[i]) * i;
  }

  // N^2 sigma_B^2(t) = (S0 w1 - S1 w0)^2 / (w0 w1); compare num/den exactly.
  cpp_int best_num = -1;
  cpp_int best_den = 1;
  int best_bin = 0;
  std::uint64_t w0 = 0;
  cpp_int s0 = 0;
  for (int t = 1; t < bins; ++t) {
    w0 += hist.counts[t - 1];
    s0 += cpp_int(hist.counts[t - 1]) * (t - 1);
    const std::uint64_t w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const cpp_int s1 = weighted_total - s0;
    const cpp_int diff = s0 * w1 - s1 * w0;
    const cpp_int num = diff * diff;
    const cpp_int den = cpp_int(w0) * w1;
    if (best_num < 0 || num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best_bin = t;
    }
  }
  const double n = static_cast<double>(total);
  ThresholdResult r;
  r.bin = best_bin;
  r.threshold = hist.lower_edge(best_bin);
  r.criterion = best_num.convert_to<double>() / best_den.convert_to<double>() / (n * n);
  return r;
}

ThresholdResult triangle_threshold(const Histogram& hist) {
  if (hist.occupied_bins() < 2) {
    throw Error(Errc::degenerate_histogram, "triangle threshold needs mass in at least 2 bins");
  }
  const auto& c = hist.counts;
  const int bins = hist.bins();
  int peak = 0;
  for (int i = 1; i < bins; ++i) {
    if (c[i] > c[peak]) peak = i;
  }
  int lo = 0;
  while (c[lo] == 0) ++lo;
  int hi = bins - 1;
  while (c[hi] == 0) --hi;
  const int tail = (hi - peak >= peak - lo) ? hi : lo;
  const int step = tail > peak ? 1 : -1;

  // Vertical gap between chord and bar, scaled by |tail - peak| so it stays
  // integral. Perpendicular distance is this over the chord length.
  using wide = __int128;
  const wide span = tail - peak;
  const wide hp = static_cast<wide>(c[peak]);
  const wide ht = static_cast<wide>(c[tail]);
  const wide sign = step;
  wide best = std::numeric_limits<std::int64_t>::min();
  int best_bin = tail;
  for (int i = peak; i != tail + step; i += step) {
    const wide gap = (hp * span + (ht - hp) * (i - peak) - static_cast<wide>(c[i]) * span) * sign;
    if (gap >= best) {
      best = gap;
      best_bin = i;
    }
  }
  const double chord = std::hypot(static_cast<double>(span), static_cast<double>(ht - hp));
  ThresholdResult r;
  r.bin = best_bin;
  r.threshold = hist.lower_edge(best_bin);
  r.criterion = static_cast<double>(best) / chord;
  return r;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a < b) {
    parent[b] = a;
  } else {
    parent[a] = b;
  }
}

}  // namespace

Components connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  LabelImage provisional(w, h, 0);
  std::vector<int> parent{0};
  const bool eight = connectivity == Connectivity::eight;

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (mask(u, v) == 0) continue;
      int neighbours[4];
      int n = 0;
      if (u > 0 && provisional(u - 1, v) != 0) neighbours[n++] = provisional(u - 1, v);
      if (v > 0 && provisional(u, v - 1) != 0) neighbours[n++] = provisional(u, v - 1);
      if (eight && v > 0) {
        if (u > 0 && provisional(u - 1, v - 1) != 0) neighbours[n++] = provisional(u - 1, v - 1);
        if (u + 1 < w && provisional(u + 1, v - 1) != 0) neighbours[n++] = provisional(u + 1, v - 1);
      }
      if (n == 0) {
        const int id = static_cast<int>(parent.size());
        parent.push_back(id);
        provisional(u, v) = id;
        continue;
      }
      int label = neighbours[0];
      for (int k = 1; k < n; ++k) label = std::min(label, neighbours[k]);
      provisional(u, v) = label;
      for (int k = 0; k < n; ++k) unite(parent, label, neighbours[k]);
    }
  }

  Components out{LabelImage(w, h, 0), {}};
  std::vector<int> final_id(parent.size(), 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int p = provisional(u, v);
      if (p == 0) continue;
      const int root = find_root(parent, p);
      if (final_id[root] == 0) {
        final_id[root] = static_cast<int>(out.regions.size()) + 1;
        RegionStats s;
        s.id = final_id[root];
        s.min_u = s.max_u = u;
        s.min_v = s.max_v = v;
        out.regions.push_back(s);
      }
      const int id = final_id[root];
      out.labels(u, v) = id;
      RegionStats& s = out.regions[id - 1];
      ++s.area;
      s.min_u = std::min(s.min_u, u);
      s.max_u = std::max(s.max_u, u);
      s.min_v = std::min(s.min_v, v);
      s.max_v = std::max(s.max_v, v);
      s.centroid_u += u;
      s.centroid_v += v;
    }
  }
  for (auto& s : out.regions) {
    s.centroid_u /= static_cast<double>(s.area);
    s.centroid_v /= static_cast<double>(s.area);
  }
  return out;
}

DamageMask label_damage(const BinaryMask& mask, Connectivity connectivity, std::size_t min_area) {
  Components cc = connected_components(mask, connectivity);
  DamageMask out{BinaryMask(mask.width(), mask.height(), 0), LabelImage(mask.width(), mask.height(), 0), {}};
  std::vector<int> remap(cc.regions.size() + 1, 0);
  for (const auto& r : cc.regions) {
    if (r.area < min_area) continue;
    RegionStats kept = r;
    kept.id = static_cast<int>(out.regions.size()) + 1;
    remap[r.id] = kept.id;
    out.regions.push_back(kept);
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const int id = remap[cc.labels[i]];
    out.labels[i] = id;
    out.damaged[i] = id != 0 ? 1 : 0;
  }
  return out;
}

DamageMask segment_below(const GrayImage& img, double threshold, const BinaryMask& validity,
                         Connectivity connectivity) {
  if (!img.same_shape(validity)) throw Error(Errc::dimension_mismatch, "validity raster differs in shape");
  BinaryMask below(img.width(), img.height(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) below[i] = (validity[i] != 0 && img[i] < threshold) ? 1 : 0;
  return label_damage(below, connectivity);
}

}  // namespace pothole
