#include <algorithm>
#include <vector>

#include "pothole/segmentation.hpp"

namespace pothole {
namespace {

// Replicating the border never introduces a value that is not already
// inside the in-bounds part of the window, so each pass only has to look at
// the clipped window. `want` is the value whose presence decides the output
// (0 for erosion, 1 for dilation).
void pass_1d(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride, int radius,
             std::uint8_t want, std::vector<int>& prefix) {
  prefix.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + ((in[i * stride] != 0) == (want != 0) ? 1 : 0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - radius);
    const int hi = std::min(n - 1, i + radius);
    const bool hit = prefix[hi + 1] - prefix[lo] > 0;
    out[i * stride] = hit ? want : static_cast<std::uint8_t>(1 - want);
  }
}

BinaryMask separable(const BinaryMask& mask, int radius, std::uint8_t want) {
  if (radius < 1) throw Error(Errc::invalid_argument, "morphology radius must be >= 1");
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask tmp(w, h, 0);
  BinaryMask out(w, h, 0);
  std::vector<int> prefix;
  for (int v = 0; v < h; ++v) pass_1d(&mask(0, v), &tmp(0, v), w, 1, radius, want, prefix);
  for (int u = 0; u < w; ++u) pass_1d(&tmp(u, 0), &out(u, 0), h, w, radius, want, prefix);
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int radius) { return separable(mask, radius, 0); }

BinaryMask dilate(const BinaryMask& mask, int radius) { return separable(mask, radius, 1); }

BinaryMask morphological_open(const BinaryMask& mask, int radius) { return dilate(erode(mask, radius), radius); }

}  // namespace pothole
