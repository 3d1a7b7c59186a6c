#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pothole {

enum class Errc {
  invalid_argument,
  io,
  unsupported_format,
  empty_selection,
  degenerate_geometry,
  flat_energy,
  varkappa_zero,
  degenerate_histogram,
  insufficient_points,
  degenerate_configuration,
  no_consensus,
  frame_mismatch,
  empty_cloud,
  empty_road_mask,
  dimension_mismatch,
  unknown_layout,
  negative_disparity,
  rank_deficient,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library. `code()` identifies the failure class
/// named in the module contracts; `what()` carries a human readable detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pothole
