#include "pothole/error.hpp"

namespace pothole {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::io: return "io";
    case Errc::unsupported_format: return "unsupported-format";
    case Errc::empty_selection: return "empty-selection";
    case Errc::degenerate_geometry: return "degenerate-geometry";
    case Errc::flat_energy: return "flat-energy";
    case Errc::varkappa_zero: return "varkappa-zero";
    case Errc::degenerate_histogram: return "degenerate-histogram";
    case Errc::insufficient_points: return "insufficient-points";
    case Errc::degenerate_configuration: return "degenerate-configuration";
    case Errc::no_consensus: return "no-consensus";
    case Errc::frame_mismatch: return "frame-mismatch";
    case Errc::empty_cloud: return "empty-cloud";
    case Errc::empty_road_mask: return "empty-road-mask";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::unknown_layout: return "unknown-layout";
    case Errc::negative_disparity: return "negative-disparity";
    case Errc::rank_deficient: return "rank-deficient";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace pothole
