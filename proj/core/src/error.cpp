#include "stba/error.hpp"

namespace stba {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::behind_camera: return "behind_camera";
    case ErrorCode::missing_pose: return "missing_pose";
    case ErrorCode::degenerate_geometry: return "degenerate_geometry";
    case ErrorCode::too_few_samples: return "too_few_samples";
    case ErrorCode::no_shared_tracks: return "no_shared_tracks";
    case ErrorCode::disconnected_graph: return "disconnected_graph";
    case ErrorCode::underconstrained_gauge: return "underconstrained_gauge";
    case ErrorCode::empty_problem: return "empty_problem";
    case ErrorCode::insufficient_motion: return "insufficient_motion";
    case ErrorCode::insufficient_row_spread: return "insufficient_row_spread";
    case ErrorCode::insufficient_views: return "insufficient_views";
    case ErrorCode::too_sparse: return "too_sparse";
    case ErrorCode::grouping_failed: return "grouping_failed";
    case ErrorCode::no_shared_cameras: return "no_shared_cameras";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::all_trials_flipped: return "all_trials_flipped";
    case ErrorCode::inconsistent_groups: return "inconsistent_groups";
    case ErrorCode::id_mismatch: return "id_mismatch";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace stba
