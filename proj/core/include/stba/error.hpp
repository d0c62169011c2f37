#pragma once

#include <stdexcept>
#include <string>

namespace stba {

// Failure categories surfaced to callers. Soft outcomes (non-convergence,
// ill-conditioned subproblems) are reported through result flags instead.
enum class ErrorCode {
  invalid_config,
  behind_camera,
  missing_pose,
  degenerate_geometry,
  too_few_samples,
  no_shared_tracks,
  disconnected_graph,
  underconstrained_gauge,
  empty_problem,
  insufficient_motion,
  insufficient_row_spread,
  insufficient_views,
  too_sparse,
  grouping_failed,
  no_shared_cameras,
  rank_deficient,
  all_trials_flipped,
  inconsistent_groups,
  id_mismatch,
  io_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  [[nodiscard]] ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

// Throws Error(code) unless cond holds.
void require(bool cond, ErrorCode code, const std::string& what);

}  // namespace stba
