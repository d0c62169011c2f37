#pragma once

#include <array>
#include <string>
#include <vector>

#include "stba/alignment.hpp"

namespace stba {

struct CameraGroup {
  std::vector<CameraId> members;
  // The two cameras shared with the previous group; {-1, -1} for the first.
  std::array<CameraId, 2> shared_with_prev{-1, -1};
};

struct DncConfig {
  int target_group_size = 4;
  double inconsistency_tol_frames = 0.2;
  IraConfig ira;
};

// Windows of target size over the co-visibility backbone (max-shared-tracks
// spanning path), stepped so adjacent windows share exactly two cameras and
// every camera is covered. A fleet no larger than the target stays one group.
std::vector<CameraGroup> form_groups(const CameraGraph& graph, int target_group_size);

// True when the two group solutions disagree about their shared cameras: the
// relative offset differs by more than the tolerance, or the pair's
// sub-frame order flips (inconsistent regardless of magnitude).
bool detect_inconsistency(const std::vector<CameraModel>& group_a,
                          const std::vector<CameraModel>& group_b,
                          const std::array<CameraId, 2>& shared, double tol_frames);

struct DncResult {
  SceneState scene;
  CostReport report;
  std::vector<CameraGroup> groups;
  std::vector<IraResult> group_runs;  // parallel to groups
  int merge_events = 0;
  std::vector<StageTiming> timings;
  std::string trace_json;
};

// Runs the incremental alignment per group, verifies adjacent groups agree on
// their shared cameras (merging and re-solving the pair otherwise), chains
// the group offsets onto the first group's timeline through the shared
// cameras, and finishes with one global joint solve.
DncResult run_divide_conquer(const SceneState& initial,
                             const std::vector<Observation2D>& observations,
                             const DncConfig& cfg);

}  // namespace stba
