#pragma once

#include <vector>

#include "stba/alignment.hpp"
#include "stba/camera.hpp"

namespace stba {

// One 2D track: every measurement of one point id across cameras and frames.
struct Track2D {
  PointId point_id = 0;
  std::vector<Observation2D> observations;
};

std::vector<Track2D> group_tracks(const std::vector<Observation2D>& observations);

struct ClassifyConfig {
  double static_thresh_px = 3.0;
  double static_fraction = 0.8;
  double valley_ratio = 0.8;
  int retriangulation_trials = 20;
  PairwiseConfig sweep;  // offset sweep for the valley test
  std::uint64_t seed = 0;
};

struct TrackPartition {
  std::vector<PointId> static_ids;
  std::vector<PointId> dynamic_ids;
  std::vector<PointId> rejected_ids;
};

// Two-stage heuristic split. A track is static when points triangulated from
// randomly mixed frames keep reprojecting within static_thresh_px for more
// than static_fraction of the measurements (a moving point cannot). A
// non-static track is dynamic when sweeping the relative offset of its two
// best cameras carves a cost valley whose minimum undercuts valley_ratio
// times the mean (a consistent 3D motion exists at some alignment; noise has
// none). Everything else is rejected.
TrackPartition classify_tracks(const std::vector<Track2D>& tracks,
                               const std::vector<CameraModel>& cameras,
                               const ClassifyConfig& cfg = {});

}  // namespace stba
