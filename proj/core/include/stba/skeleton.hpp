#pragma once

#include <array>
#include <vector>

#include "stba/camera.hpp"
#include "stba/motion_prior.hpp"
#include "stba/problem.hpp"
#include "stba/resample.hpp"
#include "stba/trajectory.hpp"

namespace stba {

struct SkeletonTopology {
  int n_joints = 0;
  // Rigid connections; bone length is encouraged to stay at its free mean.
  std::vector<std::array<int, 2>> bones;
  // (left bone, right bone) index pairs whose lengths should match.
  std::vector<std::array<int, 2>> mirror_bones;
  double sigma_length_m = 0.01;
  double sigma_symmetry_m = 0.01;

  void validate() const;
};

// Per joint, one track on the full camera x frame capture grid in time
// order. A slot the joint was not observed at carries valid = false and an
// interpolated placeholder position until infill_missing replaces it.
struct SkeletonSequence {
  std::vector<Trajectory3D> joints;
  std::vector<std::vector<bool>> valid;  // parallel to joints[j].samples()
  std::vector<double> mean_bone_length;  // per topology bone; 0 if never seen
  // Joints observed by fewer than two cameras; depth is prior-supported only.
  std::vector<bool> joint_underconstrained;
};

struct SkeletonFitConfig {
  MotionPriorConfig prior = MotionPriorConfig::for_frame_rate(12.0);
  SolverConfig solver;

  SkeletonFitConfig() { solver.max_iterations = 200; }
};

// Joint reprojection + motion prior + bone-length coherence + left/right
// symmetry over the whole sequence at once, equally weighted, with the mean
// bone lengths as free variables and the spatiotemporal calibration frozen.
// Keypoint observations use point_id as the joint index.
SkeletonSequence fit_skeleton(const std::vector<Observation2D>& keypoint_obs,
                              const std::vector<CameraModel>& cameras,
                              const SkeletonTopology& topology,
                              const SkeletonFitConfig& cfg = {});

// Replaces every sample position with a truncated-cosine reconstruction
// fitted to the valid samples (smoothing in place, filling the gaps).
// Validity flags are preserved so callers know which samples were measured.
// Throws too_sparse when a joint has fewer valid samples than basis
// functions (a fully missing joint included).
SkeletonSequence infill_missing(const SkeletonSequence& seq, const DctResampleConfig& cfg);

// Bone-length variance over time, averaged across bones; the coherence
// metric both for fits and for per-frame triangulation baselines.
double bone_length_variance(const SkeletonSequence& seq, const SkeletonTopology& topology);

}  // namespace stba
