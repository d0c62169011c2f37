#pragma once

#include <ceres/ceres.h>

#include <array>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stba/camera.hpp"
#include "stba/motion_prior.hpp"
#include "stba/trajectory.hpp"
#include "stba/types.hpp"

namespace stba {

// Which parameter groups the solve is allowed to move. The gauge overrides
// these for the reference camera (pose and beta stay frozen) and for the scale
// camera (translation norm pinned).
struct SolveFlags {
  bool poses = true;
  bool intrinsics = false;
  bool betas = true;
  bool gammas = false;
  bool static_points = true;
  bool trajectories = true;
};

enum class LossKind { kNone, kHuber };

struct SolverConfig {
  int max_iterations = 200;
  double function_tolerance = 1e-10;
  double parameter_tolerance = 1e-12;
  LossKind loss = LossKind::kNone;
  double huber_delta = 2.0;  // pixels; rescaled per observation by its sigma
  // Multiplier on the motion term, so the objective is image + weight * motion.
  double prior_weight = 1.0;
  int threads = 1;
  // -1 picks the first camera of the scene. The reference camera's pose and
  // beta are the spatial/temporal gauge anchors.
  CameraId reference_camera = -1;
  // -1 picks the first non-reference camera with nonzero translation; its
  // translation norm pins the global scale.
  CameraId scale_camera = -1;
  // Bound free betas to the cell preserving the assembled sample ordering
  // (see the Problem comment). solve_recentering relies on this to walk
  // across cell faces one sample coincidence at a time.
  bool offset_order_cell = true;
  // Max assemble-solve rounds in solve_recentering before giving up on a
  // stalled offset. Each round covers at least half the remaining distance
  // to the in-cell optimum, so a handful suffices.
  int order_cell_rounds = 8;
  bool verbose = false;

  void validate() const;
};

struct SceneState {
  std::vector<CameraModel> cameras;
  std::vector<StaticPoint> static_points;
  std::vector<Trajectory3D> trajectories;
};

struct CameraReprojStats {
  CameraId camera_id = 0;
  double static_rmse_px = 0.0;
  double dynamic_rmse_px = 0.0;
  int n_static_obs = 0;
  int n_dynamic_obs = 0;
};

// Cost bookkeeping. image_cost is the plain sum of squared sigma-scaled
// reprojection residuals; motion_cost is the prior_weight-scaled kinetic sum
// over all trajectories with the pairing fixed at assembly. Both are
// recomputed directly from the returned parameters, never read back from the
// solver, so they stay comparable across solves with different frozen sets.
struct CostReport {
  double total = 0.0;
  double image_cost = 0.0;
  double motion_cost = 0.0;
  std::vector<CameraReprojStats> per_camera;
  int iterations = 0;
  bool converged = true;
  int invalid_projections = 0;
  // 2x the solver-internal cost after the initial evaluation and after each
  // accepted step; non-increasing for a trust-region method.
  std::vector<double> iteration_costs;
  std::string termination;
};

// One assembled spatiotemporal least-squares problem:
//   - a 2-vector sigma-scaled reprojection residual per observation,
//   - a 3-vector kinetic prior residual per consecutive sample pair of every
//     dynamic trajectory, with the pair's timestamps written as functions of
//     the owning cameras' (beta, gamma) so offsets couple into the prior.
// Residuals whose parameter blocks are all frozen under the given flags are
// skipped; the full default flags produce exactly
//   2 * #observations + 3 * sum_n (T_n - 1)
// scalar residuals.
//
// The sample pairing is fixed at assembly, which makes the claimed sequencing
// part of the model: free betas are bounded to the cell that preserves every
// prior pair's time order. Without that cell the motion term is not a sound
// objective in beta: pushing a pair's gap through zero leaves a stale
// ordering whose |dt| can inflate freely, and the coincidence spike guarding
// the crossing is narrower than any practical trust-region step. The cell is
// a box: each pair budgets half its gap to the earlier sample's camera (on
// the side that delays it) and half to the later one's (on the side that
// advances it). Re-sequencing across cells is solve_recentering's job.
class Problem {
 public:
  Problem(SceneState scene, std::vector<Observation2D> observations,
          MotionPriorConfig prior, SolverConfig config, SolveFlags flags);

  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  // Runs the trust-region minimizer and writes the result back into scene().
  // Non-convergence is reported through CostReport::converged, not thrown.
  CostReport solve();

  // Report at the current parameters without optimizing.
  [[nodiscard]] CostReport evaluate() const;

  [[nodiscard]] const SceneState& scene() const { return scene_; }
  [[nodiscard]] const SolveFlags& flags() const { return flags_; }
  [[nodiscard]] const SolverConfig& config() const { return config_; }

  [[nodiscard]] int num_scalar_residuals() const { return num_scalar_residuals_; }
  [[nodiscard]] int num_prior_pairs() const { return static_cast<int>(prior_pairs_.size()); }
  [[nodiscard]] CameraId reference_camera() const { return reference_camera_; }

  // Per-camera order-cell half-widths (frames, scene camera order): how far
  // beta may move down (lo) or up (hi) before some cross-camera prior pair's
  // time order flips. Infinity when no pair constrains that side.
  [[nodiscard]] const std::vector<double>& beta_cell_lo() const { return beta_cell_lo_; }
  [[nodiscard]] const std::vector<double>& beta_cell_hi() const { return beta_cell_hi_; }

  // Exposed for derivative verification and diagnostics.
  ceres::Problem& ceres_problem() { return problem_; }

 private:
  struct PriorPair {
    int traj = 0;
    int sample_i = 0;
    int sample_j = 0;
    double scale = 0.0;  // sqrt(prior_weight * w_i * mass / 2)
  };

  void index_scene();
  void partition_observations();
  void build_parameters();
  void add_reprojection_residuals();
  void add_prior_residuals();
  void apply_gauge();
  void push_to_scene();

  [[nodiscard]] double* pose_block(int cam_index, FrameIndex frame);
  [[nodiscard]] double* intrinsics_block(int cam_index, FrameIndex frame);

  SceneState scene_;
  std::vector<Observation2D> observations_;
  MotionPriorConfig prior_;
  SolverConfig config_;
  SolveFlags flags_;

  // id -> dense index
  std::map<CameraId, int> camera_index_;
  std::map<PointId, int> static_index_;
  std::map<PointId, int> traj_index_;

  std::vector<int> static_obs_;   // indices into observations_
  std::vector<int> dynamic_obs_;
  // dynamic observation index -> (traj, sample)
  std::vector<std::pair<int, int>> obs_sample_;

  // Parameter storage. Deques keep element addresses stable under growth.
  std::deque<std::array<double, 6>> pose_storage_;
  std::deque<std::array<double, 5>> intrinsics_storage_;
  std::vector<std::map<FrameIndex, int>> camera_pose_blocks_;  // kPerFrame
  std::vector<int> camera_shared_pose_;                        // kShared, -1 otherwise
  std::vector<int> camera_shared_intrinsics_;
  std::vector<std::map<FrameIndex, int>> camera_frame_intrinsics_;
  std::vector<double> beta_;
  std::vector<double> gamma_;
  std::vector<std::array<double, 3>> static_points_;
  std::vector<std::vector<std::array<double, 3>>> samples_;

  std::vector<PriorPair> prior_pairs_;
  std::vector<double> beta_cell_lo_;  // see beta_cell_lo()
  std::vector<double> beta_cell_hi_;
  int reference_index_ = -1;
  CameraId reference_camera_ = -1;
  int num_scalar_residuals_ = 0;

  ceres::Problem problem_;
};

// Optimizes dynamic trajectories (and optionally the non-reference betas)
// against frozen camera geometry. Static points are dropped: with cameras
// frozen their residuals are constant. Observations not referencing one of
// the given tracks are ignored. A track whose samples all come from a single
// camera has unconstrained depth and is flagged ill-conditioned (it still
// participates in the solve; the prior keeps it finite).
struct TrajectorySolveResult {
  std::vector<Trajectory3D> trajectories;
  // Written-back camera models; betas differ from the input when
  // optimize_betas is set.
  std::vector<CameraModel> cameras;
  std::vector<bool> ill_conditioned;
  CostReport report;
  // True when the solved sample interleaving differs from the input's:
  // the optimizer left the claimed sequencing (see solve_recentering).
  bool reordered = false;
};

TrajectorySolveResult solve_trajectories_only(const std::vector<CameraModel>& cameras,
                                              std::vector<Trajectory3D> tracks,
                                              const std::vector<Observation2D>& observations,
                                              const MotionPriorConfig& prior,
                                              SolverConfig config, bool optimize_betas = false);

// Order-cell boxes are inner approximations of the set of offsets keeping
// the assembled interleaving: a pair's budget is split between its two
// cameras, so a legitimate in-cell optimum can lie beyond one solve's box.
// solve_recentering re-assembles at the stall point (fresh box around the
// new betas) and continues; when an offset presses a cell face, it steps
// just across the sample coincidence and re-sorts, letting descent either
// continue in the neighboring ordering or pull straight back. Plain single
// solve when flags.betas or config.offset_order_cell is off.
struct RecenteredSolve {
  SceneState scene;
  // Last round's report with iterations and iteration_costs accumulated
  // across rounds (costs may jump at a crossing step).
  CostReport report;
  int rounds = 1;
  // Final sample interleaving differs from the input scene's.
  bool reordered = false;
};

RecenteredSolve solve_recentering(SceneState scene, std::vector<Observation2D> observations,
                                  const MotionPriorConfig& prior, const SolverConfig& config,
                                  const SolveFlags& flags);

// Observations whose point id exists in the scene, statics or trajectories.
// The geometric initialization drops background points seen by one camera
// only, so raw measurement sets can reference ids a scene no longer carries.
std::vector<Observation2D> observations_in_scene(const SceneState& scene,
                                                 const std::vector<Observation2D>& observations);

// Sets each sample's weight to mean_focal * depth / sigma using the sample's
// source camera at the current geometry; sigma comes from the matching
// observation. Samples observed at non-positive depth keep their weight.
void assign_depth_weights(std::vector<Trajectory3D>& trajectories,
                          const std::vector<CameraModel>& cameras,
                          const std::vector<Observation2D>& observations);

}  // namespace stba
