#pragma once

#include <array>
#include <string>
#include <vector>

#include "stba/camera.hpp"
#include "stba/metrics.hpp"
#include "stba/motion_prior.hpp"
#include "stba/problem.hpp"
#include "stba/trajectory.hpp"

namespace stba {

// Per-frame triangulation under the synchronized-frames assumption: every
// camera's frame f is treated as simultaneous. The standard geometry-based
// starting point; its error is exactly what the joint solve then removes.
// Ids absent from dynamic_track_ids are triangulated as static points.
// Sample times come from the cameras' current (claimed) offsets.
SceneState geometric_initialization(std::vector<CameraModel> cameras,
                                    const std::vector<Observation2D>& observations,
                                    const std::vector<PointId>& dynamic_track_ids);

struct PairwiseConfig {
  double grid_step = 0.1;       // frames
  double grid_halfwidth = 2.0;  // frames
  MotionPriorConfig prior = MotionPriorConfig::for_frame_rate(12.0);
  SolverConfig solver;

  PairwiseConfig() {
    solver.max_iterations = 40;
    solver.function_tolerance = 1e-9;
  }
};

struct PairwiseResult {
  CameraId cam_i = -1;
  CameraId cam_j = -1;
  double offset_frames = 0.0;  // beta_j - beta_i at the grid minimum
  double cost = 0.0;
  double mean_residual_cost = 0.0;  // cost per scalar residual
  int n_shared_tracks = 0;
  double baseline_m = 0.0;
  std::vector<std::pair<double, double>> curve;  // (candidate beta_j, cost)
};

// Linear search over a discrete set of candidate offsets for camera j, each
// scored by re-optimizing the shared 3D tracks against both cameras with the
// candidate frozen in. The grid is centered on cam_j's current offset.
PairwiseResult pairwise_offset_search(const CameraModel& cam_i, const CameraModel& cam_j,
                                      const std::vector<Observation2D>& observations,
                                      const std::vector<PointId>& track_ids,
                                      const PairwiseConfig& cfg);

struct GraphEdge {
  CameraId i = -1;  // i < j
  CameraId j = -1;
  double t_ij = 0.0;  // refined beta_j - beta_i, frames
  int n_shared = 0;
  double baseline_m = 0.0;
  double pair_cost = 0.0;  // mean per-residual pairwise cost
  double weight = 0.0;     // triplet-inconsistency weight, see build_camera_graph
};

struct CameraGraph {
  std::vector<CameraId> nodes;
  std::vector<GraphEdge> edges;
  bool connected = true;

  [[nodiscard]] const GraphEdge* edge(CameraId a, CameraId b) const;
  // Signed refined offset beta_to - beta_from; requires the edge to exist.
  [[nodiscard]] double offset(CameraId from, CameraId to) const;
};

// Co-visibility skeleton: one edge per camera pair sharing at least one
// dynamic track, with n_shared and baseline filled in and zero weights.
CameraGraph covisibility_graph(const std::vector<CameraModel>& cameras,
                               const std::vector<Observation2D>& observations,
                               const std::vector<PointId>& track_ids);

// Fills refined offsets and scores:
//   weight(i,j) = sum_k s_ij |t_ij + t_jk - t_ik| / (n_ij b_ij)
// over third cameras k adjacent to both; a perfectly consistent triplet
// contributes zero, so reliable pairs sort first.
CameraGraph build_camera_graph(const std::vector<CameraModel>& cameras,
                               const std::vector<Observation2D>& observations,
                               const std::vector<PointId>& track_ids,
                               const std::vector<PairwiseResult>& pairwise);

// Node-attachment order of Kruskal's spanning forest over edge weights, ties
// broken by (weight, min id, max id); within one accepted edge the lower id
// attaches first. Deterministic for identical graphs.
std::vector<CameraId> camera_order(const CameraGraph& graph);

struct InsertionTrace {
  CameraId camera = -1;
  int slots_tried = 0;
  int slots_discarded_for_flip = 0;
  double accepted_offset = 0.0;  // accepted beta, frames
  double cost = 0.0;
  bool fallback_pairwise = false;  // every slot flipped; pairwise offset kept
};

struct IraConfig {
  PairwiseConfig pairwise;
  MotionPriorConfig prior = MotionPriorConfig::for_frame_rate(12.0);
  // Insertion trials: offsets + trajectories only. Trials run under the
  // recentering solve, so an offset can walk out of its claimed slot one
  // sample coincidence at a time; a trial whose final interleaving differs
  // from its slot's is discarded.
  SolverConfig trial_solver;
  // Step 4: every spatial parameter released.
  SolverConfig final_solver;
  SolveFlags final_flags;
  bool depth_weights = true;

  IraConfig() {
    trial_solver.max_iterations = 60;
    final_solver.max_iterations = 200;
  }
};

// Cameras processed so far, their current offsets, and the running track
// estimates. Only dynamic observations are carried: static residuals do not
// depend on the offsets, so they are constant during insertion.
struct AlignmentState {
  std::vector<CameraModel> cameras;
  std::vector<Trajectory3D> trajectories;
  std::vector<Observation2D> observations;
  CameraId reference = -1;
  double cost = 0.0;
};

// Tries the new camera in every sub-frame slot between the processed
// cameras, re-optimizing all offsets and trajectories per trial, discarding
// trials whose optimized sub-frame ordering differs from the slot layout,
// and accepting the cheapest survivor. If every trial flips, the pairwise
// offset is kept verbatim and the trace flags the fallback.
InsertionTrace insert_camera(AlignmentState& state, const CameraModel& new_cam,
                             const std::vector<Observation2D>& new_cam_obs,
                             double pairwise_beta, const IraConfig& cfg);

struct IraResult {
  SceneState scene;
  CostReport report;
  std::vector<CameraId> order;
  CameraGraph graph;
  std::vector<PairwiseResult> pairwise;
  std::vector<InsertionTrace> insertions;
  std::vector<StageTiming> timings;
  std::string trace_json;  // per-step machine-readable log
};

// Incremental reconstruction and alignment: pairwise refinement over the
// co-visibility edges, spanning-order prioritization, slot insertion, then
// one full joint solve that releases the spatial parameters.
IraResult run_ira(const SceneState& initial, const std::vector<Observation2D>& observations,
                  const IraConfig& cfg);

}  // namespace stba
