#pragma once

#include <string>
#include <vector>

#include "stba/camera.hpp"
#include "stba/problem.hpp"

namespace stba {

struct ReadoutConfig {
  SolverConfig solver;
  // Mean camera travel between consecutive frames below which the readout
  // speed is unobservable (the row term multiplies the anchor displacement).
  double min_anchor_motion_m = 1e-6;
  // Minimum spread (max - min) of observed rows, pixels.
  double min_row_spread_px = 50.0;

  ReadoutConfig() { solver.max_iterations = 100; }
};

struct ReadoutEstimate {
  CameraId camera_id = -1;
  double gamma = 0.0;  // frames/row, in [0, 1/image_height)
  double residual_rmse_px = 0.0;
  int n_features = 0;
  int n_frames = 0;
  bool converged = true;
};

// Recovers one readout speed for a moving camera from its own measurements
// of static features. Each feature's virtual camera-frame positions at the
// row-0 instants of consecutive frames anchor a linear-in-row interpolation;
// the world feature positions (which induce the anchors through the known
// per-frame poses) and gamma are optimized jointly. Eliminating anchors in
// favor of world points is what makes the problem well-posed: per feature,
// free anchors would carry 3 unknowns per frame against 2 equations.
// Throws insufficient_motion / insufficient_row_spread when gamma is
// unobservable.
ReadoutEstimate estimate_readout(const CameraModel& camera,
                                 const std::vector<Observation2D>& static_obs,
                                 const ReadoutConfig& cfg = {});

std::string readout_report_json(const std::vector<ReadoutEstimate>& estimates);

}  // namespace stba
