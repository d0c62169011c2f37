#pragma once

#include <Eigen/Core>
#include <vector>

#include "stba/camera.hpp"
#include "stba/dct.hpp"
#include "stba/trajectory.hpp"

namespace stba {

struct DctResampleConfig {
  int num_basis = 0;            // 0 = as many as the grid has samples
  double resample_period = 0.0;  // seconds between output samples; > 0
  double lambda1 = 1.0;          // reprojection weight
  double lambda2 = 1.0;          // coefficient-energy weight

  void validate() const;
};

struct DctResampleResult {
  DctBasis basis;
  Eigen::MatrixXd coefficients;  // num_basis x 3
  Trajectory3D resampled;        // uniform grid at resample_period
};

// Refits one trajectory as a truncated cosine series by minimizing
//   lambda1 * sum ||(project(X(t_obs)) - pixel)/sigma||^2
//     + lambda2 * sum_k W_kk ||E_k||^2 dt
// over the coefficients, cameras held fixed, then evaluates the series on the
// uniform grid. Coefficients are seeded from a position-space fit of the
// current samples. Observations not referencing traj's point id are ignored.
DctResampleResult dct_resample(const Trajectory3D& traj,
                               const std::vector<Observation2D>& observations,
                               const std::vector<CameraModel>& cameras,
                               const DctResampleConfig& cfg);

}  // namespace stba
