#include "stba/resample.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "stba/error.hpp"
#include "stba/residuals.hpp"

namespace stba {

void DctResampleConfig::validate() const {
  require(num_basis >= 0, ErrorCode::invalid_config, "num_basis must be >= 0");
  require(resample_period > 0.0, ErrorCode::invalid_config, "resample period must be > 0");
  require(lambda1 > 0.0 && lambda2 > 0.0, ErrorCode::invalid_config,
          "lambda weights must be > 0");
}

DctResampleResult dct_resample(const Trajectory3D& traj,
                               const std::vector<Observation2D>& observations,
                               const std::vector<CameraModel>& cameras,
                               const DctResampleConfig& cfg) {
  cfg.validate();
  require(traj.size() >= 2, ErrorCode::too_few_samples, "resampling needs >= 2 samples");
  require(traj.is_sorted(), ErrorCode::invalid_config, "trajectory must be time-sorted");

  const double t0 = traj.samples().front().time;
  const double t_end = traj.samples().back().time;
  const double dt = cfg.resample_period;
  const int grid = std::max(2, static_cast<int>(std::floor((t_end - t0) / dt)) + 1);

  int kb = cfg.num_basis > 0 ? cfg.num_basis
                             : std::min(grid, static_cast<int>(traj.size()));
  require(kb <= static_cast<int>(traj.size()), ErrorCode::rank_deficient,
          "more basis functions than trajectory samples");
  require(kb <= grid, ErrorCode::rank_deficient,
          "more basis functions than resample grid points");
  const DctBasis basis(grid, kb, t0, dt);

  // Position-space seed; the image term then refines it.
  std::vector<double> times;
  std::vector<Vec3> positions;
  std::vector<double> weights;
  times.reserve(traj.size());
  for (const TrajectorySample& s : traj.samples()) {
    times.push_back(s.time);
    positions.push_back(s.position);
    weights.push_back(1.0);
  }
  Eigen::MatrixXd coeffs = dct_fit_positions(basis, times, positions, weights, cfg.lambda2);

  std::vector<const Observation2D*> matching;
  for (const Observation2D& obs : observations) {
    if (obs.point_id == traj.point_id()) matching.push_back(&obs);
  }

  if (!matching.empty()) {
    require(2 * static_cast<int>(matching.size()) + 3 * (kb - 1) >= 3 * kb,
            ErrorCode::rank_deficient,
            "too few observations to constrain the basis");
    // k-major flat layout, matching the cost functions.
    std::vector<double> flat(static_cast<std::size_t>(kb) * 3);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(flat.data(), kb, 3) =
        coeffs;

    ceres::Problem problem;
    const double sqrt_l1 = std::sqrt(cfg.lambda1);
    for (const Observation2D* obs : matching) {
      const CameraModel& cam = camera_by_id(cameras, obs->camera_id);
      require(cam.has_pose(obs->frame), ErrorCode::missing_pose,
              "observation at a frame without a pose");
      const double t = cam.observation_time(*obs);
      problem.AddResidualBlock(
          new DctReprojectionCost(cam.pose_at(obs->frame), cam.intrinsics_at(obs->frame),
                                  obs->pixel, obs->sigma, sqrt_l1, basis.row_at(t)),
          nullptr, flat.data());
    }
    if (kb >= 2) {
      problem.AddResidualBlock(new DctPriorCost(basis, cfg.lambda2), nullptr, flat.data());
    }

    ceres::Solver::Options options;
    options.linear_solver_type = ceres::DENSE_QR;
    options.max_num_iterations = 100;
    options.function_tolerance = 1e-12;
    options.logging_type = ceres::SILENT;
    options.num_threads = 1;
    ceres::Solver::Summary summary;
    ceres::Solve(options, &problem, &summary);

    coeffs = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(
        flat.data(), kb, 3);
  }

  std::vector<TrajectorySample> out;
  out.reserve(grid);
  for (int j = 0; j < grid; ++j) {
    TrajectorySample s;
    s.time = basis.grid_time(j);
    s.position = (basis.row_at(s.time) * coeffs).transpose();
    s.weight = 1.0;
    s.source_camera = -1;
    s.source_frame = j;
    s.source_row = 0.0;
    out.push_back(s);
  }
  return DctResampleResult{basis, std::move(coeffs), Trajectory3D(traj.point_id(), std::move(out))};
}

}  // namespace stba
