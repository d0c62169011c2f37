#include "stba/rolling_shutter.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include <json.hpp>

#include "stba/error.hpp"
#include "stba/residuals.hpp"
#include "stba/triangulation.hpp"

namespace stba {

ReadoutEstimate estimate_readout(const CameraModel& camera,
                                 const std::vector<Observation2D>& static_obs,
                                 const ReadoutConfig& cfg) {
  camera.validate();
  require(camera.intrinsics.image_height > 0, ErrorCode::invalid_config,
          "image height bounds the readout speed");
  require(camera.pose_mode == PoseMode::kPerFrame, ErrorCode::insufficient_motion,
          "a camera without per-frame motion cannot expose its readout");

  std::vector<Observation2D> obs;
  for (const Observation2D& o : static_obs) {
    if (o.camera_id == camera.id && camera.has_pose(o.frame)) obs.push_back(o);
  }
  require(obs.size() >= 2, ErrorCode::too_few_samples, "need at least two measurements");

  double row_lo = obs.front().row;
  double row_hi = obs.front().row;
  for (const Observation2D& o : obs) {
    row_lo = std::min(row_lo, o.row);
    row_hi = std::max(row_hi, o.row);
  }
  require(row_hi - row_lo >= cfg.min_row_spread_px, ErrorCode::insufficient_row_spread,
          "rows span " + std::to_string(row_hi - row_lo) + " px");

  double travel = 0.0;
  int steps = 0;
  for (auto it = camera.frame_poses.begin(); it != camera.frame_poses.end(); ++it) {
    const auto next = std::next(it);
    if (next == camera.frame_poses.end()) break;
    if (next->first != it->first + 1) continue;
    travel += (next->second.center() - it->second.center()).norm();
    ++steps;
  }
  require(steps > 0 && travel / steps > cfg.min_anchor_motion_m,
          ErrorCode::insufficient_motion, "consecutive anchors nearly coincide");

  // One world point per feature; consecutive-frame poses generate the row-0
  // anchors the measurement interpolates between.
  std::map<PointId, std::vector<Observation2D>> features;
  for (const Observation2D& o : obs) features[o.point_id].push_back(o);

  ceres::Problem problem;
  double gamma_hi = (1.0 - 1e-9) / camera.intrinsics.image_height;
  double gamma = std::clamp(camera.gamma, 0.0, gamma_hi);
  std::deque<Vec3> points;
  std::vector<double> used_sigma;
  std::set<FrameIndex> used_frames;
  int n_features = 0;
  for (const auto& [id, feature_obs] : features) {
    if (feature_obs.size() < 2) continue;
    Vec3 init;
    try {
      init = triangulate_point({camera}, feature_obs);
    } catch (const Error&) {
      continue;
    }
    points.push_back(init);
    double* x = points.back().data();
    int residuals_added = 0;
    for (const Observation2D& o : feature_obs) {
      RsAnchorCost::Mode mode;
      FrameIndex first = o.frame;
      FrameIndex second = o.frame;
      if (camera.has_pose(o.frame - 1)) {
        mode = RsAnchorCost::Mode::kBackward;
        first = o.frame - 1;
      } else if (camera.has_pose(o.frame + 1)) {
        mode = RsAnchorCost::Mode::kForward;
        second = o.frame + 1;
      } else {
        continue;
      }
      problem.AddResidualBlock(
          new RsWorldAnchorCost(camera.intrinsics_at(o.frame), o.pixel, o.sigma, o.row, mode,
                                camera.pose_at(first), camera.pose_at(second)),
          nullptr, x, &gamma);
      used_sigma.push_back(o.sigma);
      used_frames.insert(o.frame);
      ++residuals_added;
    }
    if (residuals_added == 0) {
      points.pop_back();
      continue;
    }
    ++n_features;
  }
  require(n_features > 0, ErrorCode::insufficient_views,
          "no feature is constrained by two anchor frames");
  problem.SetParameterLowerBound(&gamma, 0, 0.0);
  problem.SetParameterUpperBound(&gamma, 0, gamma_hi);

  ceres::Solver::Options options;
  options.max_num_iterations = cfg.solver.max_iterations;
  options.function_tolerance = cfg.solver.function_tolerance;
  options.parameter_tolerance = cfg.solver.parameter_tolerance;
  options.num_threads = cfg.solver.threads;
  options.linear_solver_type = ceres::DENSE_SCHUR;
  options.logging_type = ceres::SILENT;
  // Eliminate the per-feature world points first, leaving the 1x1 readout
  // system.
  options.linear_solver_ordering = std::make_shared<ceres::ParameterBlockOrdering>();
  for (Vec3& p : points) options.linear_solver_ordering->AddElementToGroup(p.data(), 0);
  options.linear_solver_ordering->AddElementToGroup(&gamma, 1);
  ceres::Solver::Summary summary;
  ceres::Solve(options, &problem, &summary);

  ReadoutEstimate est;
  est.camera_id = camera.id;
  est.gamma = gamma;
  est.n_features = n_features;
  est.n_frames = static_cast<int>(used_frames.size());
  est.converged = summary.termination_type == ceres::CONVERGENCE ||
                  summary.termination_type == ceres::USER_SUCCESS;

  std::vector<double> residuals;
  ceres::Problem::EvaluateOptions eval;
  eval.apply_loss_function = false;
  problem.Evaluate(eval, nullptr, &residuals, nullptr, nullptr);
  double sq = 0.0;
  const std::size_t n_obs = residuals.size() / 2;
  for (std::size_t i = 0; i < n_obs; ++i) {
    const double s = used_sigma[i];
    sq += (residuals[2 * i] * s) * (residuals[2 * i] * s) +
          (residuals[2 * i + 1] * s) * (residuals[2 * i + 1] * s);
  }
  est.residual_rmse_px = n_obs > 0 ? std::sqrt(sq / n_obs) : 0.0;
  return est;
}

std::string readout_report_json(const std::vector<ReadoutEstimate>& estimates) {
  nlohmann::json report = nlohmann::json::array();
  for (const ReadoutEstimate& e : estimates) {
    report.push_back({{"camera_id", e.camera_id},
                      {"gamma", e.gamma},
                      {"residual_rmse", e.residual_rmse_px},
                      {"n_features", e.n_features},
                      {"n_frames", e.n_frames},
                      {"converged", e.converged}});
  }
  return report.dump(2);
}

}  // namespace stba
