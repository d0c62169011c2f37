#include "stba/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>
#include <utility>

#include "stba/residuals.hpp"

namespace stba {
namespace {

constexpr double kMinTranslation = 1e-8;  // below this a camera cannot pin scale

double observation_time_of(const CameraModel& cam, FrameIndex frame, double row) {
  return cam.observation_time(frame, row);
}

}  // namespace

void SolverConfig::validate() const {
  require(max_iterations >= 1, ErrorCode::invalid_config, "max_iterations must be >= 1");
  require(function_tolerance > 0.0, ErrorCode::invalid_config, "function_tolerance <= 0");
  require(parameter_tolerance > 0.0, ErrorCode::invalid_config, "parameter_tolerance <= 0");
  require(huber_delta > 0.0, ErrorCode::invalid_config, "huber_delta <= 0");
  require(prior_weight >= 0.0, ErrorCode::invalid_config, "prior_weight < 0");
  require(threads >= 1, ErrorCode::invalid_config, "threads must be >= 1");
}

Problem::Problem(SceneState scene, std::vector<Observation2D> observations,
                 MotionPriorConfig prior, SolverConfig config, SolveFlags flags)
    : scene_(std::move(scene)),
      observations_(std::move(observations)),
      prior_(prior),
      config_(config),
      flags_(flags) {
  config_.validate();
  prior_.validate();
  require(prior_.kind == PriorKind::kLeastKinetic, ErrorCode::invalid_config,
          "the joint solver consumes the kinetic prior; force/action variants are "
          "evaluation-only");
  require(!scene_.cameras.empty(), ErrorCode::invalid_config, "no cameras");
  for (const CameraModel& cam : scene_.cameras) cam.validate();

  index_scene();
  partition_observations();
  build_parameters();
  add_reprojection_residuals();
  add_prior_residuals();
  require(problem_.NumResidualBlocks() > 0, ErrorCode::empty_problem,
          "no residuals under the given flags");
  apply_gauge();
}

void Problem::index_scene() {
  for (int c = 0; c < static_cast<int>(scene_.cameras.size()); ++c) {
    const bool inserted = camera_index_.emplace(scene_.cameras[c].id, c).second;
    require(inserted, ErrorCode::id_mismatch, "duplicate camera id");
  }
  for (int i = 0; i < static_cast<int>(scene_.static_points.size()); ++i) {
    const bool inserted = static_index_.emplace(scene_.static_points[i].point_id, i).second;
    require(inserted, ErrorCode::id_mismatch, "duplicate static point id");
  }
  for (int n = 0; n < static_cast<int>(scene_.trajectories.size()); ++n) {
    const PointId id = scene_.trajectories[n].point_id();
    require(static_index_.find(id) == static_index_.end(), ErrorCode::id_mismatch,
            "point id is both static and dynamic");
    const bool inserted = traj_index_.emplace(id, n).second;
    require(inserted, ErrorCode::id_mismatch, "duplicate trajectory id");
  }
}

void Problem::partition_observations() {
  // (traj, camera, frame) -> sample index; every dynamic sample must be backed
  // by exactly one observation, and vice versa.
  std::map<std::tuple<int, CameraId, FrameIndex>, int> sample_lookup;
  for (const auto& [id, n] : traj_index_) {
    const Trajectory3D& traj = scene_.trajectories[n];
    require(traj.size() >= 2, ErrorCode::too_few_samples,
            "dynamic trajectory needs at least 2 samples");
    for (int s = 0; s < static_cast<int>(traj.size()); ++s) {
      const TrajectorySample& sample = traj.samples()[s];
      require(camera_index_.count(sample.source_camera) > 0, ErrorCode::id_mismatch,
              "trajectory sample references unknown source camera");
      const bool inserted =
          sample_lookup.emplace(std::make_tuple(n, sample.source_camera, sample.source_frame), s)
              .second;
      require(inserted, ErrorCode::id_mismatch,
              "two samples of one trajectory share a (camera, frame) slot");
    }
  }

  std::set<std::tuple<int, CameraId, FrameIndex>> matched;
  for (int o = 0; o < static_cast<int>(observations_.size()); ++o) {
    const Observation2D& obs = observations_[o];
    require(obs.sigma > 0.0, ErrorCode::invalid_config, "observation sigma must be > 0");
    const auto cam_it = camera_index_.find(obs.camera_id);
    require(cam_it != camera_index_.end(), ErrorCode::id_mismatch,
            "observation references unknown camera");
    const CameraModel& cam = scene_.cameras[cam_it->second];
    require(cam.has_pose(obs.frame), ErrorCode::missing_pose,
            "observation at a frame without a pose");

    if (const auto st = static_index_.find(obs.point_id); st != static_index_.end()) {
      static_obs_.push_back(o);
      obs_sample_.emplace_back(-1, -1);
      continue;
    }
    const auto tr = traj_index_.find(obs.point_id);
    require(tr != traj_index_.end(), ErrorCode::id_mismatch,
            "observation references unknown point id");
    const auto key = std::make_tuple(tr->second, obs.camera_id, obs.frame);
    const auto sample_it = sample_lookup.find(key);
    require(sample_it != sample_lookup.end(), ErrorCode::id_mismatch,
            "dynamic observation has no matching trajectory sample");
    require(matched.insert(key).second, ErrorCode::id_mismatch,
            "duplicate observation for one trajectory sample");
    dynamic_obs_.push_back(o);
    obs_sample_.emplace_back(tr->second, sample_it->second);
  }
  require(matched.size() == sample_lookup.size(), ErrorCode::id_mismatch,
          "trajectory sample without a backing observation");
}

void Problem::build_parameters() {
  const int n_cams = static_cast<int>(scene_.cameras.size());
  camera_pose_blocks_.resize(n_cams);
  camera_shared_pose_.assign(n_cams, -1);
  camera_shared_intrinsics_.assign(n_cams, -1);
  camera_frame_intrinsics_.resize(n_cams);
  beta_.resize(n_cams);
  gamma_.resize(n_cams);

  for (int c = 0; c < n_cams; ++c) {
    const CameraModel& cam = scene_.cameras[c];
    beta_[c] = cam.beta;
    gamma_[c] = cam.gamma;
    if (cam.pose_mode == PoseMode::kShared) {
      pose_storage_.push_back(pose_to_array(cam.pose));
      camera_shared_pose_[c] = static_cast<int>(pose_storage_.size()) - 1;
    } else {
      for (const auto& [frame, pose] : cam.frame_poses) {
        pose_storage_.push_back(pose_to_array(pose));
        camera_pose_blocks_[c][frame] = static_cast<int>(pose_storage_.size()) - 1;
      }
    }
    intrinsics_storage_.push_back(intrinsics_to_array(cam.intrinsics));
    camera_shared_intrinsics_[c] = static_cast<int>(intrinsics_storage_.size()) - 1;
    for (const auto& [frame, k] : cam.frame_intrinsics) {
      intrinsics_storage_.push_back(intrinsics_to_array(k));
      camera_frame_intrinsics_[c][frame] = static_cast<int>(intrinsics_storage_.size()) - 1;
    }
  }

  static_points_.resize(scene_.static_points.size());
  for (std::size_t i = 0; i < scene_.static_points.size(); ++i) {
    const Vec3& p = scene_.static_points[i].position;
    static_points_[i] = {p.x(), p.y(), p.z()};
  }

  samples_.resize(scene_.trajectories.size());
  for (std::size_t n = 0; n < scene_.trajectories.size(); ++n) {
    const auto& samples = scene_.trajectories[n].samples();
    samples_[n].resize(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const Vec3& p = samples[s].position;
      samples_[n][s] = {p.x(), p.y(), p.z()};
    }
  }
}

double* Problem::pose_block(int cam_index, FrameIndex frame) {
  const CameraModel& cam = scene_.cameras[cam_index];
  if (cam.pose_mode == PoseMode::kShared) {
    return pose_storage_[camera_shared_pose_[cam_index]].data();
  }
  const auto it = camera_pose_blocks_[cam_index].find(frame);
  require(it != camera_pose_blocks_[cam_index].end(), ErrorCode::missing_pose,
          "no pose block at frame");
  return pose_storage_[it->second].data();
}

double* Problem::intrinsics_block(int cam_index, FrameIndex frame) {
  const auto& overrides = camera_frame_intrinsics_[cam_index];
  if (const auto it = overrides.find(frame); it != overrides.end()) {
    return intrinsics_storage_[it->second].data();
  }
  return intrinsics_storage_[camera_shared_intrinsics_[cam_index]].data();
}

void Problem::add_reprojection_residuals() {
  const bool static_live = flags_.poses || flags_.intrinsics || flags_.static_points;
  const bool dynamic_live = flags_.poses || flags_.intrinsics || flags_.trajectories;

  auto make_loss = [&](double sigma) -> ceres::LossFunction* {
    if (config_.loss == LossKind::kNone) return nullptr;
    return new ceres::HuberLoss(config_.huber_delta / sigma);
  };

  for (std::size_t idx = 0; idx < observations_.size(); ++idx) {
    const Observation2D& obs = observations_[idx];
    const int c = camera_index_.at(obs.camera_id);
    const auto [traj, sample] = obs_sample_[idx];
    const bool is_static = traj < 0;
    if (is_static && !static_live) continue;
    if (!is_static && !dynamic_live) continue;

    double* point = is_static ? static_points_[static_index_.at(obs.point_id)].data()
                              : samples_[traj][sample].data();
    problem_.AddResidualBlock(new ReprojectionCost(obs.pixel, obs.sigma),
                              make_loss(obs.sigma), pose_block(c, obs.frame), point,
                              intrinsics_block(c, obs.frame));
    num_scalar_residuals_ += 2;
  }
}

void Problem::add_prior_residuals() {
  beta_cell_lo_.assign(scene_.cameras.size(),
                       std::numeric_limits<double>::infinity());
  beta_cell_hi_.assign(scene_.cameras.size(),
                       std::numeric_limits<double>::infinity());
  if (!(flags_.trajectories || flags_.betas || flags_.gammas)) return;

  for (std::size_t n = 0; n < scene_.trajectories.size(); ++n) {
    const auto& samples = scene_.trajectories[n].samples();
    for (std::size_t s = 0; s + 1 < samples.size(); ++s) {
      const TrajectorySample& a = samples[s];
      const TrajectorySample& b = samples[s + 1];
      const int ci = camera_index_.at(a.source_camera);
      const int cj = camera_index_.at(b.source_camera);
      const double scale =
          std::sqrt(config_.prior_weight * a.weight * prior_.mass / 2.0);

      PriorPair pair;
      pair.traj = static_cast<int>(n);
      pair.sample_i = static_cast<int>(s);
      pair.sample_j = static_cast<int>(s + 1);
      pair.scale = scale;
      prior_pairs_.push_back(pair);

      if (ci != cj) {
        // Time decreases in beta, so this pair's gap closes when the earlier
        // camera's beta drops or the later one's rises; the other directions
        // only widen it. Half the gap goes to each side.
        const double gap = std::abs(b.time - a.time);
        beta_cell_lo_[ci] =
            std::min(beta_cell_lo_[ci], 0.5 * gap * scene_.cameras[ci].alpha);
        beta_cell_hi_[cj] =
            std::min(beta_cell_hi_[cj], 0.5 * gap * scene_.cameras[cj].alpha);
      }

      double* xi = samples_[n][s].data();
      double* xj = samples_[n][s + 1].data();
      if (ci == cj) {
        problem_.AddResidualBlock(
            new PriorSameCameraCost(scale, prior_.epsilon, scene_.cameras[ci].alpha,
                                    a.source_frame, a.source_row, b.source_frame,
                                    b.source_row),
            nullptr, xi, xj, &gamma_[ci]);
      } else {
        problem_.AddResidualBlock(
            new PriorCrossCameraCost(scale, prior_.epsilon, scene_.cameras[ci].alpha,
                                     a.source_frame, a.source_row,
                                     scene_.cameras[cj].alpha, b.source_frame,
                                     b.source_row),
            nullptr, xi, xj, &beta_[ci], &beta_[cj], &gamma_[ci], &gamma_[cj]);
      }
      num_scalar_residuals_ += 3;
    }
  }
}

void Problem::apply_gauge() {
  // Flag-driven freezes first.
  for (int c = 0; c < static_cast<int>(scene_.cameras.size()); ++c) {
    const CameraModel& cam = scene_.cameras[c];
    auto freeze_if_present = [&](double* block) {
      if (problem_.HasParameterBlock(block)) problem_.SetParameterBlockConstant(block);
    };
    if (!flags_.poses) {
      if (cam.pose_mode == PoseMode::kShared) {
        freeze_if_present(pose_storage_[camera_shared_pose_[c]].data());
      } else {
        for (const auto& [frame, idx] : camera_pose_blocks_[c]) {
          freeze_if_present(pose_storage_[idx].data());
        }
      }
    }
    if (!flags_.intrinsics) {
      freeze_if_present(intrinsics_storage_[camera_shared_intrinsics_[c]].data());
      for (const auto& [frame, idx] : camera_frame_intrinsics_[c]) {
        freeze_if_present(intrinsics_storage_[idx].data());
      }
    }
    if (!flags_.betas) {
      freeze_if_present(&beta_[c]);
    } else if (config_.offset_order_cell && problem_.HasParameterBlock(&beta_[c])) {
      // The pairing is fixed at assembly, so the claimed sequencing must not
      // change during the solve: once a pair's time gap crosses zero, the
      // prior measures a stale ordering and |dt| inflation drives the motion
      // term toward zero (the coincidence spike at |dt| ~ epsilon is far
      // narrower than any trust-region step, so it never blocks the slide).
      // Each beta therefore stays inside the one-sided cell computed in
      // add_prior_residuals. Re-sequencing is solve_recentering's job, not
      // one assembled solve's.
      const double lo = std::max(beta_cell_lo_[c], 0.0);
      const double hi = std::max(beta_cell_hi_[c], 0.0);
      if (lo + hi < 1e-12) {
        problem_.SetParameterBlockConstant(&beta_[c]);
      } else {
        if (std::isfinite(lo)) problem_.SetParameterLowerBound(&beta_[c], 0, beta_[c] - lo);
        if (std::isfinite(hi)) problem_.SetParameterUpperBound(&beta_[c], 0, beta_[c] + hi);
      }
    }
    if (!flags_.gammas) {
      freeze_if_present(&gamma_[c]);
    } else if (problem_.HasParameterBlock(&gamma_[c])) {
      problem_.SetParameterLowerBound(&gamma_[c], 0, 0.0);
      if (cam.intrinsics.image_height > 0) {
        problem_.SetParameterUpperBound(
            &gamma_[c], 0, (1.0 - 1e-9) / cam.intrinsics.image_height);
      }
    }
  }
  if (!flags_.static_points) {
    for (auto& p : static_points_) {
      if (problem_.HasParameterBlock(p.data())) problem_.SetParameterBlockConstant(p.data());
    }
  }
  if (!flags_.trajectories) {
    for (auto& traj : samples_) {
      for (auto& s : traj) {
        if (problem_.HasParameterBlock(s.data())) problem_.SetParameterBlockConstant(s.data());
      }
    }
  }

  // Reference camera: spatial and temporal origin.
  reference_index_ = 0;
  if (config_.reference_camera >= 0) {
    const auto it = camera_index_.find(config_.reference_camera);
    require(it != camera_index_.end(), ErrorCode::id_mismatch, "unknown reference camera");
    reference_index_ = it->second;
  }
  reference_camera_ = scene_.cameras[reference_index_].id;
  {
    const CameraModel& ref = scene_.cameras[reference_index_];
    auto freeze_if_present = [&](double* block) {
      if (problem_.HasParameterBlock(block)) problem_.SetParameterBlockConstant(block);
    };
    if (ref.pose_mode == PoseMode::kShared) {
      freeze_if_present(pose_storage_[camera_shared_pose_[reference_index_]].data());
    } else {
      for (const auto& [frame, idx] : camera_pose_blocks_[reference_index_]) {
        freeze_if_present(pose_storage_[idx].data());
      }
    }
    freeze_if_present(&beta_[reference_index_]);
  }

  if (!flags_.poses) return;

  // Scale gauge: pin one non-reference camera's translation norm.
  require(scene_.cameras.size() >= 2, ErrorCode::underconstrained_gauge,
          "free poses need at least two cameras to fix scale");
  int scale_index = -1;
  double* scale_block = nullptr;
  auto block_eligible = [&](int c) -> double* {
    const CameraModel& cam = scene_.cameras[c];
    if (cam.pose_mode == PoseMode::kShared) {
      double* block = pose_storage_[camera_shared_pose_[c]].data();
      if (problem_.HasParameterBlock(block) &&
          Vec3(block[3], block[4], block[5]).norm() > kMinTranslation) {
        return block;
      }
      return nullptr;
    }
    for (const auto& [frame, idx] : camera_pose_blocks_[c]) {
      double* block = pose_storage_[idx].data();
      if (problem_.HasParameterBlock(block) &&
          Vec3(block[3], block[4], block[5]).norm() > kMinTranslation) {
        return block;
      }
    }
    return nullptr;
  };
  if (config_.scale_camera >= 0) {
    const auto it = camera_index_.find(config_.scale_camera);
    require(it != camera_index_.end(), ErrorCode::id_mismatch, "unknown scale camera");
    require(it->second != reference_index_, ErrorCode::invalid_config,
            "scale camera must differ from the reference camera");
    scale_block = block_eligible(it->second);
    scale_index = it->second;
  } else {
    for (int c = 0; c < static_cast<int>(scene_.cameras.size()); ++c) {
      if (c == reference_index_) continue;
      if ((scale_block = block_eligible(c)) != nullptr) {
        scale_index = c;
        break;
      }
    }
  }
  require(scale_block != nullptr, ErrorCode::underconstrained_gauge,
          "no camera with nonzero translation can pin the scale");
  (void)scale_index;
  // Axis-angle half stays free; translation half moves on its norm sphere.
  problem_.SetParameterization(
      scale_block,
      new ceres::ProductParameterization(new ceres::IdentityParameterization(3),
                                         new ceres::HomogeneousVectorParameterization(3)));
}

CostReport Problem::solve() {
  ceres::Solver::Options options;
  options.minimizer_type = ceres::TRUST_REGION;
  options.trust_region_strategy_type = ceres::LEVENBERG_MARQUARDT;
  options.max_num_iterations = config_.max_iterations;
  options.function_tolerance = config_.function_tolerance;
  options.parameter_tolerance = config_.parameter_tolerance;
  options.num_threads = config_.threads;
  options.logging_type = config_.verbose ? ceres::PER_MINIMIZER_ITERATION : ceres::SILENT;
  options.minimizer_progress_to_stdout = config_.verbose;

  const bool static_variable = flags_.static_points && !static_obs_.empty();
  const bool other_variable = flags_.poses || flags_.intrinsics || flags_.betas ||
                              flags_.gammas || flags_.trajectories;
  if (static_variable && other_variable) {
    options.linear_solver_type = ceres::SPARSE_SCHUR;
    options.sparse_linear_algebra_library_type = ceres::EIGEN_SPARSE;
    auto ordering = std::make_shared<ceres::ParameterBlockOrdering>();
    std::set<double*> static_set;
    for (auto& p : static_points_) static_set.insert(p.data());
    std::vector<double*> blocks;
    problem_.GetParameterBlocks(&blocks);
    for (double* b : blocks) {
      ordering->AddElementToGroup(b, static_set.count(b) > 0 ? 0 : 1);
    }
    options.linear_solver_ordering = ordering;
  } else {
    options.linear_solver_type = ceres::SPARSE_NORMAL_CHOLESKY;
    options.sparse_linear_algebra_library_type = ceres::EIGEN_SPARSE;
  }

  ceres::Solver::Summary summary;
  ceres::Solve(options, &problem_, &summary);
  push_to_scene();

  CostReport report = evaluate();
  report.iterations = summary.num_successful_steps;
  report.converged = summary.termination_type == ceres::CONVERGENCE ||
                     summary.termination_type == ceres::USER_SUCCESS;
  report.termination = summary.BriefReport();
  for (const auto& it : summary.iterations) {
    if (it.iteration == 0 || it.step_is_successful) {
      report.iteration_costs.push_back(2.0 * it.cost);
    }
  }
  return report;
}

void Problem::push_to_scene() {
  for (int c = 0; c < static_cast<int>(scene_.cameras.size()); ++c) {
    CameraModel& cam = scene_.cameras[c];
    if (cam.pose_mode == PoseMode::kShared) {
      cam.pose = array_to_pose(pose_storage_[camera_shared_pose_[c]].data());
    } else {
      for (auto& [frame, pose] : cam.frame_poses) {
        pose = array_to_pose(pose_storage_[camera_pose_blocks_[c].at(frame)].data());
      }
    }
    array_to_intrinsics(intrinsics_storage_[camera_shared_intrinsics_[c]].data(),
                        cam.intrinsics);
    for (auto& [frame, k] : cam.frame_intrinsics) {
      array_to_intrinsics(intrinsics_storage_[camera_frame_intrinsics_[c].at(frame)].data(),
                          k);
    }
    cam.beta = beta_[c];
    cam.gamma = gamma_[c];
  }
  for (std::size_t i = 0; i < scene_.static_points.size(); ++i) {
    scene_.static_points[i].position =
        Vec3(static_points_[i][0], static_points_[i][1], static_points_[i][2]);
  }
  for (std::size_t n = 0; n < scene_.trajectories.size(); ++n) {
    auto& samples = scene_.trajectories[n].mutable_samples();
    for (std::size_t s = 0; s < samples.size(); ++s) {
      samples[s].position = Vec3(samples_[n][s][0], samples_[n][s][1], samples_[n][s][2]);
      // Refresh times under the updated offsets without re-sorting: the
      // assembly pairing stays aligned with the stored order. Callers re-sort
      // (and re-assemble) when they want the new ordering.
      const CameraModel& cam = scene_.cameras[camera_index_.at(samples[s].source_camera)];
      samples[s].time = observation_time_of(cam, samples[s].source_frame, samples[s].source_row);
    }
  }
}

CostReport Problem::evaluate() const {
  CostReport report;
  std::vector<double> static_sq(scene_.cameras.size(), 0.0);
  std::vector<double> dynamic_sq(scene_.cameras.size(), 0.0);
  std::vector<int> static_n(scene_.cameras.size(), 0);
  std::vector<int> dynamic_n(scene_.cameras.size(), 0);

  for (std::size_t idx = 0; idx < observations_.size(); ++idx) {
    const Observation2D& obs = observations_[idx];
    const int c = camera_index_.at(obs.camera_id);
    const auto [traj, sample] = obs_sample_[idx];
    const Vec3 point = traj < 0
                           ? scene_.static_points[static_index_.at(obs.point_id)].position
                           : scene_.trajectories[traj].samples()[sample].position;
    Vec2 projected;
    try {
      projected = project(scene_.cameras[c], obs.frame, point);
    } catch (const Error&) {
      ++report.invalid_projections;
      continue;
    }
    const double err_sq = (projected - obs.pixel).squaredNorm();
    report.image_cost += err_sq / (obs.sigma * obs.sigma);
    if (traj < 0) {
      static_sq[c] += err_sq;
      ++static_n[c];
    } else {
      dynamic_sq[c] += err_sq;
      ++dynamic_n[c];
    }
  }

  for (const PriorPair& pair : prior_pairs_) {
    const auto& samples = scene_.trajectories[pair.traj].samples();
    const TrajectorySample& a = samples[pair.sample_i];
    const TrajectorySample& b = samples[pair.sample_j];
    const CameraModel& cam_a = scene_.cameras[camera_index_.at(a.source_camera)];
    const CameraModel& cam_b = scene_.cameras[camera_index_.at(b.source_camera)];
    const double ta = observation_time_of(cam_a, a.source_frame, a.source_row);
    const double tb = observation_time_of(cam_b, b.source_frame, b.source_row);
    const double u = std::max(std::abs(tb - ta), 1e-12);
    const double g = std::sqrt(u) / (u + prior_.epsilon);
    report.motion_cost +=
        pair.scale * pair.scale * g * g * (b.position - a.position).squaredNorm();
  }

  report.total = report.image_cost + report.motion_cost;
  for (std::size_t c = 0; c < scene_.cameras.size(); ++c) {
    CameraReprojStats stats;
    stats.camera_id = scene_.cameras[c].id;
    stats.n_static_obs = static_n[c];
    stats.n_dynamic_obs = dynamic_n[c];
    stats.static_rmse_px = static_n[c] > 0 ? std::sqrt(static_sq[c] / static_n[c]) : 0.0;
    stats.dynamic_rmse_px = dynamic_n[c] > 0 ? std::sqrt(dynamic_sq[c] / dynamic_n[c]) : 0.0;
    report.per_camera.push_back(stats);
  }
  return report;
}

namespace {

// Flattened per-trajectory sample interleaving; two states claim the same
// sequencing iff these match. Row included so within-frame order counts.
std::vector<std::tuple<CameraId, FrameIndex, double>> sample_order_key(
    const SceneState& scene) {
  std::vector<std::tuple<CameraId, FrameIndex, double>> key;
  for (const Trajectory3D& t : scene.trajectories) {
    for (const TrajectorySample& s : t.samples()) {
      key.emplace_back(s.source_camera, s.source_frame, s.source_row);
    }
  }
  return key;
}

}  // namespace

RecenteredSolve solve_recentering(SceneState scene, std::vector<Observation2D> observations,
                                  const MotionPriorConfig& prior, const SolverConfig& config,
                                  const SolveFlags& flags) {
  const bool recenter = flags.betas && config.offset_order_cell;
  const auto claimed = sample_order_key(scene);
  // Crossing step: well under any sample gap the alignment search produces,
  // well past the coincidence spike (~1e-4 frames for the default prior).
  const double kCross = 1e-3;
  const double kContactTol = 1e-7;  // frames; bound hits land within ulps

  RecenteredSolve out;
  out.rounds = 0;
  int total_iterations = 0;
  std::vector<double> costs;
  for (;;) {
    std::vector<double> beta0(scene.cameras.size());
    for (std::size_t c = 0; c < scene.cameras.size(); ++c) beta0[c] = scene.cameras[c].beta;

    Problem problem(std::move(scene), observations, prior, config, flags);
    out.report = problem.solve();
    ++out.rounds;
    total_iterations += out.report.iterations;
    costs.insert(costs.end(), out.report.iteration_costs.begin(),
                 out.report.iteration_costs.end());
    scene = problem.scene();
    if (!recenter || out.rounds >= std::max(1, config.order_cell_rounds)) break;

    // An offset pressed against a cell face wants past a sample coincidence.
    // Re-centering alone cannot cross it (the fresh box collapses with the
    // gap), so step just beyond and re-sort; the next round's pairing holds
    // the new ordering and descent either continues or pulls straight back.
    bool stalled = false;
    const std::vector<double>& lo = problem.beta_cell_lo();
    const std::vector<double>& hi = problem.beta_cell_hi();
    for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
      const double step = scene.cameras[c].beta - beta0[c];
      if (std::isfinite(hi[c]) && hi[c] > kContactTol && step >= hi[c] - kContactTol) {
        scene.cameras[c].beta += kCross;
        stalled = true;
      } else if (std::isfinite(lo[c]) && lo[c] > kContactTol &&
                 step <= -(lo[c] - kContactTol)) {
        scene.cameras[c].beta -= kCross;
        stalled = true;
      }
    }
    if (!stalled) break;
    for (Trajectory3D& t : scene.trajectories) t.refresh_times(scene.cameras);
  }
  out.report.iterations = total_iterations;
  out.report.iteration_costs = std::move(costs);
  out.reordered = sample_order_key(scene) != claimed;
  out.scene = std::move(scene);
  return out;
}

TrajectorySolveResult solve_trajectories_only(const std::vector<CameraModel>& cameras,
                                              std::vector<Trajectory3D> tracks,
                                              const std::vector<Observation2D>& observations,
                                              const MotionPriorConfig& prior,
                                              SolverConfig config, bool optimize_betas) {
  std::set<PointId> track_ids;
  for (const Trajectory3D& t : tracks) track_ids.insert(t.point_id());
  std::vector<Observation2D> filtered;
  filtered.reserve(observations.size());
  for (const Observation2D& obs : observations) {
    if (track_ids.count(obs.point_id) > 0) filtered.push_back(obs);
  }

  SolveFlags flags;
  flags.poses = false;
  flags.intrinsics = false;
  flags.betas = optimize_betas;
  flags.gammas = false;
  flags.static_points = false;
  flags.trajectories = true;

  SceneState scene;
  scene.cameras = cameras;
  scene.trajectories = std::move(tracks);

  RecenteredSolve solved =
      solve_recentering(std::move(scene), std::move(filtered), prior, config, flags);
  TrajectorySolveResult result;
  result.report = solved.report;
  result.trajectories = std::move(solved.scene.trajectories);
  result.cameras = std::move(solved.scene.cameras);
  result.reordered = solved.reordered;
  result.ill_conditioned.reserve(result.trajectories.size());
  for (const Trajectory3D& traj : result.trajectories) {
    std::set<CameraId> sources;
    for (const TrajectorySample& s : traj.samples()) sources.insert(s.source_camera);
    result.ill_conditioned.push_back(sources.size() < 2);
  }
  return result;
}

std::vector<Observation2D> observations_in_scene(const SceneState& scene,
                                                 const std::vector<Observation2D>& observations) {
  std::set<PointId> known;
  for (const StaticPoint& p : scene.static_points) known.insert(p.point_id);
  for (const Trajectory3D& t : scene.trajectories) known.insert(t.point_id());
  std::vector<Observation2D> kept;
  kept.reserve(observations.size());
  for (const Observation2D& obs : observations) {
    if (known.count(obs.point_id) > 0) kept.push_back(obs);
  }
  return kept;
}

void assign_depth_weights(std::vector<Trajectory3D>& trajectories,
                          const std::vector<CameraModel>& cameras,
                          const std::vector<Observation2D>& observations) {
  std::map<std::tuple<PointId, CameraId, FrameIndex>, double> sigma_of;
  for (const Observation2D& obs : observations) {
    sigma_of[std::make_tuple(obs.point_id, obs.camera_id, obs.frame)] = obs.sigma;
  }
  for (Trajectory3D& traj : trajectories) {
    for (TrajectorySample& s : traj.mutable_samples()) {
      const auto it =
          sigma_of.find(std::make_tuple(traj.point_id(), s.source_camera, s.source_frame));
      if (it == sigma_of.end()) continue;
      const CameraModel& cam = camera_by_id(cameras, s.source_camera);
      if (!cam.has_pose(s.source_frame)) continue;
      const double depth = cam.pose_at(s.source_frame).apply(s.position).z();
      if (depth <= 0.0) continue;
      const CameraIntrinsics& k = cam.intrinsics_at(s.source_frame);
      const double mu = 0.5 * (k.focal_x + k.focal_y);
      s.weight = sample_weight(it->second, depth, mu);
    }
  }
}

}  // namespace stba
