#include "stba/metrics.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "stba/error.hpp"

namespace stba {
namespace {

double fractional(double frames) {
  const double f = frames - std::floor(frames);
  return f == 1.0 ? 0.0 : f;
}

// Cameras sorted by sub-frame phase, ids breaking exact ties.
std::vector<CameraId> phase_order(const std::vector<std::pair<CameraId, double>>& phases) {
  std::vector<std::pair<CameraId, double>> sorted = phases;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  std::vector<CameraId> order;
  order.reserve(sorted.size());
  for (const auto& [id, phase] : sorted) order.push_back(id);
  return order;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MetricsReport evaluate(const SceneState& solution, const Scenario& scenario,
                       std::vector<StageTiming> timings) {
  require(!solution.cameras.empty(), ErrorCode::empty_problem, "no cameras to evaluate");
  MetricsReport out;
  out.timings = std::move(timings);

  // Offsets relative to the first camera; absolute time origin is gauge.
  const std::vector<CameraModel>& truth_cams = scenario.truth.cameras;
  const CameraModel& sol_ref = solution.cameras.front();
  const CameraModel* true_ref = nullptr;
  std::vector<std::pair<CameraId, double>> sol_phase, true_phase;
  for (const CameraModel& cam : solution.cameras) {
    bool found = false;
    for (const CameraModel& t : truth_cams) {
      if (t.id == cam.id) {
        if (cam.id == sol_ref.id) true_ref = &t;
        found = true;
        break;
      }
    }
    require(found, ErrorCode::id_mismatch,
            "solution camera " + std::to_string(cam.id) + " not in the scenario");
  }
  require(true_ref != nullptr, ErrorCode::id_mismatch, "reference camera missing");
  for (const CameraModel& cam : solution.cameras) {
    const CameraModel& t = camera_by_id(truth_cams, cam.id);
    // Relative offsets in seconds against the reference, reported in this
    // camera's frame units.
    const double est_s = cam.beta / cam.alpha - sol_ref.beta / sol_ref.alpha;
    const double true_s = t.beta / t.alpha - true_ref->beta / true_ref->alpha;
    out.offset_error_frames.push_back(std::abs((est_s - true_s) * cam.alpha));
    sol_phase.emplace_back(cam.id, fractional(est_s * cam.alpha));
    true_phase.emplace_back(cam.id, fractional(true_s * t.alpha));
  }
  out.median_offset_error_frames = median(out.offset_error_frames);
  out.sequencing_correct = phase_order(sol_phase) == phase_order(true_phase);

  // Reprojection against the measurements, raw pixels.
  std::map<PointId, const StaticPoint*> statics;
  for (const StaticPoint& p : solution.static_points) statics[p.point_id] = &p;
  std::map<std::tuple<PointId, CameraId, FrameIndex>, const TrajectorySample*> samples;
  for (const Trajectory3D& traj : solution.trajectories) {
    for (const TrajectorySample& s : traj.samples()) {
      samples[std::make_tuple(traj.point_id(), s.source_camera, s.source_frame)] = &s;
    }
  }
  std::set<PointId> dyn_ids;
  for (const Trajectory3D& t : scenario.truth.trajectories) dyn_ids.insert(t.point_id());

  double stat_sq = 0.0, dyn_sq = 0.0;
  int stat_n = 0, dyn_n = 0;
  for (const Observation2D& obs : scenario.observations) {
    const Vec3* position = nullptr;
    const bool dynamic = dyn_ids.count(obs.point_id) > 0;
    if (dynamic) {
      const auto it = samples.find(std::make_tuple(obs.point_id, obs.camera_id, obs.frame));
      if (it != samples.end()) position = &it->second->position;
    } else {
      const auto it = statics.find(obs.point_id);
      if (it != statics.end()) position = &it->second->position;
    }
    if (position == nullptr) continue;
    const CameraModel& cam = camera_by_id(solution.cameras, obs.camera_id);
    if (cam.pose_at(obs.frame).apply(*position).z() <= 1e-12) {
      ++out.invalid_projections;
      continue;
    }
    const double err2 = (project(cam, obs.frame, *position) - obs.pixel).squaredNorm();
    if (dynamic) {
      dyn_sq += err2;
      ++dyn_n;
    } else {
      stat_sq += err2;
      ++stat_n;
    }
  }
  out.static_rmse_px = stat_n > 0 ? std::sqrt(stat_sq / stat_n) : 0.0;
  out.dynamic_rmse_px = dyn_n > 0 ? std::sqrt(dyn_sq / dyn_n) : 0.0;

  // 3D accuracy up to a similarity transform.
  std::map<std::tuple<PointId, CameraId, FrameIndex>, Vec3> truth_at;
  for (const Trajectory3D& traj : scenario.truth.trajectories) {
    for (const TrajectorySample& s : traj.samples()) {
      truth_at[std::make_tuple(traj.point_id(), s.source_camera, s.source_frame)] = s.position;
    }
  }
  std::vector<Vec3> est, ref;
  for (const auto& [key, sample] : samples) {
    const auto it = truth_at.find(key);
    if (it == truth_at.end()) continue;
    est.push_back(sample->position);
    ref.push_back(it->second);
  }
  out.matched_samples = static_cast<int>(est.size());
  if (est.size() >= 3) {
    Eigen::MatrixXd src(3, est.size()), dst(3, est.size());
    for (std::size_t k = 0; k < est.size(); ++k) {
      src.col(k) = est[k];
      dst.col(k) = ref[k];
    }
    const Eigen::Matrix4d t = Eigen::umeyama(src, dst, true);
    double sq = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k) {
      const Vec3 mapped = t.topLeftCorner<3, 3>() * est[k] + t.topRightCorner<3, 1>();
      sq += (mapped - ref[k]).squaredNorm();
    }
    out.trajectory_rmse_m = std::sqrt(sq / est.size());
  }
  return out;
}

}  // namespace stba
