#include "stba/motion_prior.hpp"

#include <cmath>

#include "stba/error.hpp"

namespace stba {

MotionPriorConfig MotionPriorConfig::for_frame_rate(double fps, PriorKind kind) {
  require(fps > 0.0, ErrorCode::invalid_config, "frame rate must be positive");
  MotionPriorConfig cfg;
  cfg.kind = kind;
  cfg.epsilon = 1e-4 / fps;
  return cfg;
}

void MotionPriorConfig::validate() const {
  require(epsilon > 0.0, ErrorCode::invalid_config, "epsilon must be positive");
  require(mass > 0.0, ErrorCode::invalid_config, "mass must be positive");
}

namespace {

void check_sorted(const Trajectory3D& traj) {
  require(traj.is_sorted(), ErrorCode::invalid_config,
          "trajectory samples must be sorted by time");
}

}  // namespace

double kinetic_cost(const Trajectory3D& traj, const MotionPriorConfig& cfg) {
  cfg.validate();
  check_sorted(traj);
  const auto& s = traj.samples();
  double cost = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double dt = s[i + 1].time - s[i].time;
    const double speed2 = (s[i + 1].position - s[i].position).squaredNorm() /
                          ((dt + cfg.epsilon) * (dt + cfg.epsilon));
    cost += 0.5 * s[i].weight * cfg.mass * speed2 * dt;
  }
  return cost;
}

double force_cost(const Trajectory3D& traj, const MotionPriorConfig& cfg) {
  cfg.validate();
  check_sorted(traj);
  const auto& s = traj.samples();
  double cost = 0.0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double dt_prev = s[i].time - s[i - 1].time + cfg.epsilon;
    const double dt_next = s[i + 1].time - s[i].time + cfg.epsilon;
    const Vec3 v_next = (s[i + 1].position - s[i].position) / dt_next;
    const Vec3 v_prev = (s[i].position - s[i - 1].position) / dt_prev;
    const Vec3 accel = 2.0 * (v_next - v_prev) / (dt_prev + dt_next);
    const double span = 0.5 * (s[i + 1].time - s[i - 1].time);
    cost += s[i].weight * (cfg.mass * cfg.mass) * accel.squaredNorm() * span;
  }
  return cost;
}

double action_cost(const Trajectory3D& traj, const MotionPriorConfig& cfg) {
  cfg.validate();
  check_sorted(traj);
  const auto& s = traj.samples();
  const double g = cfg.gravity.norm();
  const Vec3 up = g > 0.0 ? Vec3(-cfg.gravity / g) : Vec3::Zero();
  double cost = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double dt = s[i + 1].time - s[i].time;
    const double speed2 = (s[i + 1].position - s[i].position).squaredNorm() /
                          ((dt + cfg.epsilon) * (dt + cfg.epsilon));
    const double height = s[i].position.dot(up);
    cost += (0.5 * s[i].weight * cfg.mass * speed2 - cfg.mass * g * height) * dt;
  }
  return cost;
}

double prior_cost(const Trajectory3D& traj, const MotionPriorConfig& cfg) {
  switch (cfg.kind) {
    case PriorKind::kLeastKinetic: return kinetic_cost(traj, cfg);
    case PriorKind::kLeastForce: return force_cost(traj, cfg);
    case PriorKind::kLeastAction: return action_cost(traj, cfg);
  }
  fail(ErrorCode::invalid_config, "unknown prior kind");
}

double sample_weight(double sigma, double depth, double pixel_scale_mu) {
  require(sigma > 0.0, ErrorCode::invalid_config, "sigma must be positive");
  require(depth > 0.0, ErrorCode::invalid_config, "depth must be positive");
  require(pixel_scale_mu > 0.0, ErrorCode::invalid_config, "pixel scale must be positive");
  return pixel_scale_mu * depth / sigma;
}

Trajectory3D interleave_with_offset(const Trajectory3D& a, const Trajectory3D& b,
                                    double b_time_shift) {
  std::vector<TrajectorySample> merged;
  merged.reserve(a.size() + b.size());
  merged.insert(merged.end(), a.samples().begin(), a.samples().end());
  for (TrajectorySample s : b.samples()) {
    s.time += b_time_shift;
    merged.push_back(s);
  }
  return Trajectory3D(a.point_id(), std::move(merged));
}

OffsetSearchResult offset_search_3d(const Trajectory3D& a, const Trajectory3D& b,
                                    const MotionPriorConfig& cfg, double shift_start,
                                    double shift_stop, double shift_step) {
  require(shift_step > 0.0, ErrorCode::invalid_config, "shift step must be positive");
  require(shift_stop >= shift_start, ErrorCode::invalid_config, "empty shift range");
  require(a.size() >= 2 && b.size() >= 2, ErrorCode::too_few_samples,
          "offset search needs at least two samples per sequence");
  OffsetSearchResult result;
  const int n = static_cast<int>(std::floor((shift_stop - shift_start) / shift_step + 0.5));
  for (int k = 0; k <= n; ++k) {
    const double shift = shift_start + k * shift_step;
    const double cost = prior_cost(interleave_with_offset(a, b, shift), cfg);
    result.curve.emplace_back(shift, cost);
    if (result.curve.size() == 1 || cost < result.best_cost) {
      result.best_cost = cost;
      result.best_shift = shift;
    }
  }
  return result;
}

}  // namespace stba
