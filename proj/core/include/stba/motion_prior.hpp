#pragma once

#include <utility>
#include <vector>

#include "stba/trajectory.hpp"
#include "stba/types.hpp"

namespace stba {

enum class PriorKind { kLeastKinetic, kLeastForce, kLeastAction };

struct MotionPriorConfig {
  PriorKind kind = PriorKind::kLeastKinetic;
  double epsilon = 1e-5;  // seconds; guards near-coincident sample times
  double mass = 1.0;      // kg; point particles
  Vec3 gravity = Vec3(0.0, -9.81, 0.0);  // used by least-action only

  // epsilon = 1e-4 of the nominal frame period.
  static MotionPriorConfig for_frame_rate(double fps,
                                          PriorKind kind = PriorKind::kLeastKinetic);

  void validate() const;
};

// Discrete physics costs over a time-sorted trajectory. All three integrate
// their density over the sample spacing, so refining the sampling converges
// to the continuous value.
//
//   kinetic:  sum_i  w_i/2 · ‖dX_i/(dt_i+eps)‖² · dt_i           (pairs i, i+1)
//   force:    sum_i  w_i · ‖m·a_i‖² · (t_{i+1}-t_{i-1})/2        (interior i)
//   action:   sum_i (w_i·m/2 · v_i² - m·g·h_i) · dt_i            (pairs i, i+1)
//
// a_i is the three-point second difference on non-uniform spacing; h_i is the
// height of sample i along the negative gravity direction. Least-action can
// be negative; the sign is meaningful.
double kinetic_cost(const Trajectory3D& traj, const MotionPriorConfig& cfg);
double force_cost(const Trajectory3D& traj, const MotionPriorConfig& cfg);
double action_cost(const Trajectory3D& traj, const MotionPriorConfig& cfg);

// Dispatches on cfg.kind.
double prior_cost(const Trajectory3D& traj, const MotionPriorConfig& cfg);

// Per-sample weight mu·lambda/sigma tying image localization scale sigma,
// point depth lambda, and the pixels-per-unit-length scale mu together.
double sample_weight(double sigma, double depth, double pixel_scale_mu);

// --- two-sequence temporal search on pure 3D samples ---------------------

// Shifts every time of b by `b_time_shift`, merges with a, returns the merged
// time-sorted trajectory.
Trajectory3D interleave_with_offset(const Trajectory3D& a, const Trajectory3D& b,
                                    double b_time_shift);

struct OffsetSearchResult {
  double best_shift = 0.0;
  double best_cost = 0.0;
  std::vector<std::pair<double, double>> curve;  // (shift, cost)
};

// Exhaustive grid search of the prior cost over time shifts of b against a.
OffsetSearchResult offset_search_3d(const Trajectory3D& a, const Trajectory3D& b,
                                    const MotionPriorConfig& cfg, double shift_start,
                                    double shift_stop, double shift_step);

}  // namespace stba
