#pragma once

#include <string>
#include <vector>

#include "stba/camera.hpp"
#include "stba/problem.hpp"
#include "stba/random.hpp"
#include "stba/trajectory.hpp"
#include "stba/types.hpp"

namespace stba {

// Analytic stand-ins for captured motion, plus CSV ingestion of external
// trajectories (time,x,y,z[,point_id]).
enum class TrajectoryFamily { kLissajous, kProjectile, kJump, kCsv };

const char* to_string(TrajectoryFamily family);
TrajectoryFamily trajectory_family_from_string(const std::string& name);

// Smooth parametric motion at human scale, centered over the rig origin.
// kLissajous: independent sinusoids per axis. kProjectile: ballistic flight
// with floor bounces and wall reflections inside a box. kJump: crouch,
// launch, flight, landing as a C1 piecewise vertical profile over a slow
// horizontal drift.
struct AnalyticCurve {
  TrajectoryFamily family = TrajectoryFamily::kLissajous;
  Vec3 center{0.0, 1.0, 0.0};
  Vec3 amplitude{0.4, 0.3, 0.4};
  Vec3 frequency_hz{1.3, 1.9, 0.9};
  Vec3 phase{0.0, 1.0, 2.0};
  // projectile
  Vec3 launch_velocity{0.6, 3.0, 0.4};
  double restitution = 0.75;
  double floor_y = 0.2;
  double wall_half_extent = 0.8;
  // jump
  double crouch_depth = 0.25;
  double crouch_end = 0.5;    // seconds
  double flight_end = 1.2;    // seconds; ballistic between the two
  Vec3 drift_velocity{0.25, 0.0, 0.1};

  [[nodiscard]] Vec3 at(double t) const;
};

// Seed-derived curve parameters within the default envelope.
AnalyticCurve random_curve(TrajectoryFamily family, Rng& rng);

struct ScenarioConfig {
  int n_cameras = 10;
  double fps = 12.0;
  int image_width = 1920;
  int image_height = 1080;
  double focal_px = 1150.0;
  double rig_radius_m = 3.0;
  double rig_height_m = 1.2;
  int n_background = 3000;
  double background_cylinder_radius_m = 15.0;
  double background_height_min_m = -3.0;
  double background_height_max_m = 5.0;
  double noise_px_std = 2.0;
  // True offsets are integer multiples of offset_grid (frames) inside
  // (-offset_range, offset_range), with all fractional parts distinct so no
  // two cameras ever sample the scene at the same instant.
  double offset_grid = 0.1;
  double offset_range = 2.0;
  // Per camera readout speed, frames/row; empty means global shutter.
  std::vector<double> gammas;
  TrajectoryFamily family = TrajectoryFamily::kLissajous;
  std::string trajectory_csv;  // consumed when family == kCsv
  int n_trajectories = 3;
  int n_frames = 24;
  // How many frames each background point is measured at, per camera.
  int static_obs_frames = 1;
  // Initial offsets handed to the alignment search: truth plus a uniform
  // perturbation of this half-width (frames). Stands in for a geometry-based
  // first guess.
  double init_offset_spread = 2.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Ground-truth bundle plus the derived noisy measurements. truth holds the
// exact cameras (true offsets), background points, and dynamic trajectories
// sampled at the true capture instants, interleaved across cameras in time
// order.
struct Scenario {
  ScenarioConfig config;
  SceneState truth;
  std::vector<Observation2D> observations;
  std::vector<double> initial_betas;  // frames, reference camera exactly 0
  int out_of_view = 0;                // dynamic samples that missed every check
};

// Background point ids start here; dynamic trajectories count up from 1.
inline constexpr PointId kStaticIdBase = 1000;

Scenario generate_scenario(const ScenarioConfig& cfg);

// Dynamic point ids of a scenario (or any scene), in trajectory order.
std::vector<PointId> dynamic_ids(const SceneState& scene);

}  // namespace stba
