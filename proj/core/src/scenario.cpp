#include "stba/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stba/error.hpp"
#include "stba/io.hpp"

namespace stba {
namespace {

constexpr double kTau = 6.283185307179586;
constexpr double kGravity = 9.8;

// Reflects u into [-half, half] (elastic wall bounce).
double reflect(double u, double half) {
  if (half <= 0.0) return 0.0;
  const double period = 4.0 * half;
  double s = std::fmod(u + half, period);
  if (s < 0.0) s += period;
  return s <= 2.0 * half ? s - half : 3.0 * half - s;
}

// Cubic Hermite on [0, 1].
double hermite(double p0, double v0, double p1, double v1, double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * v0 +
         (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * v1;
}

}  // namespace

const char* to_string(TrajectoryFamily family) {
  switch (family) {
    case TrajectoryFamily::kLissajous: return "lissajous";
    case TrajectoryFamily::kProjectile: return "projectile";
    case TrajectoryFamily::kJump: return "jump";
    case TrajectoryFamily::kCsv: return "csv";
  }
  return "?";
}

TrajectoryFamily trajectory_family_from_string(const std::string& name) {
  if (name == "lissajous") return TrajectoryFamily::kLissajous;
  if (name == "projectile") return TrajectoryFamily::kProjectile;
  if (name == "jump") return TrajectoryFamily::kJump;
  if (name == "csv") return TrajectoryFamily::kCsv;
  fail(ErrorCode::invalid_config, "unknown trajectory family: " + name);
}

Vec3 AnalyticCurve::at(double t) const {
  switch (family) {
    case TrajectoryFamily::kLissajous: {
      Vec3 p;
      for (int a = 0; a < 3; ++a) {
        p[a] = center[a] + amplitude[a] * std::sin(kTau * frequency_hz[a] * t + phase[a]);
      }
      return p;
    }
    case TrajectoryFamily::kProjectile: {
      // Vertical: segment-wise ballistic flight with floor bounces.
      double y = center.y() + 0.4;
      double vy = launch_velocity.y();
      double remaining = t;
      for (int bounce = 0; bounce < 64; ++bounce) {
        // Landing time of the current arc: y + vy s - g/2 s^2 = floor_y.
        const double disc = vy * vy + 2.0 * kGravity * (y - floor_y);
        const double land = (vy + std::sqrt(std::max(disc, 0.0))) / kGravity;
        if (remaining < land || land < 1e-4) {
          y = y + vy * remaining - 0.5 * kGravity * remaining * remaining;
          break;
        }
        remaining -= land;
        vy = restitution * (kGravity * land - vy);  // upward speed after impact
        y = floor_y;
      }
      const double x = center.x() + reflect(launch_velocity.x() * t, wall_half_extent);
      const double z = center.z() + reflect(launch_velocity.z() * t, wall_half_extent);
      return {x, std::max(y, floor_y), z};
    }
    case TrajectoryFamily::kJump: {
      const double t0 = crouch_end;
      const double t1 = flight_end;
      const double flight = std::max(t1 - t0, 1e-3);
      const double vy = 0.5 * kGravity * flight;  // lands back at crouch depth
      const double low = center.y() - crouch_depth;
      double y;
      if (t <= 0.0) {
        y = center.y();
      } else if (t < t0) {
        y = hermite(center.y(), 0.0, low, vy * t0, t / t0);
      } else if (t < t1) {
        const double tau = t - t0;
        y = low + vy * tau - 0.5 * kGravity * tau * tau;
      } else if (t < t1 + t0) {
        y = hermite(low, -vy * t0, center.y(), 0.0, (t - t1) / t0);
      } else {
        y = center.y();
      }
      const double x = center.x() + reflect(drift_velocity.x() * t, wall_half_extent);
      const double z = center.z() + reflect(drift_velocity.z() * t, wall_half_extent);
      return {x, y, z};
    }
    case TrajectoryFamily::kCsv:
      break;
  }
  fail(ErrorCode::invalid_config, "csv curves are sampled from the file, not evaluated");
}

AnalyticCurve random_curve(TrajectoryFamily family, Rng& rng) {
  require(family != TrajectoryFamily::kCsv, ErrorCode::invalid_config,
          "csv trajectories come from the file");
  AnalyticCurve c;
  c.family = family;
  c.center = {rng.uniform(-0.3, 0.3), rng.uniform(0.9, 1.2), rng.uniform(-0.3, 0.3)};
  switch (family) {
    case TrajectoryFamily::kLissajous:
      for (int a = 0; a < 3; ++a) {
        c.amplitude[a] = rng.uniform(0.25, 0.55);
        c.frequency_hz[a] = rng.uniform(0.9, 2.1);
        c.phase[a] = rng.uniform(0.0, kTau);
      }
      c.amplitude.y() = rng.uniform(0.15, 0.4);
      break;
    case TrajectoryFamily::kProjectile:
      c.launch_velocity = {rng.uniform(-0.7, 0.7), rng.uniform(2.5, 3.5),
                           rng.uniform(-0.7, 0.7)};
      c.restitution = rng.uniform(0.7, 0.85);
      break;
    case TrajectoryFamily::kJump:
      c.crouch_depth = rng.uniform(0.2, 0.3);
      c.crouch_end = rng.uniform(0.4, 0.6);
      c.flight_end = c.crouch_end + rng.uniform(0.5, 0.8);
      c.drift_velocity = {rng.uniform(-0.3, 0.3), 0.0, rng.uniform(-0.3, 0.3)};
      break;
    case TrajectoryFamily::kCsv:
      break;
  }
  return c;
}

void ScenarioConfig::validate() const {
  require(n_cameras >= 2, ErrorCode::invalid_config, "need at least two cameras");
  require(fps > 0.0 && focal_px > 0.0 && rig_radius_m > 0.0, ErrorCode::invalid_config,
          "fps, focal length, and rig radius must be positive");
  require(image_width > 0 && image_height > 0, ErrorCode::invalid_config,
          "image size must be positive");
  require(n_background >= 0 && n_trajectories >= 0 && n_frames >= 2,
          ErrorCode::invalid_config, "counts must be positive");
  require(noise_px_std >= 0.0, ErrorCode::invalid_config, "noise must be nonnegative");
  require(offset_grid > 0.0 && offset_grid <= 0.5, ErrorCode::invalid_config,
          "offset grid must be in (0, 0.5] frames");
  require(offset_range >= offset_grid, ErrorCode::invalid_config,
          "offset range must admit at least one grid step");
  require(gammas.empty() || static_cast<int>(gammas.size()) == n_cameras,
          ErrorCode::invalid_config, "gammas must be empty or one per camera");
  require(static_obs_frames >= 1 && static_obs_frames <= n_frames,
          ErrorCode::invalid_config, "static_obs_frames out of range");
  require(init_offset_spread >= 0.0, ErrorCode::invalid_config,
          "initial offset spread must be nonnegative");
  require(family != TrajectoryFamily::kCsv || !trajectory_csv.empty(),
          ErrorCode::invalid_config, "csv family needs a trajectory path");
}

namespace {

// True offsets on the grid with pairwise-distinct fractional parts, so no two
// cameras ever observe the scene at the same instant. When there are more
// cameras than one frame holds grid slots, the grid is refined by the
// smallest integer factor that fits.
std::vector<double> draw_offsets(const ScenarioConfig& cfg, Rng& rng) {
  const int base_slots = std::max(2, static_cast<int>(std::lround(1.0 / cfg.offset_grid)));
  int refine = 1;
  while (base_slots * refine - 1 < cfg.n_cameras - 1) ++refine;
  const int slots = base_slots * refine;
  const double grid = 1.0 / slots;

  std::vector<int> pool;
  for (int s = 1; s < slots; ++s) pool.push_back(s);
  rng.shuffle(pool);

  const int m_max = std::max(0, static_cast<int>(std::ceil(cfg.offset_range)) - 1);
  std::vector<double> betas(cfg.n_cameras, 0.0);
  for (int c = 1; c < cfg.n_cameras; ++c) {
    const int m = static_cast<int>(rng.index(2 * m_max + 1)) - m_max;
    betas[c] = m + pool[c - 1] * grid;
  }
  return betas;
}

struct CsvCurve {
  std::vector<double> times;
  std::vector<Vec3> positions;

  [[nodiscard]] bool covers(double t) const {
    return !times.empty() && t >= times.front() && t <= times.back();
  }
  [[nodiscard]] Vec3 at(double t) const {
    const auto hi = std::upper_bound(times.begin(), times.end(), t);
    if (hi == times.begin()) return positions.front();
    if (hi == times.end()) return positions.back();
    const std::size_t j = static_cast<std::size_t>(hi - times.begin());
    const double span = times[j] - times[j - 1];
    const double w = span > 0.0 ? (t - times[j - 1]) / span : 0.0;
    return (1.0 - w) * positions[j - 1] + w * positions[j];
  }
};

}  // namespace

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  Rng rng_offsets = root.fork(1);
  Rng rng_static = root.fork(2);
  Rng rng_curves = root.fork(3);
  Rng rng_noise = root.fork(4);
  Rng rng_init = root.fork(5);
  Rng rng_frames = root.fork(6);

  Scenario out;
  out.config = cfg;

  const double w = cfg.image_width;
  const double h = cfg.image_height;
  const Vec3 stage_center{0.0, 1.0, 0.0};

  const std::vector<double> betas = draw_offsets(cfg, rng_offsets);
  for (int c = 0; c < cfg.n_cameras; ++c) {
    CameraModel cam;
    cam.id = c;
    cam.intrinsics.focal_x = cfg.focal_px;
    cam.intrinsics.focal_y = cfg.focal_px;
    cam.intrinsics.principal_x = w / 2.0;
    cam.intrinsics.principal_y = h / 2.0;
    cam.intrinsics.skew = 0.0;
    cam.intrinsics.image_width = cfg.image_width;
    cam.intrinsics.image_height = cfg.image_height;
    const double theta = kTau * c / cfg.n_cameras;
    const Vec3 eye{cfg.rig_radius_m * std::sin(theta), cfg.rig_height_m,
                   cfg.rig_radius_m * std::cos(theta)};
    cam.pose = CameraPose::look_at(eye, stage_center, {0.0, 1.0, 0.0});
    cam.alpha = cfg.fps;
    cam.beta = betas[c];
    cam.gamma = cfg.gammas.empty() ? 0.0 : cfg.gammas[c];
    out.truth.cameras.push_back(cam);
  }

  const double sigma = cfg.noise_px_std > 0.0 ? cfg.noise_px_std : 1.0;
  const auto in_image = [&](const Vec2& px) {
    return px.x() >= 0.0 && px.x() < w && px.y() >= 0.0 && px.y() < h;
  };
  const auto visible = [&](const CameraModel& cam, const Vec3& p, Vec2* px) {
    if (cam.pose.apply(p).z() <= 1e-6) return false;
    *px = project(cam, 0, p);
    return in_image(*px);
  };
  const auto noisy_row = [&](double v) {
    return std::clamp(v, 0.0, h - 1.0);
  };

  // Background points on the far cylinder wall.
  for (int i = 0; i < cfg.n_background; ++i) {
    const double phi = rng_static.uniform(0.0, kTau);
    const double y = rng_static.uniform(cfg.background_height_min_m,
                                        cfg.background_height_max_m);
    StaticPoint p;
    p.point_id = kStaticIdBase + i;
    p.position = {cfg.background_cylinder_radius_m * std::sin(phi), y,
                  cfg.background_cylinder_radius_m * std::cos(phi)};
    out.truth.static_points.push_back(p);
  }

  // Static measurements: a few frames per camera per point; the geometry is
  // frame-invariant, extra frames only average the noise.
  for (const StaticPoint& p : out.truth.static_points) {
    for (const CameraModel& cam : out.truth.cameras) {
      Vec2 px;
      if (!visible(cam, p.position, &px)) continue;
      std::set<FrameIndex> frames;
      while (static_cast<int>(frames.size()) < cfg.static_obs_frames) {
        frames.insert(static_cast<FrameIndex>(rng_frames.index(cfg.n_frames)));
      }
      for (FrameIndex f : frames) {
        Observation2D obs;
        obs.camera_id = cam.id;
        obs.point_id = p.point_id;
        obs.frame = f;
        obs.pixel = px + Vec2(rng_noise.normal(0.0, cfg.noise_px_std),
                              rng_noise.normal(0.0, cfg.noise_px_std));
        obs.row = noisy_row(obs.pixel.y());
        obs.sigma = sigma;
        out.observations.push_back(obs);
      }
    }
  }

  // Dynamic trajectories, sampled at each camera's true capture instants and
  // interleaved in time order.
  std::vector<AnalyticCurve> curves;
  std::vector<CsvCurve> csv_curves;
  int n_traj = cfg.n_trajectories;
  if (cfg.family == TrajectoryFamily::kCsv) {
    const std::vector<Trajectory3D> loaded = import_trajectories_csv(cfg.trajectory_csv);
    require(!loaded.empty(), ErrorCode::io_error, "no trajectories in " + cfg.trajectory_csv);
    n_traj = static_cast<int>(loaded.size());
    for (const Trajectory3D& t : loaded) {
      CsvCurve c;
      for (const TrajectorySample& s : t.samples()) {
        c.times.push_back(s.time);
        c.positions.push_back(s.position);
      }
      csv_curves.push_back(std::move(c));
    }
  } else {
    for (int n = 0; n < n_traj; ++n) curves.push_back(random_curve(cfg.family, rng_curves));
  }

  for (int n = 0; n < n_traj; ++n) {
    std::vector<TrajectorySample> samples;
    for (const CameraModel& cam : out.truth.cameras) {
      for (FrameIndex f = 0; f < cfg.n_frames; ++f) {
        // The capture instant depends on the imaged row when the shutter
        // rolls; a few fixed-point sweeps settle it (gamma·h < 1).
        double row = h / 2.0;
        double t = 0.0;
        Vec3 pos;
        Vec2 px;
        bool ok = true;
        for (int it = 0; it < 4; ++it) {
          t = cam.observation_time(f, row);
          if (cfg.family == TrajectoryFamily::kCsv) {
            if (!csv_curves[n].covers(t)) {
              ok = false;
              break;
            }
            pos = csv_curves[n].at(t);
          } else {
            pos = curves[n].at(t);
          }
          if (!visible(cam, pos, &px)) {
            ok = false;
            break;
          }
          row = std::clamp(px.y(), 0.0, h - 1.0);
          if (cam.gamma == 0.0) break;
        }
        if (!ok) {
          ++out.out_of_view;
          continue;
        }
        Observation2D obs;
        obs.camera_id = cam.id;
        obs.point_id = n + 1;
        obs.frame = f;
        obs.pixel = px + Vec2(rng_noise.normal(0.0, cfg.noise_px_std),
                              rng_noise.normal(0.0, cfg.noise_px_std));
        obs.row = noisy_row(obs.pixel.y());
        obs.sigma = sigma;
        out.observations.push_back(obs);

        TrajectorySample s;
        s.time = t;
        s.position = pos;
        s.weight = 1.0;
        s.source_camera = cam.id;
        s.source_frame = f;
        s.source_row = row;
        samples.push_back(s);
      }
    }
    Trajectory3D traj(n + 1, std::move(samples));
    traj.sort_by_time();
    out.truth.trajectories.push_back(std::move(traj));
  }

  out.initial_betas.assign(cfg.n_cameras, 0.0);
  for (int c = 1; c < cfg.n_cameras; ++c) {
    out.initial_betas[c] =
        betas[c] + rng_init.uniform(-cfg.init_offset_spread, cfg.init_offset_spread);
  }
  return out;
}

std::vector<PointId> dynamic_ids(const SceneState& scene) {
  std::vector<PointId> ids;
  ids.reserve(scene.trajectories.size());
  for (const Trajectory3D& t : scene.trajectories) ids.push_back(t.point_id());
  return ids;
}

}  // namespace stba
