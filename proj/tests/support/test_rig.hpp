#pragma once

// Small synthetic rig shared by solver-level tests: cameras on a circle
// looking at the origin, static points near the center, one analytic dynamic
// point sampled round-robin in capture-time order. Deliberately tiny so
// solves stay fast; the full-scale protocol lives in the harness module.

#include <algorithm>
#include <cmath>
#include <vector>

#include "stba/camera.hpp"
#include "stba/problem.hpp"
#include "stba/random.hpp"
#include "stba/trajectory.hpp"

namespace test_rig {

struct Rig {
  stba::SceneState scene;  // ground truth
  std::vector<stba::Observation2D> observations;
};

inline stba::Vec3 lissajous(double t) {
  return {0.45 * std::sin(2.0 * M_PI * 1.7 * t + 0.3),
          0.35 * std::sin(2.0 * M_PI * 2.3 * t + 1.1),
          0.40 * std::sin(2.0 * M_PI * 1.3 * t + 2.0)};
}

struct RigConfig {
  int n_cameras = 4;
  int n_static = 30;
  int n_frames = 12;
  double fps = 12.0;
  double noise_px = 0.0;
  std::vector<double> betas;  // frame units; defaults to 0.15*c
  unsigned long long seed = 7;
};

inline Rig make_rig(const RigConfig& cfg) {
  stba::Rng rng(cfg.seed);
  Rig rig;

  for (int c = 0; c < cfg.n_cameras; ++c) {
    stba::CameraModel cam;
    cam.id = c;
    cam.intrinsics.focal_x = 1150.0;
    cam.intrinsics.focal_y = 1150.0;
    cam.intrinsics.principal_x = 960.0;
    cam.intrinsics.principal_y = 540.0;
    cam.intrinsics.image_width = 1920;
    cam.intrinsics.image_height = 1080;
    const double angle = 2.0 * M_PI * c / cfg.n_cameras;
    const stba::Vec3 eye(3.0 * std::sin(angle), 0.3, 3.0 * std::cos(angle));
    cam.pose = stba::CameraPose::look_at(eye, stba::Vec3::Zero(), {0.0, 1.0, 0.0});
    cam.alpha = cfg.fps;
    cam.beta = c < static_cast<int>(cfg.betas.size()) ? cfg.betas[c] : 0.15 * c;
    rig.scene.cameras.push_back(cam);
  }

  const double sigma = std::max(cfg.noise_px, 0.5);
  for (int i = 0; i < cfg.n_static; ++i) {
    stba::StaticPoint p;
    p.point_id = 1000 + i;
    p.position = stba::Vec3(rng.uniform(-0.9, 0.9), rng.uniform(-0.6, 0.6),
                            rng.uniform(-0.9, 0.9));
    rig.scene.static_points.push_back(p);
    for (const stba::CameraModel& cam : rig.scene.cameras) {
      stba::Observation2D obs;
      obs.camera_id = cam.id;
      obs.point_id = p.point_id;
      obs.frame = 0;
      obs.pixel = stba::project(cam, 0, p.position) +
                  stba::Vec2(rng.normal(0.0, cfg.noise_px), rng.normal(0.0, cfg.noise_px));
      obs.row = obs.pixel.y();
      obs.sigma = sigma;
      rig.observations.push_back(obs);
    }
  }

  // Dynamic point: every (camera, frame) contributes one sample at its
  // capture time; merged and sorted this is the interleaved trajectory.
  std::vector<stba::TrajectorySample> samples;
  for (const stba::CameraModel& cam : rig.scene.cameras) {
    for (int f = 0; f < cfg.n_frames; ++f) {
      stba::TrajectorySample s;
      s.source_camera = cam.id;
      s.source_frame = f;
      s.source_row = 0.0;
      s.time = cam.observation_time(f, 0.0);
      s.position = lissajous(s.time);
      s.weight = 1.0;
      samples.push_back(s);

      stba::Observation2D obs;
      obs.camera_id = cam.id;
      obs.point_id = 1;
      obs.frame = f;
      obs.pixel = stba::project(cam, f, s.position) +
                  stba::Vec2(rng.normal(0.0, cfg.noise_px), rng.normal(0.0, cfg.noise_px));
      obs.row = obs.pixel.y();
      obs.sigma = sigma;
      rig.observations.push_back(obs);
    }
  }
  rig.scene.trajectories.emplace_back(1, std::move(samples));
  return rig;
}

}  // namespace test_rig
