#include "stba/resample.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stba/motion_prior.hpp"
#include "stba/random.hpp"

using namespace stba;

namespace {

Trajectory3D smooth_track(int n, double dt) {
  return oracle::sample_curve(
      [](double t) {
        return Vec3(0.4 * std::sin(2.0 * M_PI * 1.1 * t),
                    0.3 * std::cos(2.0 * M_PI * 0.7 * t), 0.2 * std::sin(2.0 * M_PI * 0.5 * t));
      },
      0.0, (n - 1) * dt, n, 7);
}

}  // namespace

TEST_CASE("constant trajectory keeps only the mean coefficient") {
  const Vec3 p(0.3, -0.2, 0.9);
  const Trajectory3D traj = oracle::sample_curve([&](double) { return p; }, 0.0, 0.55, 12, 7);
  DctResampleConfig cfg;
  cfg.resample_period = 0.05;
  const DctResampleResult result = dct_resample(traj, {}, {}, cfg);
  for (int k = 1; k < result.basis.num_basis(); ++k) {
    CHECK(result.coefficients.row(k).norm() < 1e-9);
  }
  for (const TrajectorySample& s : result.resampled.samples()) {
    CHECK((s.position - p).norm() < 1e-9);
  }
}

TEST_CASE("vanishing smoothing weight interpolates the samples") {
  const double dt = 0.04;
  const Trajectory3D traj = smooth_track(16, dt);
  DctResampleConfig cfg;
  cfg.resample_period = dt;
  cfg.lambda2 = 1e-10;
  const DctResampleResult result = dct_resample(traj, {}, {}, cfg);
  REQUIRE(result.resampled.size() == traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    CHECK((result.resampled.samples()[j].position - traj.samples()[j].position).norm() <
          1e-6);
  }
}

TEST_CASE("full-basis coefficient prior tracks the kinetic cost") {
  const double dt = 1.0 / 60.0;
  const Trajectory3D traj = smooth_track(30, dt);
  DctResampleConfig cfg;
  cfg.resample_period = dt;
  cfg.lambda2 = 1e-8;  // keep the fit faithful so both sides see one curve
  const DctResampleResult result = dct_resample(traj, {}, {}, cfg);

  MotionPriorConfig prior;
  prior.epsilon = 1e-12;
  const double fd = kinetic_cost(result.resampled, prior);
  const double spectral = dct_prior_value(result.basis, result.coefficients);
  CHECK(spectral == doctest::Approx(fd).epsilon(0.01));
}

TEST_CASE("basis count beyond the sample count is rejected") {
  const Trajectory3D traj = smooth_track(5, 0.05);
  DctResampleConfig cfg;
  cfg.resample_period = 0.05;
  cfg.num_basis = 8;
  CHECK_THROWS_AS(dct_resample(traj, {}, {}, cfg), Error);
  try {
    dct_resample(traj, {}, {}, cfg);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::rank_deficient);
  }
}

TEST_CASE("image-term refinement pulls the series onto the observed curve") {
  // One camera with exact detections of an analytic point; the coefficients
  // are seeded from corrupted sample positions, so only the reprojection term
  // can repair the in-image components.
  CameraModel cam;
  cam.id = 0;
  cam.intrinsics.focal_x = 1150.0;
  cam.intrinsics.focal_y = 1150.0;
  cam.intrinsics.principal_x = 960.0;
  cam.intrinsics.principal_y = 540.0;
  cam.intrinsics.image_width = 1920;
  cam.intrinsics.image_height = 1080;
  cam.pose = CameraPose::look_at(Vec3(0.0, 0.3, 3.0), Vec3::Zero(), {0.0, 1.0, 0.0});
  cam.alpha = 30.0;

  auto curve = [](double t) {
    return Vec3(0.35 * std::sin(2.0 * M_PI * 1.3 * t), 0.25 * std::cos(2.0 * M_PI * 0.9 * t),
                0.0);
  };

  Rng rng(37);
  std::vector<TrajectorySample> samples;
  std::vector<Observation2D> observations;
  for (int f = 0; f < 24; ++f) {
    TrajectorySample s;
    s.source_camera = 0;
    s.source_frame = f;
    s.time = cam.observation_time(f, 0.0);
    s.position = curve(s.time) + rng.normal_vec3(0.02);
    samples.push_back(s);

    Observation2D obs;
    obs.camera_id = 0;
    obs.point_id = 7;
    obs.frame = f;
    obs.pixel = project(cam, f, curve(s.time));
    obs.row = obs.pixel.y();
    obs.sigma = 0.5;
    observations.push_back(obs);
  }
  const Trajectory3D traj(7, std::move(samples));

  DctResampleConfig cfg;
  cfg.resample_period = 1.0 / 30.0;
  cfg.num_basis = 12;
  cfg.lambda2 = 1e-4;
  const DctResampleResult seeded = dct_resample(traj, {}, {cam}, cfg);
  const DctResampleResult refined = dct_resample(traj, observations, {cam}, cfg);

  double seeded_err = 0.0, refined_err = 0.0;
  for (const TrajectorySample& s : seeded.resampled.samples()) {
    seeded_err += (project(cam, 0, s.position) -
                   project(cam, 0, curve(s.time)))
                      .norm();
  }
  for (const TrajectorySample& s : refined.resampled.samples()) {
    refined_err += (project(cam, 0, s.position) -
                    project(cam, 0, curve(s.time)))
                       .norm();
  }
  CHECK(refined_err < 0.2 * seeded_err);
}
