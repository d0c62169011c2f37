#include "stba/triangulation.hpp"

#include "doctest.h"
#include "stba/error.hpp"
#include "stba/random.hpp"

using namespace stba;

namespace {

std::vector<CameraModel> two_camera_rig() {
  std::vector<CameraModel> cams(2);
  for (int i = 0; i < 2; ++i) {
    cams[i].id = i;
    cams[i].intrinsics.focal_x = 1100.0;
    cams[i].intrinsics.focal_y = 1100.0;
    cams[i].intrinsics.principal_x = 960.0;
    cams[i].intrinsics.principal_y = 540.0;
    cams[i].intrinsics.image_width = 1920;
    cams[i].intrinsics.image_height = 1080;
  }
  cams[0].pose = CameraPose::look_at(Vec3(0, 0, -3), Vec3(0, 0, 0), Vec3(0, 1, 0));
  cams[1].pose = CameraPose::look_at(Vec3(2.5, 0.5, -2.5), Vec3(0, 0, 0), Vec3(0, 1, 0));
  return cams;
}

}  // namespace

TEST_CASE("noise-free triangulation is exact") {
  std::vector<CameraModel> cams = two_camera_rig();
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec3 truth = rng.normal_vec3(0.4);
    std::vector<Observation2D> obs(2);
    for (int c = 0; c < 2; ++c) {
      obs[c].camera_id = c;
      obs[c].frame = 0;
      obs[c].pixel = project(cams[c], 0, truth);
      obs[c].sigma = 1.0;
    }
    const Vec3 est = triangulate_point(cams, obs);
    CHECK((est - truth).norm() == doctest::Approx(0.0).epsilon(1e-8));
  }
}

TEST_CASE("triangulation needs two observations") {
  std::vector<CameraModel> cams = two_camera_rig();
  Observation2D obs;
  obs.camera_id = 0;
  obs.pixel = Vec2(960, 540);
  try {
    triangulate_point(cams, {obs});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::too_few_samples);
  }
}

TEST_CASE("parallel rays are degenerate") {
  // Both observations from the same camera center see the point along the
  // same ray; the angle threshold must reject this.
  std::vector<CameraModel> cams = two_camera_rig();
  cams[1].pose = cams[0].pose;
  const Vec3 truth(0.1, 0.2, 0.0);
  std::vector<Observation2D> obs(2);
  for (int c = 0; c < 2; ++c) {
    obs[c].camera_id = c;
    obs[c].pixel = project(cams[c], 0, truth);
  }
  CHECK(max_ray_angle(cams, obs) < 1e-6);
  try {
    triangulate_point(cams, obs);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_geometry);
  }
}

TEST_CASE("noisy triangulation stays near the truth") {
  std::vector<CameraModel> cams = two_camera_rig();
  Rng rng(37);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const Vec3 truth = rng.normal_vec3(0.4);
    std::vector<Observation2D> obs(2);
    for (int c = 0; c < 2; ++c) {
      obs[c].camera_id = c;
      obs[c].frame = 0;
      obs[c].pixel = project(cams[c], 0, truth) + rng.normal_vec3(1.0).head<2>();
      obs[c].sigma = 1.0;
    }
    worst = std::max(worst, (triangulate_point(cams, obs) - truth).norm());
  }
  // 1 px noise at ~3 m depth with ~1100 px focal is a few millimetres.
  CHECK(worst < 0.05);
}

TEST_CASE("per frame poses participate") {
  std::vector<CameraModel> cams = two_camera_rig();
  cams[1].pose_mode = PoseMode::kPerFrame;
  cams[1].frame_poses[7] = CameraPose::look_at(Vec3(2.5, 0.5, -2.5), Vec3(0, 0, 0), Vec3(0, 1, 0));
  const Vec3 truth(0.2, -0.1, 0.3);
  std::vector<Observation2D> obs(2);
  obs[0].camera_id = 0;
  obs[0].frame = 0;
  obs[0].pixel = project(cams[0], 0, truth);
  obs[1].camera_id = 1;
  obs[1].frame = 7;
  obs[1].pixel = project(cams[1], 7, truth);
  CHECK((triangulate_point(cams, obs) - truth).norm() == doctest::Approx(0.0).epsilon(1e-8));
}
