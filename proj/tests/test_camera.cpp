#include "stba/camera.hpp"

#include "doctest.h"
#include "stba/error.hpp"

using namespace stba;

namespace {

CameraModel make_simple_camera() {
  CameraModel cam;
  cam.id = 0;
  cam.intrinsics.focal_x = 1000.0;
  cam.intrinsics.focal_y = 1000.0;
  cam.intrinsics.principal_x = 960.0;
  cam.intrinsics.principal_y = 540.0;
  cam.intrinsics.image_width = 1920;
  cam.intrinsics.image_height = 1080;
  return cam;
}

}  // namespace

TEST_CASE("pinhole projection at identity pose") {
  CameraModel cam = make_simple_camera();
  // Hand arithmetic: on-axis point lands on the principal point; one meter of
  // lateral offset at 5 m depth moves 1000 * (1/5) = 200 px.
  Vec2 center = project(cam, 0, Vec3(0, 0, 5));
  CHECK(center.x() == doctest::Approx(960.0).epsilon(1e-12));
  CHECK(center.y() == doctest::Approx(540.0).epsilon(1e-12));
  Vec2 offset = project(cam, 0, Vec3(1, 0, 5));
  CHECK(offset.x() == doctest::Approx(1160.0).epsilon(1e-12));
  CHECK(offset.y() == doctest::Approx(540.0).epsilon(1e-12));
}

TEST_CASE("projection rejects points behind the camera") {
  CameraModel cam = make_simple_camera();
  CHECK_THROWS_AS(project(cam, 0, Vec3(0, 0, -5)), Error);
  try {
    project(cam, 0, Vec3(0, 0, 0));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::behind_camera);
  }
}

TEST_CASE("observation time model") {
  CameraModel cam = make_simple_camera();
  cam.alpha = 30.0;
  cam.beta = 0.45;
  cam.gamma = 0.0;
  // (10 - 0.45) / 30 s
  CHECK(cam.observation_time(10, 0.0) == doctest::Approx((10.0 - 0.45) / 30.0).epsilon(1e-15));

  SUBCASE("frame_coordinate inverts observation_time") {
    cam.gamma = 1e-4;
    for (int frame : {0, 3, 17}) {
      for (double row : {0.0, 250.0, 1079.0}) {
        const double t = cam.observation_time(frame, row);
        CHECK(cam.frame_coordinate(t, row) == doctest::Approx(double(frame)).epsilon(1e-12));
      }
    }
  }

  SUBCASE("larger rows are exposed earlier in absolute time") {
    cam.gamma = 1e-4;
    CHECK(cam.observation_time(10, 500.0) < cam.observation_time(10, 0.0));
  }

  SUBCASE("beta shifts capture earlier in time as it grows") {
    CameraModel later = cam;
    later.beta = cam.beta + 0.5;
    CHECK(later.observation_time(10, 0.0) < cam.observation_time(10, 0.0));
  }
}

TEST_CASE("reprojection residual is sigma scaled") {
  CameraModel cam = make_simple_camera();
  Observation2D obs;
  obs.camera_id = 0;
  obs.frame = 0;
  obs.pixel = Vec2(1160.0, 540.0);
  obs.sigma = 2.0;
  Vec2 exact = reprojection_residual(obs, cam, Vec3(1, 0, 5));
  CHECK(exact.norm() == doctest::Approx(0.0).epsilon(1e-12));

  obs.pixel = Vec2(1150.0, 540.0);  // 10 px off, sigma 2 -> residual 5
  Vec2 shifted = reprojection_residual(obs, cam, Vec3(1, 0, 5));
  CHECK(shifted.x() == doctest::Approx(5.0).epsilon(1e-12));

  obs.sigma = 0.0;
  CHECK_THROWS_AS(reprojection_residual(obs, cam, Vec3(1, 0, 5)), Error);
}

TEST_CASE("pose transforms round trip") {
  CameraPose pose;
  pose.axis_angle = Vec3(0.3, -0.2, 0.9);
  pose.translation = Vec3(1.0, -2.0, 0.5);
  const Vec3 p(0.4, 1.7, -3.1);
  CHECK((pose.apply_inverse(pose.apply(p)) - p).norm() == doctest::Approx(0.0).epsilon(1e-12));
  // The center maps to the camera origin.
  CHECK(pose.apply(pose.center()).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("look_at points the optical axis at the target") {
  const Vec3 eye(3.0, 1.0, -2.0);
  const Vec3 target(0.0, 0.5, 0.0);
  CameraPose pose = CameraPose::look_at(eye, target, Vec3(0, 1, 0));
  CHECK((pose.center() - eye).norm() == doctest::Approx(0.0).epsilon(1e-9));
  const Vec3 cam_target = pose.apply(target);
  CHECK(cam_target.x() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cam_target.y() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cam_target.z() > 0.0);
}

TEST_CASE("per frame pose mode") {
  CameraModel cam = make_simple_camera();
  cam.pose_mode = PoseMode::kPerFrame;
  cam.frame_poses[2] = CameraPose{};
  CHECK(cam.has_pose(2));
  CHECK(!cam.has_pose(3));
  try {
    project(cam, 3, Vec3(0, 0, 5));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_pose);
  }
}

TEST_CASE("per frame intrinsics fall back to shared") {
  CameraModel cam = make_simple_camera();
  CameraIntrinsics zoomed = cam.intrinsics;
  zoomed.focal_x = zoomed.focal_y = 2000.0;
  cam.frame_intrinsics[5] = zoomed;
  CHECK(cam.intrinsics_at(0).focal_x == doctest::Approx(1000.0));
  CHECK(cam.intrinsics_at(5).focal_x == doctest::Approx(2000.0));
  Vec2 wide = project(cam, 0, Vec3(1, 0, 5));
  Vec2 tele = project(cam, 5, Vec3(1, 0, 5));
  CHECK(tele.x() - 960.0 == doctest::Approx(2.0 * (wide.x() - 960.0)).epsilon(1e-12));
}

TEST_CASE("model validation") {
  CameraModel cam = make_simple_camera();
  CHECK_NOTHROW(cam.validate());

  SUBCASE("principal point outside bounds") {
    cam.intrinsics.principal_x = 5000.0;
    CHECK_THROWS_AS(cam.validate(), Error);
  }
  SUBCASE("non-positive focal") {
    cam.intrinsics.focal_x = 0.0;
    CHECK_THROWS_AS(cam.validate(), Error);
  }
  SUBCASE("readout longer than the frame period") {
    cam.gamma = 1.1 / 1080.0;
    CHECK_THROWS_AS(cam.validate(), Error);
  }
  SUBCASE("readout within the frame period passes") {
    cam.gamma = 0.9 / 1080.0;
    CHECK_NOTHROW(cam.validate());
  }
  SUBCASE("non-positive frame rate") {
    cam.alpha = 0.0;
    CHECK_THROWS_AS(cam.validate(), Error);
  }
  SUBCASE("rotation outside the canonical range") {
    CameraPose pose;
    pose.axis_angle = Vec3(4.0, 0.0, 0.0);  // angle 4 > pi
    CHECK_THROWS_AS(pose.validate(), Error);
  }
}
