#pragma once

#include <map>
#include <vector>

#include "stba/error.hpp"
#include "stba/types.hpp"

namespace stba {

struct CameraIntrinsics {
  double focal_x = 1.0;
  double focal_y = 1.0;
  double principal_x = 0.0;
  double principal_y = 0.0;
  double skew = 0.0;
  int image_width = 0;   // 0 = unknown
  int image_height = 0;

  // Pixel from a normalized camera-frame point (x/z, y/z).
  [[nodiscard]] Vec2 apply(const Vec2& normalized) const {
    return {focal_x * normalized.x() + skew * normalized.y() + principal_x,
            focal_y * normalized.y() + principal_y};
  }

  void validate() const;
};

// World-to-camera transform: p_cam = R(axis_angle)·p_world + translation.
struct CameraPose {
  Vec3 axis_angle = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  [[nodiscard]] Vec3 apply(const Vec3& p_world) const;
  [[nodiscard]] Vec3 apply_inverse(const Vec3& p_cam) const;
  [[nodiscard]] Vec3 center() const;  // camera center in world coordinates

  // Looking from `eye` toward `target`, with `up` fixing the roll.
  static CameraPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

  void validate() const;  // rotation angle must be canonical, in [0, pi]
};

struct Observation2D {
  CameraId camera_id = 0;
  PointId point_id = 0;
  FrameIndex frame = 0;
  double row = 0.0;  // rolling-shutter row; equals pixel.y() for real detections
  Vec2 pixel = Vec2::Zero();
  double sigma = 1.0;  // localization scale in pixels
};

struct StaticPoint {
  PointId point_id = 0;
  Vec3 position = Vec3::Zero();
};

enum class PoseMode { kShared, kPerFrame };

// A camera plus its temporal model. Capture time of (frame f, row r) is
//   t = (f - beta - gamma*r) / alpha
// so beta shifts the whole stream later in frame units and gamma*r is the
// rolling-shutter advance of row r within the frame.
struct CameraModel {
  CameraId id = 0;

  CameraIntrinsics intrinsics;
  // Opt-in per-frame intrinsics; falls back to the shared instance.
  std::map<FrameIndex, CameraIntrinsics> frame_intrinsics;

  PoseMode pose_mode = PoseMode::kShared;
  CameraPose pose;  // used in kShared mode
  std::map<FrameIndex, CameraPose> frame_poses;  // used in kPerFrame mode

  double alpha = 30.0;  // frame rate, frames per second; > 0
  double beta = 0.0;    // temporal offset in frame units
  double gamma = 0.0;   // readout speed, frame units per row; gamma*height < 1

  [[nodiscard]] bool has_pose(FrameIndex frame) const;
  [[nodiscard]] const CameraPose& pose_at(FrameIndex frame) const;
  [[nodiscard]] const CameraIntrinsics& intrinsics_at(FrameIndex frame) const;

  [[nodiscard]] double observation_time(FrameIndex frame, double row) const {
    return (static_cast<double>(frame) - beta - gamma * row) / alpha;
  }
  [[nodiscard]] double observation_time(const Observation2D& obs) const {
    return observation_time(obs.frame, obs.row);
  }
  // Continuous frame coordinate of world time t seen at row `row`; inverse of
  // observation_time in the frame argument.
  [[nodiscard]] double frame_coordinate(double t, double row) const {
    return alpha * t + beta + gamma * row;
  }

  void validate() const;
};

// Projects a world point through the camera at `frame`.
// Throws missing_pose / behind_camera.
Vec2 project(const CameraModel& camera, FrameIndex frame, const Vec3& point);

// (projection - observed pixel) / sigma.
Vec2 reprojection_residual(const Observation2D& obs, const CameraModel& camera,
                           const Vec3& point);

// Linear lookup; camera lists stay small. Throws id_mismatch.
const CameraModel& camera_by_id(const std::vector<CameraModel>& cameras, CameraId id);

}  // namespace stba
