#include "stba/camera.hpp"

#include <cmath>

#include "stba/rotation.hpp"

namespace stba {

namespace {
constexpr double kMinDepth = 1e-9;
}

void CameraIntrinsics::validate() const {
  require(focal_x > 0.0 && focal_y > 0.0, ErrorCode::invalid_config,
          "focal lengths must be positive");
  require(std::isfinite(skew), ErrorCode::invalid_config, "skew must be finite");
  if (image_width > 0 && image_height > 0) {
    require(principal_x >= 0.0 && principal_x <= image_width && principal_y >= 0.0 &&
                principal_y <= image_height,
            ErrorCode::invalid_config, "principal point outside image bounds");
  }
}

Vec3 CameraPose::apply(const Vec3& p_world) const {
  return rotate_axis_angle(axis_angle, p_world) + translation;
}

Vec3 CameraPose::apply_inverse(const Vec3& p_cam) const {
  return rotate_axis_angle(-axis_angle, p_cam - translation);
}

Vec3 CameraPose::center() const { return rotate_axis_angle(-axis_angle, -translation); }

CameraPose CameraPose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up).normalized();
  Vec3 down = forward.cross(right);
  Mat3 rot;  // rows are the camera axes expressed in world coordinates
  rot.row(0) = right;
  rot.row(1) = down;
  rot.row(2) = forward;
  CameraPose pose;
  pose.axis_angle = matrix_to_axis_angle(rot);
  pose.translation = -(rot * eye);
  return pose;
}

void CameraPose::validate() const {
  require(axis_angle.norm() <= M_PI + 1e-12, ErrorCode::invalid_config,
          "rotation angle exceeds canonical range [0, pi]");
}

bool CameraModel::has_pose(FrameIndex frame) const {
  if (pose_mode == PoseMode::kShared) return true;
  return frame_poses.count(frame) > 0;
}

const CameraPose& CameraModel::pose_at(FrameIndex frame) const {
  if (pose_mode == PoseMode::kShared) return pose;
  auto it = frame_poses.find(frame);
  require(it != frame_poses.end(), ErrorCode::missing_pose,
          "camera " + std::to_string(id) + " has no pose for frame " + std::to_string(frame));
  return it->second;
}

const CameraIntrinsics& CameraModel::intrinsics_at(FrameIndex frame) const {
  auto it = frame_intrinsics.find(frame);
  return it == frame_intrinsics.end() ? intrinsics : it->second;
}

void CameraModel::validate() const {
  require(alpha > 0.0, ErrorCode::invalid_config, "frame rate alpha must be positive");
  intrinsics.validate();
  for (const auto& [frame, k] : frame_intrinsics) {
    (void)frame;
    k.validate();
  }
  require(gamma >= 0.0, ErrorCode::invalid_config, "readout gamma must be non-negative");
  if (intrinsics.image_height > 0) {
    require(gamma * intrinsics.image_height < 1.0, ErrorCode::invalid_config,
            "rolling-shutter readout must finish within one frame period");
  }
}

Vec2 project(const CameraModel& camera, FrameIndex frame, const Vec3& point) {
  const CameraPose& pose = camera.pose_at(frame);
  const Vec3 p_cam = pose.apply(point);
  require(p_cam.z() > kMinDepth, ErrorCode::behind_camera,
          "point at non-positive depth in camera " + std::to_string(camera.id));
  return camera.intrinsics_at(frame).apply({p_cam.x() / p_cam.z(), p_cam.y() / p_cam.z()});
}

Vec2 reprojection_residual(const Observation2D& obs, const CameraModel& camera,
                           const Vec3& point) {
  require(obs.sigma > 0.0, ErrorCode::invalid_config, "observation sigma must be positive");
  return (project(camera, obs.frame, point) - obs.pixel) / obs.sigma;
}

const CameraModel& camera_by_id(const std::vector<CameraModel>& cameras, CameraId id) {
  for (const CameraModel& cam : cameras) {
    if (cam.id == id) return cam;
  }
  fail(ErrorCode::id_mismatch, "no camera with id " + std::to_string(id));
}

}  // namespace stba
