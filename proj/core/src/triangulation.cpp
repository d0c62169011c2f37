#include "stba/triangulation.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "stba/rotation.hpp"

namespace stba {

namespace {

// Unit viewing ray of an observation in world coordinates.
Vec3 viewing_ray(const CameraModel& cam, const Observation2D& obs) {
  const CameraIntrinsics& k = cam.intrinsics_at(obs.frame);
  const double yn = (obs.pixel.y() - k.principal_y) / k.focal_y;
  const double xn = (obs.pixel.x() - k.principal_x - k.skew * yn) / k.focal_x;
  const CameraPose& pose = cam.pose_at(obs.frame);
  return rotate_axis_angle(-pose.axis_angle, Vec3(xn, yn, 1.0)).normalized();
}

}  // namespace

double max_ray_angle(const std::vector<CameraModel>& cameras,
                     const std::vector<Observation2D>& observations) {
  std::vector<Vec3> rays;
  rays.reserve(observations.size());
  for (const Observation2D& obs : observations) {
    rays.push_back(viewing_ray(camera_by_id(cameras, obs.camera_id), obs));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    for (std::size_t j = i + 1; j < rays.size(); ++j) {
      const double c = std::clamp(rays[i].dot(rays[j]), -1.0, 1.0);
      best = std::max(best, std::acos(c));
    }
  }
  return best;
}

Vec3 triangulate_point(const std::vector<CameraModel>& cameras,
                       const std::vector<Observation2D>& observations,
                       const TriangulationOptions& options) {
  require(observations.size() >= 2, ErrorCode::too_few_samples,
          "triangulation needs at least two observations");
  require(max_ray_angle(cameras, observations) >= options.min_ray_angle,
          ErrorCode::degenerate_geometry, "viewing rays nearly parallel");

  // DLT: for each view, two rows of [x]x * P * X = 0 in homogeneous X.
  Eigen::MatrixXd a(2 * observations.size(), 4);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const Observation2D& obs = observations[i];
    const CameraModel& cam = camera_by_id(cameras, obs.camera_id);
    const CameraIntrinsics& kk = cam.intrinsics_at(obs.frame);
    const CameraPose& pose = cam.pose_at(obs.frame);
    Eigen::Matrix<double, 3, 4> p;
    Mat3 k;
    k << kk.focal_x, kk.skew, kk.principal_x, 0.0, kk.focal_y, kk.principal_y, 0.0, 0.0, 1.0;
    p.leftCols<3>() = axis_angle_to_matrix(pose.axis_angle);
    p.col(3) = pose.translation;
    p = k * p;
    a.row(2 * i) = obs.pixel.x() * p.row(2) - p.row(0);
    a.row(2 * i + 1) = obs.pixel.y() * p.row(2) - p.row(1);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  Eigen::Vector4d h = svd.matrixV().col(3);
  require(std::abs(h(3)) > 1e-14, ErrorCode::degenerate_geometry,
          "triangulated point at infinity");
  Vec3 x = h.head<3>() / h(3);

  // Gauss-Newton on the sigma-scaled reprojection cost.
  for (int it = 0; it < options.refine_iterations; ++it) {
    Mat3 jtj = Mat3::Zero();
    Vec3 jtr = Vec3::Zero();
    bool ok = true;
    for (const Observation2D& obs : observations) {
      const CameraModel& cam = camera_by_id(cameras, obs.camera_id);
      const CameraIntrinsics& k = cam.intrinsics_at(obs.frame);
      const CameraPose& pose = cam.pose_at(obs.frame);
      Mat3 rot_jac;
      const Vec3 p = rotate_axis_angle(pose.axis_angle, x, nullptr, &rot_jac) + pose.translation;
      if (p.z() <= 1e-9) {
        ok = false;
        break;
      }
      const double inv_z = 1.0 / p.z();
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << k.focal_x * inv_z, k.skew * inv_z,
          -(k.focal_x * p.x() + k.skew * p.y()) * inv_z * inv_z, 0.0, k.focal_y * inv_z,
          -k.focal_y * p.y() * inv_z * inv_z;
      const Vec2 proj(k.focal_x * p.x() * inv_z + k.skew * p.y() * inv_z + k.principal_x,
                      k.focal_y * p.y() * inv_z + k.principal_y);
      const Vec2 res = (proj - obs.pixel) / obs.sigma;
      const Eigen::Matrix<double, 2, 3> jac = dproj * rot_jac / obs.sigma;
      jtj += jac.transpose() * jac;
      jtr += jac.transpose() * res;
    }
    if (!ok) break;
    const Vec3 step = (jtj + 1e-12 * Mat3::Identity()).ldlt().solve(jtr);
    x -= step;
    if (step.norm() < 1e-12) break;
  }
  return x;
}

}  // namespace stba
