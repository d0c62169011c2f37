#include "stba/rotation.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace stba {
namespace {

constexpr double kSmallAngle = 1e-6;

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Mat3 axis_angle_to_matrix(const Vec3& aa) {
  const double theta2 = aa.squaredNorm();
  if (theta2 < kSmallAngle * kSmallAngle) {
    return Mat3::Identity() + skew(aa) + 0.5 * skew(aa) * skew(aa);
  }
  const double theta = std::sqrt(theta2);
  const Mat3 k = skew(aa / theta);
  return Mat3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * k * k;
}

Vec3 matrix_to_axis_angle(const Mat3& rot) {
  // Quaternion route avoids the instability of acos near 0 and pi.
  Eigen::Quaterniond q(rot);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double sin_half = q.vec().norm();
  const double cos_half = q.w();
  if (sin_half < 1e-12) return 2.0 * q.vec();
  const double angle = 2.0 * std::atan2(sin_half, cos_half);
  return q.vec() * (angle / sin_half);
}

Vec3 rotate_axis_angle(const Vec3& aa, const Vec3& x) {
  return rotate_axis_angle(aa, x, nullptr, nullptr);
}

Vec3 rotate_axis_angle(const Vec3& aa, const Vec3& x, Mat3* jac_aa, Mat3* jac_x) {
  // R(aa)·x = x + a(theta)·(aa × x) + b(theta)·(aa × (aa × x))
  // with a = sin(theta)/theta, b = (1 - cos(theta))/theta².
  const double theta2 = aa.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a, b;
  double a1, b1;  // a'(theta)/theta and b'(theta)/theta
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
    a1 = -1.0 / 3.0 + theta2 / 30.0;
    b1 = -1.0 / 12.0 + theta2 / 180.0;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    a = s / theta;
    b = (1.0 - c) / theta2;
    a1 = (theta * c - s) / (theta2 * theta);
    b1 = (theta * s - 2.0 * (1.0 - c)) / (theta2 * theta2);
  }

  const Vec3 w = aa.cross(x);
  const Vec3 ww = aa.cross(w);
  const Vec3 rotated = x + a * w + b * ww;

  if (jac_aa != nullptr) {
    // d(rotated)/d(aa) = a1·w·aaᵀ + b1·ww·aaᵀ - a·[x]ₓ - b·([w]ₓ + [aa]ₓ[x]ₓ)
    *jac_aa = a1 * w * aa.transpose() + b1 * ww * aa.transpose() - a * skew(x) -
              b * (skew(w) + skew(aa) * skew(x));
  }
  if (jac_x != nullptr) {
    *jac_x = Mat3::Identity() + a * skew(aa) + b * skew(aa) * skew(aa);
  }
  return rotated;
}

Vec3 canonical_axis_angle(const Vec3& aa) {
  double theta = aa.norm();
  if (theta < 1e-15) return aa;
  Vec3 axis = aa / theta;
  theta = std::fmod(theta, 2.0 * M_PI);
  if (theta < 0.0) theta += 2.0 * M_PI;
  if (theta > M_PI) {
    theta = 2.0 * M_PI - theta;
    axis = -axis;
  }
  return axis * theta;
}

}  // namespace stba
