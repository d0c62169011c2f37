#pragma once

#include "stba/types.hpp"

namespace stba {

// Axis-angle (Rodrigues) helpers. The vector direction is the rotation axis,
// its norm the angle in radians. All formulas switch to series below a small
// angle threshold so values and Jacobians stay smooth through zero.

Mat3 axis_angle_to_matrix(const Vec3& aa);
Vec3 matrix_to_axis_angle(const Mat3& rot);

Vec3 rotate_axis_angle(const Vec3& aa, const Vec3& x);

// Also fills d(R(aa)·x)/d(aa) and/or d(R(aa)·x)/dx when non-null.
Vec3 rotate_axis_angle(const Vec3& aa, const Vec3& x, Mat3* jac_aa, Mat3* jac_x);

// Wraps the angle into [0, pi], flipping the axis when needed.
Vec3 canonical_axis_angle(const Vec3& aa);

Mat3 skew(const Vec3& v);

}  // namespace stba
