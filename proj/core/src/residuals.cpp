#include "stba/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "stba/rotation.hpp"

namespace stba {
namespace {

constexpr double kMinDepth = 1e-9;
// Coincident observation times would make the kinetic factor singular.
constexpr double kMinTimeGap = 1e-12;

// Pixel from a camera-frame point plus d(pixel)/dp when requested.
bool project_camera_frame(const CameraIntrinsics& k, const Vec3& p, Vec2* pixel,
                          Eigen::Matrix<double, 2, 3>* jac) {
  if (p.z() < kMinDepth) return false;
  const double inv_z = 1.0 / p.z();
  const double xn = p.x() * inv_z;
  const double yn = p.y() * inv_z;
  *pixel = k.apply({xn, yn});
  if (jac != nullptr) {
    (*jac)(0, 0) = k.focal_x * inv_z;
    (*jac)(0, 1) = k.skew * inv_z;
    (*jac)(0, 2) = -(k.focal_x * xn + k.skew * yn) * inv_z;
    (*jac)(1, 0) = 0.0;
    (*jac)(1, 1) = k.focal_y * inv_z;
    (*jac)(1, 2) = -k.focal_y * yn * inv_z;
  }
  return true;
}

// g(u) = sqrt(u) / (u + eps) and its derivative; u = |dt| clamped away from 0.
double kinetic_factor(double u, double eps) { return std::sqrt(u) / (u + eps); }

double kinetic_factor_deriv(double u, double eps) {
  const double s = u + eps;
  return (eps - u) / (2.0 * std::sqrt(u) * s * s);
}

}  // namespace

std::array<double, 6> pose_to_array(const CameraPose& pose) {
  return {pose.axis_angle.x(), pose.axis_angle.y(), pose.axis_angle.z(),
          pose.translation.x(), pose.translation.y(), pose.translation.z()};
}

CameraPose array_to_pose(const double* p) {
  CameraPose pose;
  pose.axis_angle = Vec3(p[0], p[1], p[2]);
  pose.translation = Vec3(p[3], p[4], p[5]);
  return pose;
}

std::array<double, 5> intrinsics_to_array(const CameraIntrinsics& k) {
  return {k.focal_x, k.focal_y, k.principal_x, k.principal_y, k.skew};
}

void array_to_intrinsics(const double* a, CameraIntrinsics& k) {
  k.focal_x = a[0];
  k.focal_y = a[1];
  k.principal_x = a[2];
  k.principal_y = a[3];
  k.skew = a[4];
}

ReprojectionCost::ReprojectionCost(const Vec2& pixel, double sigma)
    : pixel_(pixel), inv_sigma_(1.0 / sigma) {}

bool ReprojectionCost::Evaluate(double const* const* params, double* residuals,
                                double** jacobians) const {
  const Vec3 aa(params[0][0], params[0][1], params[0][2]);
  const Vec3 trans(params[0][3], params[0][4], params[0][5]);
  const Vec3 point(params[1][0], params[1][1], params[1][2]);
  CameraIntrinsics k;
  array_to_intrinsics(params[2], k);

  const bool need_pose = jacobians != nullptr && jacobians[0] != nullptr;
  const bool need_point = jacobians != nullptr && jacobians[1] != nullptr;
  Mat3 jac_aa;
  Mat3 jac_x;
  const Vec3 p = rotate_axis_angle(aa, point, need_pose ? &jac_aa : nullptr,
                                   need_point ? &jac_x : nullptr) +
                 trans;

  Vec2 pixel;
  Eigen::Matrix<double, 2, 3> dpix;
  if (!project_camera_frame(k, p, &pixel, jacobians != nullptr ? &dpix : nullptr)) {
    return false;
  }

  residuals[0] = (pixel.x() - pixel_.x()) * inv_sigma_;
  residuals[1] = (pixel.y() - pixel_.y()) * inv_sigma_;

  if (jacobians == nullptr) return true;
  if (jacobians[0] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 2, 6, Eigen::RowMajor>> j(jacobians[0]);
    j.block<2, 3>(0, 0) = inv_sigma_ * dpix * jac_aa;
    j.block<2, 3>(0, 3) = inv_sigma_ * dpix;
  }
  if (jacobians[1] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 2, 3, Eigen::RowMajor>> j(jacobians[1]);
    j = inv_sigma_ * dpix * jac_x;
  }
  if (jacobians[2] != nullptr) {
    const double inv_z = 1.0 / p.z();
    const double xn = p.x() * inv_z;
    const double yn = p.y() * inv_z;
    Eigen::Map<Eigen::Matrix<double, 2, 5, Eigen::RowMajor>> j(jacobians[2]);
    j.setZero();
    j(0, 0) = xn * inv_sigma_;
    j(0, 2) = inv_sigma_;
    j(0, 4) = yn * inv_sigma_;
    j(1, 1) = yn * inv_sigma_;
    j(1, 3) = inv_sigma_;
  }
  return true;
}

PriorSameCameraCost::PriorSameCameraCost(double scale, double epsilon, double alpha,
                                         double frame_i, double row_i, double frame_j,
                                         double row_j)
    : scale_(scale),
      epsilon_(epsilon),
      alpha_(alpha),
      frame_i_(frame_i),
      row_i_(row_i),
      frame_j_(frame_j),
      row_j_(row_j) {}

bool PriorSameCameraCost::Evaluate(double const* const* params, double* residuals,
                                   double** jacobians) const {
  const Eigen::Map<const Vec3> xi(params[0]);
  const Eigen::Map<const Vec3> xj(params[1]);
  const double gamma = params[2][0];

  const double dt = ((frame_j_ - frame_i_) - gamma * (row_j_ - row_i_)) / alpha_;
  const double sign = dt >= 0.0 ? 1.0 : -1.0;
  const double u = std::max(std::abs(dt), kMinTimeGap);
  const double g = kinetic_factor(u, epsilon_);
  const Vec3 d = xj - xi;

  Eigen::Map<Vec3>{residuals} = (scale_ * g) * d;

  if (jacobians == nullptr) return true;
  const double c = scale_ * g;
  if (jacobians[0] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>{jacobians[0]} =
        -c * Mat3::Identity();
  }
  if (jacobians[1] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>{jacobians[1]} =
        c * Mat3::Identity();
  }
  if (jacobians[2] != nullptr) {
    const double gp = kinetic_factor_deriv(u, epsilon_);
    const double du_dgamma = -sign * (row_j_ - row_i_) / alpha_;
    Eigen::Map<Vec3>{jacobians[2]} = (scale_ * gp * du_dgamma) * d;
  }
  return true;
}

PriorCrossCameraCost::PriorCrossCameraCost(double scale, double epsilon, double alpha_i,
                                           double frame_i, double row_i, double alpha_j,
                                           double frame_j, double row_j)
    : scale_(scale),
      epsilon_(epsilon),
      alpha_i_(alpha_i),
      frame_i_(frame_i),
      row_i_(row_i),
      alpha_j_(alpha_j),
      frame_j_(frame_j),
      row_j_(row_j) {}

bool PriorCrossCameraCost::Evaluate(double const* const* params, double* residuals,
                                    double** jacobians) const {
  const Eigen::Map<const Vec3> xi(params[0]);
  const Eigen::Map<const Vec3> xj(params[1]);
  const double beta_i = params[2][0];
  const double beta_j = params[3][0];
  const double gamma_i = params[4][0];
  const double gamma_j = params[5][0];

  const double ti = (frame_i_ - beta_i - gamma_i * row_i_) / alpha_i_;
  const double tj = (frame_j_ - beta_j - gamma_j * row_j_) / alpha_j_;
  const double dt = tj - ti;
  const double sign = dt >= 0.0 ? 1.0 : -1.0;
  const double u = std::max(std::abs(dt), kMinTimeGap);
  const double g = kinetic_factor(u, epsilon_);
  const Vec3 d = xj - xi;

  Eigen::Map<Vec3>{residuals} = (scale_ * g) * d;

  if (jacobians == nullptr) return true;
  const double c = scale_ * g;
  if (jacobians[0] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>{jacobians[0]} =
        -c * Mat3::Identity();
  }
  if (jacobians[1] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>{jacobians[1]} =
        c * Mat3::Identity();
  }
  const double gp = kinetic_factor_deriv(u, epsilon_);
  const Vec3 dir = (scale_ * gp) * d;
  // u = |tj - ti|; beta enters t with a minus sign, so d(dt)/d(beta_i) = +1/alpha_i.
  if (jacobians[2] != nullptr) {
    Eigen::Map<Vec3>{jacobians[2]} = dir * (sign / alpha_i_);
  }
  if (jacobians[3] != nullptr) {
    Eigen::Map<Vec3>{jacobians[3]} = dir * (-sign / alpha_j_);
  }
  if (jacobians[4] != nullptr) {
    Eigen::Map<Vec3>{jacobians[4]} = dir * (sign * row_i_ / alpha_i_);
  }
  if (jacobians[5] != nullptr) {
    Eigen::Map<Vec3>{jacobians[5]} = dir * (-sign * row_j_ / alpha_j_);
  }
  return true;
}

DctReprojectionCost::DctReprojectionCost(const CameraPose& pose, const CameraIntrinsics& k,
                                         const Vec2& pixel, double sigma,
                                         double sqrt_lambda1, Eigen::RowVectorXd basis_row)
    : rot_(axis_angle_to_matrix(pose.axis_angle)),
      trans_(pose.translation),
      k_(k),
      pixel_(pixel),
      scale_(sqrt_lambda1 / sigma),
      basis_row_(std::move(basis_row)) {
  set_num_residuals(2);
  mutable_parameter_block_sizes()->push_back(3 * static_cast<int>(basis_row_.size()));
}

bool DctReprojectionCost::Evaluate(double const* const* params, double* residuals,
                                   double** jacobians) const {
  const int kb = static_cast<int>(basis_row_.size());
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> coeffs(
      params[0], kb, 3);
  const Vec3 x = (basis_row_ * coeffs).transpose();
  const Vec3 p = rot_ * x + trans_;

  Vec2 pixel;
  Eigen::Matrix<double, 2, 3> dpix;
  if (!project_camera_frame(k_, p, &pixel, jacobians != nullptr ? &dpix : nullptr)) {
    return false;
  }
  residuals[0] = (pixel.x() - pixel_.x()) * scale_;
  residuals[1] = (pixel.y() - pixel_.y()) * scale_;

  if (jacobians != nullptr && jacobians[0] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::RowMajor>> j(jacobians[0], 2,
                                                                            3 * kb);
    const Eigen::Matrix<double, 2, 3> base = scale_ * dpix * rot_;
    for (int k = 0; k < kb; ++k) {
      j.block<2, 3>(0, 3 * k) = base * basis_row_(k);
    }
  }
  return true;
}

DctPriorCost::DctPriorCost(const DctBasis& basis, double lambda2) {
  require(basis.num_basis() >= 2, ErrorCode::invalid_config,
          "spectral prior needs at least one nonzero frequency");
  require(lambda2 >= 0.0, ErrorCode::invalid_config, "negative prior weight");
  const int kb = basis.num_basis();
  scale_.reserve(kb - 1);
  for (int k = 1; k < kb; ++k) {
    scale_.push_back(std::sqrt(lambda2 * basis.prior_weight(k) * basis.dt()));
  }
  set_num_residuals(3 * (kb - 1));
  mutable_parameter_block_sizes()->push_back(3 * kb);
}

bool DctPriorCost::Evaluate(double const* const* params, double* residuals,
                            double** jacobians) const {
  const int nk = static_cast<int>(scale_.size());
  for (int k = 0; k < nk; ++k) {
    const double* ek = params[0] + 3 * (k + 1);
    residuals[3 * k + 0] = scale_[k] * ek[0];
    residuals[3 * k + 1] = scale_[k] * ek[1];
    residuals[3 * k + 2] = scale_[k] * ek[2];
  }
  if (jacobians != nullptr && jacobians[0] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> j(
        jacobians[0], 3 * nk, 3 * (nk + 1));
    j.setZero();
    for (int k = 0; k < nk; ++k) {
      for (int axis = 0; axis < 3; ++axis) {
        j(3 * k + axis, 3 * (k + 1) + axis) = scale_[k];
      }
    }
  }
  return true;
}

RsAnchorCost::RsAnchorCost(const CameraIntrinsics& k, const Vec2& pixel, double sigma,
                           double row, Mode mode)
    : k_(k), pixel_(pixel), inv_sigma_(1.0 / sigma), row_(row), mode_(mode) {}

bool RsAnchorCost::Evaluate(double const* const* params, double* residuals,
                            double** jacobians) const {
  const Eigen::Map<const Vec3> b0(params[0]);
  const Eigen::Map<const Vec3> b1(params[1]);
  const double gamma = params[2][0];

  const double gr = gamma * row_;
  const Vec3 diff = b1 - b0;
  Vec3 y;
  double w0;
  double w1;
  if (mode_ == Mode::kBackward) {
    // Row r of the frame anchored at b1 was read gamma*r of a frame interval
    // before b1, interpolating back toward the previous anchor b0.
    y = b1 - gr * diff;
    w0 = gr;
    w1 = 1.0 - gr;
  } else {
    // First frame has no previous anchor; extrapolate with the forward slope.
    y = b0 - gr * diff;
    w0 = 1.0 + gr;
    w1 = -gr;
  }

  Vec2 pixel;
  Eigen::Matrix<double, 2, 3> dpix;
  if (!project_camera_frame(k_, y, &pixel, jacobians != nullptr ? &dpix : nullptr)) {
    return false;
  }
  residuals[0] = (pixel.x() - pixel_.x()) * inv_sigma_;
  residuals[1] = (pixel.y() - pixel_.y()) * inv_sigma_;

  if (jacobians == nullptr) return true;
  if (jacobians[0] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 2, 3, Eigen::RowMajor>>{jacobians[0]} =
        (inv_sigma_ * w0) * dpix;
  }
  if (jacobians[1] != nullptr) {
    Eigen::Map<Eigen::Matrix<double, 2, 3, Eigen::RowMajor>>{jacobians[1]} =
        (inv_sigma_ * w1) * dpix;
  }
  if (jacobians[2] != nullptr) {
    Eigen::Map<Vec2>{jacobians[2]} = inv_sigma_ * dpix * (-row_ * diff);
  }
  return true;
}

RsWorldAnchorCost::RsWorldAnchorCost(const CameraIntrinsics& k, const Vec2& pixel,
                                     double sigma, double row, RsAnchorCost::Mode mode,
                                     const CameraPose& first_pose,
                                     const CameraPose& second_pose)
    : inner_(k, pixel, sigma, row, mode),
      rot_first_(axis_angle_to_matrix(first_pose.axis_angle)),
      rot_second_(axis_angle_to_matrix(second_pose.axis_angle)),
      trans_first_(first_pose.translation),
      trans_second_(second_pose.translation) {}

bool RsWorldAnchorCost::Evaluate(double const* const* params, double* residuals,
                                 double** jacobians) const {
  const Eigen::Map<const Vec3> x(params[0]);
  const Vec3 a_first = rot_first_ * x + trans_first_;
  const Vec3 a_second = rot_second_ * x + trans_second_;
  const double* inner_params[3] = {a_first.data(), a_second.data(), params[1]};

  if (jacobians == nullptr) return inner_.Evaluate(inner_params, residuals, nullptr);

  using Jac23 = Eigen::Matrix<double, 2, 3, Eigen::RowMajor>;
  Jac23 j_first, j_second;
  double* inner_jacs[3] = {jacobians[0] != nullptr ? j_first.data() : nullptr,
                           jacobians[0] != nullptr ? j_second.data() : nullptr,
                           jacobians[1]};
  if (!inner_.Evaluate(inner_params, residuals, inner_jacs)) return false;
  if (jacobians[0] != nullptr) {
    // Chain through both anchors: dr/dX = dr/da1·R1 + dr/da2·R2.
    Eigen::Map<Jac23>{jacobians[0]} = j_first * rot_first_ + j_second * rot_second_;
  }
  return true;
}

BoneLengthCost::BoneLengthCost(double sigma) : inv_sigma_(1.0 / sigma) {}

bool BoneLengthCost::Evaluate(double const* const* params, double* residuals,
                              double** jacobians) const {
  const Eigen::Map<const Vec3> a(params[0]);
  const Eigen::Map<const Vec3> b(params[1]);
  const double mean_length = params[2][0];

  const Vec3 d = a - b;
  const double n = std::max(d.norm(), 1e-12);
  residuals[0] = (n - mean_length) * inv_sigma_;

  if (jacobians == nullptr) return true;
  const Vec3 dn = (inv_sigma_ / n) * d;
  if (jacobians[0] != nullptr) Eigen::Map<Vec3>{jacobians[0]} = dn;
  if (jacobians[1] != nullptr) Eigen::Map<Vec3>{jacobians[1]} = -dn;
  if (jacobians[2] != nullptr) jacobians[2][0] = -inv_sigma_;
  return true;
}

BoneSymmetryCost::BoneSymmetryCost(double sigma) : inv_sigma_(1.0 / sigma) {}

bool BoneSymmetryCost::Evaluate(double const* const* params, double* residuals,
                                double** jacobians) const {
  const Eigen::Map<const Vec3> a1(params[0]);
  const Eigen::Map<const Vec3> a2(params[1]);
  const Eigen::Map<const Vec3> b1(params[2]);
  const Eigen::Map<const Vec3> b2(params[3]);

  const Vec3 da = a1 - a2;
  const Vec3 db = b1 - b2;
  const double na = std::max(da.norm(), 1e-12);
  const double nb = std::max(db.norm(), 1e-12);
  residuals[0] = (na - nb) * inv_sigma_;

  if (jacobians == nullptr) return true;
  const Vec3 ga = (inv_sigma_ / na) * da;
  const Vec3 gb = (inv_sigma_ / nb) * db;
  if (jacobians[0] != nullptr) Eigen::Map<Vec3>{jacobians[0]} = ga;
  if (jacobians[1] != nullptr) Eigen::Map<Vec3>{jacobians[1]} = -ga;
  if (jacobians[2] != nullptr) Eigen::Map<Vec3>{jacobians[2]} = -gb;
  if (jacobians[3] != nullptr) Eigen::Map<Vec3>{jacobians[3]} = gb;
  return true;
}

}  // namespace stba
