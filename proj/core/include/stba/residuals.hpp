#pragma once

#include <ceres/ceres.h>

#include <array>

#include "stba/camera.hpp"
#include "stba/dct.hpp"
#include "stba/types.hpp"

namespace stba {

// All cost functions carry hand-derived analytic Jacobians; no automatic
// differentiation anywhere. Parameter block layouts:
//   pose block:        [axis_angle(3), translation(3)]
//   intrinsics block:  [focal_x, focal_y, principal_x, principal_y, skew]
//   point/sample:      [x, y, z]
//   beta, gamma:       scalars

std::array<double, 6> pose_to_array(const CameraPose& pose);
CameraPose array_to_pose(const double* p);
std::array<double, 5> intrinsics_to_array(const CameraIntrinsics& k);
void array_to_intrinsics(const double* a, CameraIntrinsics& k);

// (projection(pose, k, point) - pixel) / sigma. Blocks: pose, point,
// intrinsics. Returns false when the point reaches non-positive depth, which
// makes the trust region reject the step.
class ReprojectionCost : public ceres::SizedCostFunction<2, 6, 3, 5> {
 public:
  ReprojectionCost(const Vec2& pixel, double sigma);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  Vec2 pixel_;
  double inv_sigma_;
};

// Motion-prior residual between consecutive trajectory samples i, j of one
// trajectory, both observed by the same camera:
//   r = scale · sqrt(|dt|) / (|dt| + eps) · (Xj - Xi),
//   dt = ((fj - fi) - gamma·(rj - ri)) / alpha.
// scale² = lambda_m · w · m / 2, so ‖r‖² is exactly the discrete kinetic
// summand of the pair scaled by lambda_m. beta cancels within one camera and
// is not a parameter here. Blocks: Xi, Xj, gamma.
class PriorSameCameraCost : public ceres::SizedCostFunction<3, 3, 3, 1> {
 public:
  PriorSameCameraCost(double scale, double epsilon, double alpha, double frame_i,
                      double row_i, double frame_j, double row_j);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  double scale_, epsilon_, alpha_;
  double frame_i_, row_i_, frame_j_, row_j_;
};

// Same residual with the samples coming from two different cameras, so both
// betas and both gammas are parameters:
//   t_i = (f_i - beta_i - gamma_i·r_i) / alpha_i   (same for j), dt = t_j - t_i.
// Blocks: Xi, Xj, beta_i, beta_j, gamma_i, gamma_j.
class PriorCrossCameraCost : public ceres::SizedCostFunction<3, 3, 3, 1, 1, 1, 1> {
 public:
  PriorCrossCameraCost(double scale, double epsilon, double alpha_i, double frame_i,
                       double row_i, double alpha_j, double frame_j, double row_j);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  double scale_, epsilon_;
  double alpha_i_, frame_i_, row_i_;
  double alpha_j_, frame_j_, row_j_;
};

// Reprojection of a cosine-resampled trajectory at a fixed camera and fixed
// observation time: X(t) = sum_k phi_k(t)·E_k. The single parameter block is
// the stacked coefficient matrix [E_0, E_1, ...] (xyz fastest). The camera is
// held fixed by construction (resampling refines only the trajectory).
class DctReprojectionCost : public ceres::CostFunction {
 public:
  DctReprojectionCost(const CameraPose& pose, const CameraIntrinsics& k,
                      const Vec2& pixel, double sigma, double sqrt_lambda1,
                      Eigen::RowVectorXd basis_row);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  Mat3 rot_;
  Vec3 trans_;
  CameraIntrinsics k_;
  Vec2 pixel_;
  double scale_;  // sqrt(lambda1) / sigma
  Eigen::RowVectorXd basis_row_;
};

// Coefficient-domain prior sum_{k>=1} lambda2·W_kk·dt·‖E_k‖². One residual
// triple per nonzero frequency: r_k = sqrt(lambda2·W_kk·dt)·E_k.
class DctPriorCost : public ceres::CostFunction {
 public:
  DctPriorCost(const DctBasis& basis, double lambda2);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  std::vector<double> scale_;  // per k >= 1
};

// Rolling-shutter anchor interpolation, camera-frame formulation. The scene
// point observed in frame f at row r sits on the segment between consecutive
// row-0 anchors:
//   backward:  Y = cur - gamma·row·(cur - prev)     (normal frames)
//   forward:   Y = cur - gamma·row·(next - cur)     (first frame, same slope
//                                                    under constant velocity)
// and projects through the intrinsics alone. Blocks: first anchor, second
// anchor, gamma. For kBackward the blocks are (prev, cur); for kForward
// (cur, next).
class RsAnchorCost : public ceres::SizedCostFunction<2, 3, 3, 1> {
 public:
  enum class Mode { kBackward, kForward };
  RsAnchorCost(const CameraIntrinsics& k, const Vec2& pixel, double sigma, double row,
               Mode mode);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  CameraIntrinsics k_;
  Vec2 pixel_;
  double inv_sigma_;
  double row_;
  Mode mode_;
};

// RsAnchorCost with the anchors generated from one static world point
// through two fixed world-to-camera poses: a_k = R_k·X + t_k. Free per-frame
// anchors would be underdetermined (3 unknowns per frame against 2 equations
// per observation, for any gamma); tying them to a single world point
// restores identifiability with 3 unknowns per feature. Poses follow the
// inner block order: (prev, cur) for kBackward, (cur, next) for kForward.
// Blocks: world point, gamma.
class RsWorldAnchorCost : public ceres::SizedCostFunction<2, 3, 1> {
 public:
  RsWorldAnchorCost(const CameraIntrinsics& k, const Vec2& pixel, double sigma, double row,
                    RsAnchorCost::Mode mode, const CameraPose& first_pose,
                    const CameraPose& second_pose);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  RsAnchorCost inner_;
  Mat3 rot_first_, rot_second_;
  Vec3 trans_first_, trans_second_;
};

// (‖Xa - Xb‖ - mean_length) / sigma. Blocks: Xa, Xb, mean_length.
class BoneLengthCost : public ceres::SizedCostFunction<1, 3, 3, 1> {
 public:
  explicit BoneLengthCost(double sigma);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  double inv_sigma_;
};

// (‖Xa1 - Xa2‖ - ‖Xb1 - Xb2‖) / sigma for a left/right bone pair at one time
// sample. Blocks: Xa1, Xa2, Xb1, Xb2.
class BoneSymmetryCost : public ceres::SizedCostFunction<1, 3, 3, 3, 3> {
 public:
  explicit BoneSymmetryCost(double sigma);
  bool Evaluate(double const* const* params, double* residuals,
                double** jacobians) const override;

 private:
  double inv_sigma_;
};

}  // namespace stba
