#pragma once

#include <Eigen/Core>
#include <vector>

#include "stba/types.hpp"

namespace stba {

// Orthonormal cosine basis over a uniform time grid t_j = t0 + j·dt of
// num_samples points:
//
//   phi_k(j) = c_k · cos(pi·k·(2j+1) / (2·num_samples)),
//   c_0 = sqrt(1/num_samples), c_k = sqrt(2/num_samples).
//
// These vectors diagonalize the second-difference operator of the grid, so a
// quadratic penalty on the coefficients with weight_kk = omega_k^2 / 2,
// omega_k^2 = 4·sin^2(pi·k/(2·num_samples)) / dt^2, reproduces the
// finite-difference kinetic cost of the grid exactly (at epsilon = 0).
// Evaluation at arbitrary continuous t uses the fractional grid index, which
// is what lets observation times that fall off the grid use the same basis.
class DctBasis {
 public:
  DctBasis(int num_samples, int num_basis, double t0, double dt);

  [[nodiscard]] int num_samples() const { return num_samples_; }
  [[nodiscard]] int num_basis() const { return num_basis_; }
  [[nodiscard]] double t0() const { return t0_; }
  [[nodiscard]] double dt() const { return dt_; }

  [[nodiscard]] double grid_time(int j) const { return t0_ + j * dt_; }

  // Basis function k at continuous time t.
  [[nodiscard]] double value(int k, double t) const;

  // num_samples x num_basis matrix of basis values on the grid.
  [[nodiscard]] Eigen::MatrixXd sample_matrix() const;

  // Row of basis values at continuous time t (1 x num_basis).
  [[nodiscard]] Eigen::RowVectorXd row_at(double t) const;

  // omega_k^2 = 4 sin^2(pi k / (2 num_samples)) / dt^2.
  [[nodiscard]] double frequency_sq(int k) const;
  // Diagonal prior weight W_kk = omega_k^2 / 2.
  [[nodiscard]] double prior_weight(int k) const;

 private:
  int num_samples_;
  int num_basis_;
  double t0_;
  double dt_;
};

// Weighted linear fit of coefficients E (num_basis x 3) to 3D positions at
// arbitrary times, with the kinetic-equivalent coefficient penalty:
//   min_E  sum_i w_i ‖row(t_i)·E - x_i‖² + lambda2 · sum_k W_kk ‖E_k‖² dt.
Eigen::MatrixXd dct_fit_positions(const DctBasis& basis, const std::vector<double>& times,
                                  const std::vector<Vec3>& positions,
                                  const std::vector<double>& weights, double lambda2);

// Coefficient-domain kinetic value sum_k W_kk ‖E_k‖² dt for a coefficient
// matrix E (num_basis x 3).
double dct_prior_value(const DctBasis& basis, const Eigen::MatrixXd& coeffs);

}  // namespace stba
