#include "stba/dct.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "stba/error.hpp"

namespace stba {

DctBasis::DctBasis(int num_samples, int num_basis, double t0, double dt)
    : num_samples_(num_samples), num_basis_(num_basis), t0_(t0), dt_(dt) {
  require(num_samples >= 2, ErrorCode::invalid_config, "basis needs at least two samples");
  require(num_basis >= 1 && num_basis <= num_samples, ErrorCode::invalid_config,
          "num_basis must be in [1, num_samples]");
  require(dt > 0.0, ErrorCode::invalid_config, "dt must be positive");
}

double DctBasis::value(int k, double t) const {
  const double j = (t - t0_) / dt_;
  const double c = k == 0 ? std::sqrt(1.0 / num_samples_) : std::sqrt(2.0 / num_samples_);
  return c * std::cos(M_PI * k * (2.0 * j + 1.0) / (2.0 * num_samples_));
}

Eigen::MatrixXd DctBasis::sample_matrix() const {
  Eigen::MatrixXd b(num_samples_, num_basis_);
  for (int j = 0; j < num_samples_; ++j) {
    for (int k = 0; k < num_basis_; ++k) {
      b(j, k) = value(k, grid_time(j));
    }
  }
  return b;
}

Eigen::RowVectorXd DctBasis::row_at(double t) const {
  Eigen::RowVectorXd r(num_basis_);
  for (int k = 0; k < num_basis_; ++k) r(k) = value(k, t);
  return r;
}

double DctBasis::frequency_sq(int k) const {
  const double s = std::sin(M_PI * k / (2.0 * num_samples_));
  return 4.0 * s * s / (dt_ * dt_);
}

double DctBasis::prior_weight(int k) const { return 0.5 * frequency_sq(k); }

Eigen::MatrixXd dct_fit_positions(const DctBasis& basis, const std::vector<double>& times,
                                  const std::vector<Vec3>& positions,
                                  const std::vector<double>& weights, double lambda2) {
  require(times.size() == positions.size(), ErrorCode::id_mismatch,
          "times/positions size mismatch");
  require(weights.empty() || weights.size() == times.size(), ErrorCode::id_mismatch,
          "weights size mismatch");
  require(!times.empty(), ErrorCode::too_sparse, "no samples to fit");

  const int kb = basis.num_basis();
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(kb, kb);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(kb, 3);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const Eigen::RowVectorXd row = basis.row_at(times[i]);
    normal.noalias() += w * row.transpose() * row;
    rhs.noalias() += w * row.transpose() * positions[i].transpose();
  }
  for (int k = 0; k < kb; ++k) {
    normal(k, k) += lambda2 * basis.prior_weight(k) * basis.dt();
  }
  return normal.ldlt().solve(rhs);
}

double dct_prior_value(const DctBasis& basis, const Eigen::MatrixXd& coeffs) {
  require(coeffs.rows() == basis.num_basis() && coeffs.cols() == 3, ErrorCode::invalid_config,
          "coefficient matrix must be num_basis x 3");
  double v = 0.0;
  for (int k = 0; k < basis.num_basis(); ++k) {
    v += basis.prior_weight(k) * coeffs.row(k).squaredNorm() * basis.dt();
  }
  return v;
}

}  // namespace stba
