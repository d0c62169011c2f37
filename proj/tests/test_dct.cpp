#include "stba/dct.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "stba/motion_prior.hpp"
#include "stba/random.hpp"

using namespace stba;

TEST_CASE("basis is orthonormal on its grid") {
  const DctBasis basis(16, 16, 0.0, 0.1);
  const Eigen::MatrixXd b = basis.sample_matrix();
  const Eigen::MatrixXd gram = b.transpose() * b;
  CHECK((gram - Eigen::MatrixXd::Identity(16, 16)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("squared difference of each basis vector equals its eigenvalue") {
  // The diagonal prior weight rests on the basis diagonalizing the grid's
  // second-difference form: sum_j (phi_k(j+1) - phi_k(j))^2 = 4 sin^2(pi k / 2K).
  const int k_samples = 24;
  const DctBasis basis(k_samples, k_samples, 0.0, 1.0);
  const Eigen::MatrixXd b = basis.sample_matrix();
  for (int k = 0; k < k_samples; ++k) {
    double sum = 0.0;
    for (int j = 0; j + 1 < k_samples; ++j) {
      const double d = b(j + 1, k) - b(j, k);
      sum += d * d;
    }
    const double s = std::sin(M_PI * k / (2.0 * k_samples));
    CHECK(sum == doctest::Approx(4.0 * s * s).epsilon(1e-10));
  }
}

TEST_CASE("coefficient-domain prior equals the finite-difference kinetic cost") {
  Rng rng(41);
  const int k_samples = 30;
  const double dt = 1.0 / 120.0;
  const DctBasis basis(k_samples, k_samples, 0.0, dt);
  const Eigen::MatrixXd b = basis.sample_matrix();
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd coeffs(k_samples, 3);
    for (int k = 0; k < k_samples; ++k) {
      // Damp high frequencies so positions look like plausible motion.
      coeffs.row(k) = rng.normal_vec3(1.0 / (1.0 + k)).transpose();
    }
    const Eigen::MatrixXd x = b * coeffs;
    std::vector<TrajectorySample> samples(k_samples);
    for (int j = 0; j < k_samples; ++j) {
      samples[j].time = basis.grid_time(j);
      samples[j].position = x.row(j).transpose();
      samples[j].weight = 1.0;
    }
    MotionPriorConfig cfg;
    cfg.epsilon = 1e-12;  // the identity is exact at epsilon -> 0
    const double fd = kinetic_cost(Trajectory3D(0, std::move(samples)), cfg);
    const double spectral = dct_prior_value(basis, coeffs);
    CHECK(spectral == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("fit recovers exact coefficients from grid samples") {
  Rng rng(43);
  const DctBasis basis(20, 12, 0.5, 0.05);
  Eigen::MatrixXd truth(12, 3);
  for (int k = 0; k < 12; ++k) truth.row(k) = rng.normal_vec3(1.0).transpose();

  std::vector<double> times;
  std::vector<Vec3> positions;
  for (int j = 0; j < 20; ++j) {
    times.push_back(basis.grid_time(j));
    positions.push_back((basis.row_at(times.back()) * truth).transpose());
  }
  const Eigen::MatrixXd fitted = dct_fit_positions(basis, times, positions, {}, 0.0);
  CHECK((fitted - truth).norm() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("regularization shrinks every nonzero frequency") {
  Rng rng(47);
  const DctBasis basis(24, 24, 0.0, 0.02);
  std::vector<double> times;
  std::vector<Vec3> positions;
  for (int j = 0; j < 24; ++j) {
    times.push_back(basis.grid_time(j));
    positions.push_back(rng.normal_vec3(0.5));
  }
  const Eigen::MatrixXd loose = dct_fit_positions(basis, times, positions, {}, 0.0);
  const Eigen::MatrixXd tight = dct_fit_positions(basis, times, positions, {}, 50.0);
  // k = 0 (the mean) carries no penalty and must survive unchanged.
  CHECK((tight.row(0) - loose.row(0)).norm() == doctest::Approx(0.0).epsilon(1e-9));
  for (int k = 1; k < 24; ++k) {
    CHECK(tight.row(k).norm() < loose.row(k).norm() + 1e-12);
  }
}

TEST_CASE("continuous evaluation matches the grid at grid times") {
  const DctBasis basis(10, 10, -1.0, 0.3);
  const Eigen::MatrixXd b = basis.sample_matrix();
  for (int j = 0; j < 10; ++j) {
    const Eigen::RowVectorXd row = basis.row_at(basis.grid_time(j));
    CHECK((row - b.row(j)).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("basis configuration is validated") {
  CHECK_THROWS(DctBasis(1, 1, 0.0, 0.1));
  CHECK_THROWS(DctBasis(8, 9, 0.0, 0.1));
  CHECK_THROWS(DctBasis(8, 0, 0.0, 0.1));
  CHECK_THROWS(DctBasis(8, 8, 0.0, 0.0));
}
