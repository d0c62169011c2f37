#pragma once

#include <ceres/ceres.h>

#include "stba/problem.hpp"

namespace stba {

// Compares every analytic Jacobian in the assembled problem against central
// finite differences at the current parameter values. Constant blocks are
// skipped. Returns the maximum entrywise relative error
//   |J_analytic - J_fd| / max(1, |J_analytic|, |J_fd|)
// over all residual blocks. Residual blocks that fail to evaluate at the
// current or perturbed point (e.g. behind-camera) are skipped entry-wise.
double jacobian_check(ceres::Problem& problem, double step = 1e-6);

inline double jacobian_check(Problem& problem, double step = 1e-6) {
  return jacobian_check(problem.ceres_problem(), step);
}

}  // namespace stba
