#include "stba/jacobian_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace stba {

double jacobian_check(ceres::Problem& problem, double step) {
  std::vector<ceres::ResidualBlockId> blocks;
  problem.GetResidualBlocks(&blocks);

  double worst = 0.0;
  for (const ceres::ResidualBlockId id : blocks) {
    const ceres::CostFunction* cost = problem.GetCostFunctionForResidualBlock(id);
    std::vector<double*> params;
    problem.GetParameterBlocksForResidualBlock(id, &params);
    const auto& sizes = cost->parameter_block_sizes();
    const int nr = cost->num_residuals();

    std::vector<std::vector<double>> jac(params.size());
    std::vector<double*> jac_ptrs(params.size());
    for (std::size_t b = 0; b < params.size(); ++b) {
      jac[b].assign(static_cast<std::size_t>(nr) * sizes[b], 0.0);
      jac_ptrs[b] = jac[b].data();
    }
    std::vector<double> residuals(nr);
    if (!cost->Evaluate(params.data(), residuals.data(), jac_ptrs.data())) continue;

    std::vector<double> r_plus(nr);
    std::vector<double> r_minus(nr);
    for (std::size_t b = 0; b < params.size(); ++b) {
      if (problem.IsParameterBlockConstant(params[b])) continue;
      for (int k = 0; k < sizes[b]; ++k) {
        const double saved = params[b][k];
        const double h = step * std::max(1.0, std::abs(saved));
        params[b][k] = saved + h;
        const bool ok_plus = cost->Evaluate(params.data(), r_plus.data(), nullptr);
        params[b][k] = saved - h;
        const bool ok_minus = cost->Evaluate(params.data(), r_minus.data(), nullptr);
        params[b][k] = saved;
        if (!ok_plus || !ok_minus) continue;
        for (int r = 0; r < nr; ++r) {
          const double fd = (r_plus[r] - r_minus[r]) / (2.0 * h);
          const double an = jac[b][static_cast<std::size_t>(r) * sizes[b] + k];
          const double rel =
              std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
          worst = std::max(worst, rel);
        }
      }
    }
  }
  return worst;
}

}  // namespace stba
