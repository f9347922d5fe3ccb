#include "kgpilot/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include "kgpilot/errors.hpp"

namespace kgpilot {

double chi_square_pvalue(double statistic, int dof) {
  if (dof < 1) throw InvalidParameterError("chi_square_pvalue: dof must be >= 1");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquareResult chi_square_binned(const std::vector<std::int64_t>& observed,
                                  const std::vector<double>& expected,
                                  double min_expected) {
  if (observed.size() != expected.size())
    throw DimensionError("chi_square_binned: observed/expected size mismatch");
  if (observed.empty()) throw InvalidParameterError("chi_square_binned: no cells");

  ChiSquareResult result;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < min_expected) {
      pooled_obs += static_cast<double>(observed[i]);
      pooled_exp += expected[i];
      continue;
    }
    const double d = static_cast<double>(observed[i]) - expected[i];
    result.statistic += d * d / expected[i];
    ++used;
  }
  if (pooled_exp >= min_expected) {
    const double d = pooled_obs - pooled_exp;
    result.statistic += d * d / pooled_exp;
    ++used;
  }
  if (used < 2) throw InconclusiveError("chi_square_binned: fewer than two usable cells");
  result.dof = used - 1;
  result.p_value = chi_square_pvalue(result.statistic, result.dof);
  return result;
}

}  // namespace kgpilot
