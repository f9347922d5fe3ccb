#pragma once

#include <cstdint>
#include <vector>

namespace kgpilot {

/// Survival function of the chi-square distribution: P(X >= statistic).
double chi_square_pvalue(double statistic, int dof);

struct ChiSquareResult {
  double statistic{0.0};
  int dof{0};
  double p_value{1.0};
};

/// Pearson chi-square of observed counts against expected counts. Cells with
/// expected < min_expected are pooled into one cell; the pooled cell is
/// dropped if it still falls short. dof = used cells - 1.
ChiSquareResult chi_square_binned(const std::vector<std::int64_t>& observed,
                                  const std::vector<double>& expected,
                                  double min_expected = 5.0);

}  // namespace kgpilot
