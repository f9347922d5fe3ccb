#pragma once

#include <vector>

namespace kgpilot {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
/// Throws InvalidParameterError for n < 1.
GaussLegendreRule gauss_legendre(int n);

/// The same rule mapped to [lo, hi].
GaussLegendreRule gauss_legendre(int n, double lo, double hi);

}  // namespace kgpilot
