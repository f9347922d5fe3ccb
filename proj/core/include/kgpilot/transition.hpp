#pragma once

#include <vector>

namespace kgpilot {

/// Finite-time transition amplitude A_T = integral of exp(i dE t) over
/// [-T/2, T/2] = 2 sin(dE T / 2) / dE, continued through the removable
/// singularity at dE = 0 where it equals T. Real with this convention.
double finite_time_amplitude(double delta_e, double cutoff_t);

/// |A_T|^2 / T: the transition rate density in dE. As a function of dE this
/// is the Fejer kernel with total mass 2 pi independent of T; its peak value
/// rate(0, T) = T grows without bound, which is why |A|^2 alone carries no
/// physical meaning at large T while |A|^2 / T does.
double rate(double delta_e, double cutoff_t);

/// Integral of rate over dE in [-halfwidth, halfwidth] by composite
/// Gauss-Legendre panels sized to resolve the kernel oscillations.
/// `panels` = 0 selects the automatic paneling. Converges to 2 pi as
/// halfwidth grows, with tail truncation error O(4 / (halfwidth T)).
/// Requires halfwidth >= 2 pi / T (one kernel lobe); >= 100 * 2 pi / T is
/// recommended for percent-level accuracy.
double rate_integral(double cutoff_t, double halfwidth, int panels = 0);

/// Sampled rate curve over a symmetric dE grid.
struct RateProfile {
  std::vector<double> delta_e_grid;
  std::vector<double> rate;
  double cutoff{0.0};
};

RateProfile make_rate_profile(double cutoff_t, double halfwidth, int points);

}  // namespace kgpilot
