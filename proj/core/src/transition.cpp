#include "kgpilot/transition.hpp"

#include <cmath>
#include <numbers>

#include "kgpilot/errors.hpp"
#include "kgpilot/quadrature.hpp"

namespace kgpilot {

double finite_time_amplitude(double delta_e, double cutoff_t) {
  if (!(cutoff_t > 0.0) || !std::isfinite(cutoff_t))
    throw InvalidParameterError("finite_time_amplitude: cutoff must be positive");
  const double y = 0.5 * delta_e * cutoff_t;
  if (std::fabs(delta_e * cutoff_t) < 1e-4) {
    // series branch: T (1 - y^2/6 + y^4/120) avoids cancellation near dE = 0
    const double y2 = y * y;
    return cutoff_t * (1.0 - y2 / 6.0 + y2 * y2 / 120.0);
  }
  return 2.0 * std::sin(y) / delta_e;
}

double rate(double delta_e, double cutoff_t) {
  if (delta_e == 0.0) {
    if (!(cutoff_t > 0.0) || !std::isfinite(cutoff_t))
      throw InvalidParameterError("rate: cutoff must be positive");
    return cutoff_t;  // |A|^2 / T = T^2 / T exactly
  }
  const double a = finite_time_amplitude(delta_e, cutoff_t);
  return a * a / cutoff_t;
}

double rate_integral(double cutoff_t, double halfwidth, int panels) {
  if (!(cutoff_t > 0.0) || !std::isfinite(cutoff_t))
    throw InvalidParameterError("rate_integral: cutoff must be positive");
  const double lobe = 2.0 * std::numbers::pi / cutoff_t;
  if (!(halfwidth >= lobe))
    throw InvalidParameterError(
        "rate_integral: halfwidth must cover at least one kernel lobe (2 pi / T)");

  if (panels <= 0) {
    // eight panels per zero spacing resolves the oscillation comfortably
    panels = static_cast<int>(std::ceil(16.0 * halfwidth / lobe));
    panels = std::max(panels, 64);
  }

  const GaussLegendreRule unit = gauss_legendre(8);
  const double panel_width = 2.0 * halfwidth / static_cast<double>(panels);
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = -halfwidth + panel_width * static_cast<double>(p);
    const double mid = lo + 0.5 * panel_width;
    for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
      const double de = mid + 0.5 * panel_width * unit.nodes[i];
      sum += 0.5 * panel_width * unit.weights[i] * rate(de, cutoff_t);
    }
  }
  return sum;
}

RateProfile make_rate_profile(double cutoff_t, double halfwidth, int points) {
  if (!(halfwidth > 0.0)) throw InvalidParameterError("make_rate_profile: halfwidth must be positive");
  if (points < 2) throw InvalidParameterError("make_rate_profile: at least 2 grid points required");
  RateProfile profile;
  profile.cutoff = cutoff_t;
  profile.delta_e_grid.reserve(static_cast<std::size_t>(points));
  profile.rate.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double de =
        -halfwidth + 2.0 * halfwidth * static_cast<double>(i) / static_cast<double>(points - 1);
    profile.delta_e_grid.push_back(de);
    profile.rate.push_back(rate(de, cutoff_t));
  }
  return profile;
}

}  // namespace kgpilot
