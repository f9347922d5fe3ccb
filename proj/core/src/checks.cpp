#include "kgpilot/checks.hpp"

#include <algorithm>
#include <cmath>

#include "kgpilot/bohmian.hpp"
#include "kgpilot/errors.hpp"
#include "kgpilot/rng.hpp"

namespace kgpilot {

namespace {

Configuration draw_configuration(const SpacetimeBox& box, CounterRng& rng) {
  Configuration q;
  q.points.resize(box.particle_count());
  for (std::size_t a = 0; a < box.particle_count(); ++a)
    for (std::size_t mu = 0; mu < 4; ++mu) {
      const Interval& iv = box.axis(a, mu);
      q[a].set(mu, rng.uniform(iv.lo, iv.hi));
    }
  return q;
}

// Draw until |psi| exceeds `floor_fraction * sum|c|`; finite-difference
// probes degrade near nodes, so the probes stay away from them.
Configuration draw_away_from_nodes(const WavePacket& packet, const SpacetimeBox& box,
                                   CounterRng& rng, double floor_fraction) {
  const double floor = floor_fraction * packet.amplitude_l1();
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Configuration q = draw_configuration(box, rng);
    if (std::abs(evaluate(packet, q)) > floor) return q;
  }
  throw InconclusiveError("could not find probe configurations away from nodes");
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

CheckResult upper_bound_check(std::string name, double measured, double tolerance,
                              std::string note = {}) {
  return {std::move(name), measured, tolerance, "<=", measured <= tolerance, std::move(note)};
}

CheckResult lower_bound_check(std::string name, double measured, double tolerance,
                              std::string note = {}) {
  return {std::move(name), measured, tolerance, ">=", measured >= tolerance, std::move(note)};
}

CheckResult order_check(std::string name, const std::vector<double>& orders,
                        double half_window) {
  // Ratios are only meaningful when the fine residual sits above rounding
  // noise; exact solutions leave nothing to converge.
  if (orders.empty())
    return {std::move(name), 2.0, half_window, "|x-2|<=", true,
            "residuals at the rounding floor; order not measurable"};
  const double measured = median(orders);
  return {std::move(name), measured,       half_window, "|x-2|<=",
          std::fabs(measured - 2.0) <= half_window,
          "median over probes of log10 residual ratio across one decade of h"};
}

std::vector<CheckResult> kg_suite(const WavePacket& packet, const SpacetimeBox& box,
                                  const CheckOptions& options) {
  // Scale-free residual: raw / (sum|c| * max(E^2 + |p|^2 + m^2)).
  const double scale = packet.amplitude_l1() * packet.characteristic_frequency_sq();
  CounterRng rng(options.seed, 101);
  double worst = 0.0;
  std::vector<double> ratios;
  for (int i = 0; i < options.sample_configurations; ++i) {
    const Configuration q = draw_configuration(box, rng);
    for (std::size_t a = 0; a < packet.particle_count(); ++a) {
      const double fine = kg_residual_fd(packet, q, a, options.kg_fd_step);
      const double coarse = kg_residual_fd(packet, q, a, 10.0 * options.kg_fd_step);
      worst = std::max(worst, fine / scale);
      if (fine > 1e-10 * scale) ratios.push_back(std::log10(coarse / fine));
    }
  }
  std::vector<CheckResult> results;
  results.push_back(upper_bound_check("kg_residual_max", worst, 1e-5,
                                      "normalized second-difference Klein-Gordon residual at h = " +
                                          std::to_string(options.kg_fd_step)));
  results.push_back(order_check("kg_convergence_order", ratios, 0.3));
  return results;
}

std::vector<CheckResult> continuity_suite(const WavePacket& packet, const SpacetimeBox& box,
                                          const CheckOptions& options) {
  CounterRng rng(options.seed, 202);
  double worst = 0.0;
  std::vector<double> ratios;
  for (int i = 0; i < options.sample_configurations; ++i) {
    const Configuration q = draw_away_from_nodes(packet, box, rng, 0.1);
    const double fine = continuity_residual(packet, q, options.continuity_fd_step);
    const double coarse = continuity_residual(packet, q, 10.0 * options.continuity_fd_step);
    worst = std::max(worst, fine);
    if (fine > 1e-11 && coarse > 1e-11) ratios.push_back(std::log10(coarse / fine));
  }
  std::vector<CheckResult> results;
  results.push_back(upper_bound_check(
      "continuity_residual_max", worst, 1e-6,
      "normalized divergence of |psi|^2 v at fd_step = " + std::to_string(options.continuity_fd_step)));
  results.push_back(order_check("continuity_convergence_order", ratios, 0.3));
  return results;
}

std::vector<CheckResult> equivariance_suite(const WavePacket& packet, const SpacetimeBox& box,
                                            const CheckOptions& options) {
  const EquivarianceReport report =
      equivariance_check(packet, box, options.equivariance_samples, options.equivariance_delta_s,
                         options.equivariance_step, options.seed);
  const std::string detail = "delta_s = " + std::to_string(options.equivariance_delta_s) + ", " +
                             std::to_string(report.survivors) + " of " +
                             std::to_string(report.samples) + " interior survivors";
  std::vector<CheckResult> results;
  results.push_back(upper_bound_check("equivariance_pointwise_max", report.pointwise_max_violation,
                                      1e-3, "max |rho(flow) det Dflow / rho - 1|; " + detail));
  results.push_back(lower_bound_check("equivariance_chi_square_p", report.chi_square_p, 0.01,
                                      "flowed ensemble vs |psi|^2 on the comparison region; " +
                                          detail));
  results.push_back(upper_bound_check("equivariance_exited_fraction", report.exited_fraction, 0.3,
                                      "trajectories leaving the comparison region"));
  return results;
}

std::vector<CheckResult> covariance_suite(const WavePacket& packet, const SpacetimeBox& box,
                                          const CheckOptions& options) {
  const EnsembleResult start = sample_ensemble(packet, box, 1, options.seed + 303);
  const double sup =
      covariance_check(packet, start.samples.front(), options.covariance_rapidity, 0.0,
                       options.covariance_s_end, options.trajectory_step);
  std::vector<CheckResult> results;
  results.push_back(upper_bound_check(
      "covariance_sup_distance", sup, 1e-6,
      "sup_s |boost(X(s)) - X'(s)| at rapidity " + std::to_string(options.covariance_rapidity)));
  return results;
}

std::vector<CheckResult> nonlocality_suite(const WavePacket& packet, const SpacetimeBox& box,
                                           const CheckOptions& options) {
  std::vector<CheckResult> results;
  if (packet.particle_count() < 2) {
    results.push_back({"nonlocality_probe", 0.0, 0.0, "<=", true,
                       "inapplicable: single-particle packet has no other particles"});
    return results;
  }
  CounterRng rng(options.seed, 404);
  double largest = 0.0;
  for (int i = 0; i < 16; ++i) {
    const Configuration q = draw_away_from_nodes(packet, box, rng, 0.1);
    const FourVector displacement{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                  rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    try {
      largest = std::max(largest, nonlocality_probe(packet, q, 1, displacement, 0));
    } catch (const NodeError&) {
      // displaced point fell on a node; try the next draw
    }
  }
  if (packet.mode_count() == 1) {
    results.push_back(upper_bound_check("nonlocality_probe_max", largest, 1e-12,
                                        "single-mode packets factorize; moving particle 2 must not "
                                        "change particle 1's velocity"));
  } else {
    results.push_back(lower_bound_check("nonlocality_probe_max", largest, 1e-3,
                                        "entangled packet: particle 1's velocity responds to a "
                                        "displacement of particle 2"));
  }
  return results;
}

}  // namespace

std::vector<CheckResult> run_check_suite(const WavePacket& packet, const SpacetimeBox& box,
                                         std::string_view suite, const CheckOptions& options) {
  std::vector<CheckResult> results;
  const bool all = suite == "all";
  bool known = all;
  auto append = [&results](std::vector<CheckResult> part) {
    for (CheckResult& r : part) results.push_back(std::move(r));
  };
  if (all || suite == "kg") {
    append(kg_suite(packet, box, options));
    known = true;
  }
  if (all || suite == "continuity") {
    append(continuity_suite(packet, box, options));
    known = true;
  }
  if (all || suite == "equivariance") {
    append(equivariance_suite(packet, box, options));
    known = true;
  }
  if (all || suite == "covariance") {
    append(covariance_suite(packet, box, options));
    known = true;
  }
  if (all || suite == "nonlocality") {
    append(nonlocality_suite(packet, box, options));
    known = true;
  }
  if (!known)
    throw InvalidParameterError("unknown check suite '" + std::string(suite) +
                                "'; expected kg, continuity, equivariance, covariance, "
                                "nonlocality, or all");
  return results;
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace kgpilot
