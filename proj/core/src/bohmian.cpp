#include "kgpilot/bohmian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "kgpilot/errors.hpp"
#include "kgpilot/quadrature.hpp"
#include "kgpilot/rng.hpp"
#include "kgpilot/stats.hpp"
#include "parallel_for.hpp"

namespace kgpilot {

namespace {

// Velocity evaluation on flat coordinate arrays with reusable scratch; the
// integrator calls this four times per step.
class FlowField {
 public:
  FlowField(const WavePacket& packet, double node_threshold)
      : packet_(packet),
        threshold_(node_threshold),
        n_(packet.particle_count()),
        grad_(4 * packet.particle_count()) {}

  // in: 4n coordinates (t,x,y,z per particle); out: 4n velocity components.
  void operator()(const double* in, double* out) {
    const std::size_t modes = packet_.mode_count();
    std::complex<double> psi{};
    for (auto& g : grad_) g = {};
    for (std::size_t k = 0; k < modes; ++k) {
      double phase = 0.0;
      for (std::size_t a = 0; a < n_; ++a) {
        const FourVector& p = packet_.mode_momentum(k, a);
        const double* xa = in + 4 * a;
        phase += p.t * xa[0] - p.x * xa[1] - p.y * xa[2] - p.z * xa[3];
      }
      const std::complex<double> term = packet_.modes()[k].amplitude * std::polar(1.0, -phase);
      psi += term;
      const std::complex<double> mit{term.imag(), -term.real()};  // -i * term
      for (std::size_t a = 0; a < n_; ++a) {
        const FourVector& p = packet_.mode_momentum(k, a);
        grad_[4 * a + 0] += p.t * mit;
        grad_[4 * a + 1] -= p.x * mit;
        grad_[4 * a + 2] -= p.y * mit;
        grad_[4 * a + 3] -= p.z * mit;
      }
    }
    const double modulus = std::abs(psi);
    if (modulus <= threshold_)
      throw NodeError(std::vector<double>(in, in + 4 * n_), modulus, threshold_);
    for (std::size_t a = 0; a < n_; ++a) {
      // dS_mu = Im(grad_mu psi / psi); v^mu = -g^{mu nu} dS_nu
      out[4 * a + 0] = -std::imag(grad_[4 * a + 0] / psi);
      out[4 * a + 1] = std::imag(grad_[4 * a + 1] / psi);
      out[4 * a + 2] = std::imag(grad_[4 * a + 2] / psi);
      out[4 * a + 3] = std::imag(grad_[4 * a + 3] / psi);
    }
  }

 private:
  const WavePacket& packet_;
  double threshold_;
  std::size_t n_;
  std::vector<std::complex<double>> grad_;
};

// State as a compensated (Neumaier) pair so the per-step update rounding does
// not accumulate linearly over long integrations; the drift of a constant
// field stays at O(eps |X|) for any step count.
struct CompensatedState {
  std::vector<double> sum;
  std::vector<double> carry;

  explicit CompensatedState(std::vector<double> initial)
      : sum(std::move(initial)), carry(sum.size(), 0.0) {}

  void add(const std::vector<double>& delta) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const double t = sum[i] + delta[i];
      if (std::fabs(sum[i]) >= std::fabs(delta[i]))
        carry[i] += (sum[i] - t) + delta[i];
      else
        carry[i] += (delta[i] - t) + sum[i];
      sum[i] = t;
    }
  }

  void value_into(std::vector<double>& out) const {
    for (std::size_t i = 0; i < sum.size(); ++i) out[i] = sum[i] + carry[i];
  }
};

class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t dim)
      : k1_(dim), k2_(dim), k3_(dim), k4_(dim), base_(dim), tmp_(dim), delta_(dim) {}

  void step(FlowField& field, CompensatedState& state, double h) {
    const std::size_t dim = base_.size();
    state.value_into(base_);
    field(base_.data(), k1_.data());
    for (std::size_t i = 0; i < dim; ++i) tmp_[i] = base_[i] + 0.5 * h * k1_[i];
    field(tmp_.data(), k2_.data());
    for (std::size_t i = 0; i < dim; ++i) tmp_[i] = base_[i] + 0.5 * h * k2_[i];
    field(tmp_.data(), k3_.data());
    for (std::size_t i = 0; i < dim; ++i) tmp_[i] = base_[i] + h * k3_[i];
    field(tmp_.data(), k4_.data());
    for (std::size_t i = 0; i < dim; ++i)
      delta_[i] = h / 6.0 * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
    state.add(delta_);
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_, base_, tmp_, delta_;
};

double resolve_threshold(const WavePacket& packet, double node_threshold) {
  return node_threshold >= 0.0 ? node_threshold : default_node_threshold(packet);
}

bool all_finite(const std::vector<double>& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

double inf_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Determinant by LU with partial pivoting; `a` is row-major n x n, destroyed.
double determinant(std::vector<double>& a, std::size_t n) {
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (a[pivot * n + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
      det = -det;
    }
    det *= a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
    }
  }
  return det;
}

}  // namespace

double default_node_threshold(const WavePacket& packet) { return 1e-9 * packet.amplitude_l1(); }

FourVector phase_gradient(const WavePacket& packet, const Configuration& q, std::size_t particle,
                          double node_threshold) {
  if (particle >= packet.particle_count())
    throw DimensionError("phase_gradient: particle index out of range");
  const double threshold = resolve_threshold(packet, node_threshold);
  const PacketEvaluation eval = evaluate_with_gradients(packet, q);
  const double modulus = std::abs(eval.value);
  if (modulus <= threshold) throw NodeError(flatten(q), modulus, threshold);
  const ComplexFourVector& g = eval.gradients[particle];
  return {std::imag(g.t / eval.value), std::imag(g.x / eval.value), std::imag(g.y / eval.value),
          std::imag(g.z / eval.value)};
}

VelocitySample velocity_field(const WavePacket& packet, const Configuration& q,
                              double node_threshold) {
  const double threshold = resolve_threshold(packet, node_threshold);
  const PacketEvaluation eval = evaluate_with_gradients(packet, q);
  const double modulus = std::abs(eval.value);
  if (modulus <= threshold) throw NodeError(flatten(q), modulus, threshold);

  VelocitySample sample;
  sample.at = q;
  sample.psi_modulus = modulus;
  sample.velocities.reserve(packet.particle_count());
  for (std::size_t a = 0; a < packet.particle_count(); ++a) {
    const ComplexFourVector& g = eval.gradients[a];
    const FourVector ds{std::imag(g.t / eval.value), std::imag(g.x / eval.value),
                        std::imag(g.y / eval.value), std::imag(g.z / eval.value)};
    sample.velocities.push_back(-raise_index(ds));
  }
  return sample;
}

std::string_view to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Completed: return "completed";
    case TrajectoryStatus::HaltedAtNode: return "halted-at-node";
    default: return "halted-out-of-domain";
  }
}

Trajectory integrate_trajectory(const WavePacket& packet, const Configuration& initial, double s0,
                                double s1, double step, const IntegrationOptions& options) {
  if (initial.size() != packet.particle_count())
    throw DimensionError("integrate_trajectory: initial configuration size mismatch");
  if (!(step > 0.0) || !std::isfinite(step))
    throw InvalidParameterError("integrate_trajectory: step must be positive");
  if (options.domain && options.domain->particle_count() != packet.particle_count())
    throw DimensionError("integrate_trajectory: domain particle count mismatch");

  const double threshold = resolve_threshold(packet, options.node_threshold);
  FlowField field(packet, threshold);
  const std::size_t dim = 4 * packet.particle_count();
  std::vector<double> y = flatten(initial);
  std::vector<double> probe(dim);
  field(y.data(), probe.data());  // initial node check; NodeError propagates

  Trajectory traj;
  traj.s_values.push_back(s0);
  traj.states.push_back(initial);

  const double span = s1 - s0;
  if (span == 0.0) return traj;
  const double dir = span > 0.0 ? 1.0 : -1.0;
  const double total = std::fabs(span);
  const auto full_steps = static_cast<std::int64_t>(std::floor(total / step * (1.0 + 1e-12)));
  const double remainder = total - static_cast<double>(full_steps) * step;

  Rk4Stepper stepper(dim);
  Rk4Stepper half_stepper(dim);
  CompensatedState state(std::move(y));
  std::vector<double> current(dim), halved(dim);

  const std::int64_t total_steps = full_steps + (remainder > step * 1e-9 ? 1 : 0);
  for (std::int64_t i = 1; i <= total_steps; ++i) {
    const bool last_partial = i > full_steps;
    const double h = dir * (last_partial ? remainder : step);
    const double s = last_partial ? s1 : s0 + dir * static_cast<double>(i) * step;
    try {
      if (options.error_monitor) {
        CompensatedState half = state;
        stepper.step(field, state, h);
        half_stepper.step(field, half, 0.5 * h);
        half_stepper.step(field, half, 0.5 * h);
        state.value_into(current);
        half.value_into(halved);
        traj.max_halfstep_error = std::max(traj.max_halfstep_error, inf_norm_diff(current, halved));
      } else {
        stepper.step(field, state, h);
        state.value_into(current);
      }
    } catch (const NodeError&) {
      traj.status = TrajectoryStatus::HaltedAtNode;
      return traj;
    }
    if (!all_finite(current))
      throw NumericalBlowupError("integrate_trajectory: non-finite state at s = " +
                                 std::to_string(s));
    traj.s_values.push_back(s);
    traj.states.push_back(unflatten(current));
    if (options.domain && !options.domain->contains(traj.states.back())) {
      traj.status = TrajectoryStatus::HaltedOutOfDomain;
      return traj;
    }
  }
  return traj;
}

double continuity_residual(const WavePacket& packet, const Configuration& q, double fd_step,
                           double node_threshold) {
  if (!(fd_step > 0.0)) throw InvalidParameterError("continuity_residual: fd_step must be positive");
  const double threshold = resolve_threshold(packet, node_threshold);
  const VelocitySample center = velocity_field(packet, q, threshold);
  const double rho_center = center.psi_modulus * center.psi_modulus;

  double divergence = 0.0;
  for (std::size_t a = 0; a < packet.particle_count(); ++a)
    for (std::size_t mu = 0; mu < 4; ++mu) {
      Configuration plus = q, minus = q;
      plus[a].set(mu, q[a][mu] + fd_step);
      minus[a].set(mu, q[a][mu] - fd_step);
      const VelocitySample vp = velocity_field(packet, plus, threshold);
      const VelocitySample vm = velocity_field(packet, minus, threshold);
      const double flux_p = vp.psi_modulus * vp.psi_modulus * vp.velocities[a][mu];
      const double flux_m = vm.psi_modulus * vm.psi_modulus * vm.velocities[a][mu];
      divergence += (flux_p - flux_m) / (2.0 * fd_step);
    }
  return std::fabs(divergence) / (rho_center * packet.characteristic_frequency());
}

namespace {

std::vector<SpacetimeBox::AxisIntervals> comparison_region(const WavePacket& packet,
                                                           const SpacetimeBox& box,
                                                           double margin) {
  const auto flow_active = velocity_active_axes(packet);
  std::vector<SpacetimeBox::AxisIntervals> interior(box.particle_count());
  for (std::size_t a = 0; a < box.particle_count(); ++a)
    for (std::size_t mu = 0; mu < 4; ++mu) {
      Interval iv = box.axis(a, mu);
      if (flow_active[a][mu]) {
        const double shave = margin * iv.width();
        iv = {iv.lo + shave, iv.hi - shave};
      }
      interior[a][mu] = iv;
    }
  return interior;
}

bool region_contains(const std::vector<SpacetimeBox::AxisIntervals>& region,
                     const Configuration& q) {
  for (std::size_t a = 0; a < region.size(); ++a)
    for (std::size_t mu = 0; mu < 4; ++mu)
      if (!region[a][mu].contains(q[a][mu])) return false;
  return true;
}

struct HistogramAxis {
  std::size_t particle;
  std::size_t mu;
  Interval interval;
};

}  // namespace

EquivarianceReport equivariance_check(const WavePacket& packet, const SpacetimeBox& box,
                                      std::int64_t count, double delta_s, double step,
                                      std::uint64_t seed, const EquivarianceOptions& options) {
  if (count < 1) throw InvalidParameterError("equivariance_check: count must be >= 1");
  const double threshold = resolve_threshold(packet, options.node_threshold);
  const auto interior = comparison_region(packet, box, options.interior_margin);

  EquivarianceReport report;
  report.samples = count;

  // --- statistical test: flow a |psi|^2 ensemble, compare interior survivors
  const EnsembleResult ensemble = sample_ensemble(packet, box, count, seed);
  std::vector<Configuration> finals(ensemble.samples.size());
  std::vector<char> ok(ensemble.samples.size(), 0);
  IntegrationOptions flow_options;
  flow_options.node_threshold = threshold;
  detail::parallel_for(ensemble.samples.size(), [&](std::size_t i) {
    const Trajectory traj =
        integrate_trajectory(packet, ensemble.samples[i], 0.0, delta_s, step, flow_options);
    if (traj.status == TrajectoryStatus::Completed) {
      finals[i] = traj.states.back();
      ok[i] = 1;
    }
  });

  std::int64_t started_inside = 0, left = 0;
  for (std::size_t i = 0; i < ensemble.samples.size(); ++i) {
    if (!ok[i]) ++report.halted;
    if (region_contains(interior, ensemble.samples[i])) {
      ++started_inside;
      if (!ok[i] || !region_contains(interior, finals[i])) ++left;
    }
    if (ok[i] && region_contains(interior, finals[i])) ++report.survivors;
  }
  report.exited_fraction =
      started_inside > 0 ? static_cast<double>(left) / static_cast<double>(started_inside) : 0.0;
  if (report.survivors < options.min_survivors)
    throw InconclusiveError("equivariance_check: only " + std::to_string(report.survivors) +
                            " interior survivors (need " + std::to_string(options.min_survivors) +
                            "); enlarge the box or the ensemble");

  // Histogram over the axes the density varies along (all axes the flow can
  // move along, when the density is flat everywhere).
  const auto dens_active = density_active_axes(packet);
  const auto flow_active = velocity_active_axes(packet);
  std::vector<HistogramAxis> axes;
  for (std::size_t a = 0; a < packet.particle_count(); ++a)
    for (std::size_t mu = 0; mu < 4; ++mu)
      if (dens_active[a][mu]) axes.push_back({a, mu, interior[a][mu]});
  if (axes.empty())
    for (std::size_t a = 0; a < packet.particle_count(); ++a)
      for (std::size_t mu = 0; mu < 4; ++mu)
        if (flow_active[a][mu]) axes.push_back({a, mu, interior[a][mu]});

  int bins = options.histogram_bins;
  if (bins <= 0) {
    const double target =
        std::pow(static_cast<double>(report.survivors) / 20.0,
                 1.0 / static_cast<double>(axes.size()));
    bins = std::max(3, std::min(20, static_cast<int>(std::floor(target))));
  }

  std::size_t cells = 1;
  for (std::size_t d = 0; d < axes.size(); ++d) cells *= static_cast<std::size_t>(bins);
  std::vector<std::int64_t> observed(cells, 0);
  for (std::size_t i = 0; i < finals.size(); ++i) {
    if (!ok[i] || !region_contains(interior, finals[i])) continue;
    std::size_t cell = 0;
    for (const HistogramAxis& axis : axes) {
      const double v = finals[i][axis.particle][axis.mu];
      auto b = static_cast<std::int64_t>(std::floor((v - axis.interval.lo) /
                                                    axis.interval.width() * bins));
      b = std::clamp<std::int64_t>(b, 0, bins - 1);
      cell = cell * static_cast<std::size_t>(bins) + static_cast<std::size_t>(b);
    }
    ++observed[cell];
  }

  // Expected counts: per-cell 2-point Gauss-Legendre integral of the density
  // (axes outside the histogram set contribute a common factor that drops out
  // in the normalization).
  Configuration base;
  base.points.resize(packet.particle_count());
  for (std::size_t a = 0; a < packet.particle_count(); ++a)
    for (std::size_t mu = 0; mu < 4; ++mu) base[a].set(mu, interior[a][mu].mid());
  std::vector<double> expected(cells, 0.0);
  double expected_total = 0.0;
  const GaussLegendreRule unit_rule = gauss_legendre(2);
  std::vector<std::size_t> digits(axes.size(), 0);
  std::vector<std::size_t> node_index(axes.size(), 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t rest = cell;
    for (std::size_t d = axes.size(); d-- > 0;) {
      digits[d] = rest % static_cast<std::size_t>(bins);
      rest /= static_cast<std::size_t>(bins);
    }
    double integral = 0.0;
    std::fill(node_index.begin(), node_index.end(), 0);
    for (;;) {
      double weight = 1.0;
      for (std::size_t d = 0; d < axes.size(); ++d) {
        const HistogramAxis& axis = axes[d];
        const double width = axis.interval.width() / bins;
        const double lo = axis.interval.lo + width * static_cast<double>(digits[d]);
        const double node = lo + 0.5 * width * (1.0 + unit_rule.nodes[node_index[d]]);
        base[axis.particle].set(axis.mu, node);
        weight *= 0.5 * width * unit_rule.weights[node_index[d]];
      }
      integral += weight * density(packet, base);
      std::size_t d = 0;
      while (d < node_index.size() && ++node_index[d] == unit_rule.nodes.size()) {
        node_index[d] = 0;
        ++d;
      }
      if (d == node_index.size()) break;
    }
    expected[cell] = integral;
    expected_total += integral;
  }
  for (double& e : expected)
    e *= static_cast<double>(report.survivors) / expected_total;

  const ChiSquareResult chi = chi_square_binned(observed, expected);
  report.chi_square_statistic = chi.statistic;
  report.chi_square_dof = chi.dof;
  report.chi_square_p = chi.p_value;

  // --- pointwise Liouville test: rho(Phi(q)) det DPhi(q) = rho(q)
  const std::size_t dim = 4 * packet.particle_count();
  const double envelope = packet.amplitude_l1();
  std::vector<Configuration> probes;
  probes.reserve(static_cast<std::size_t>(options.pointwise_samples));
  const std::int64_t max_attempts = 50 * options.pointwise_samples;
  std::int64_t attempt = 0;
  CounterRng probe_rng(seed, 0x8000000000000000ull);
  while (static_cast<std::int64_t>(probes.size()) < options.pointwise_samples &&
         attempt < max_attempts) {
    ++attempt;
    Configuration q;
    q.points.resize(packet.particle_count());
    for (std::size_t a = 0; a < packet.particle_count(); ++a)
      for (std::size_t mu = 0; mu < 4; ++mu)
        q[a].set(mu, probe_rng.uniform(interior[a][mu].lo, interior[a][mu].hi));
    const double modulus = std::abs(evaluate(packet, q));
    if (modulus > std::max(threshold, options.probe_modulus_floor * envelope)) probes.push_back(q);
  }
  if (probes.empty())
    throw InconclusiveError("equivariance_check: no usable pointwise probes away from nodes");

  std::vector<double> violations(probes.size(), -1.0);
  detail::parallel_for(probes.size(), [&](std::size_t i) {
    const Configuration& q = probes[i];
    const Trajectory central = integrate_trajectory(packet, q, 0.0, delta_s, step, flow_options);
    if (central.status != TrajectoryStatus::Completed) return;
    const std::vector<double> flat = flatten(q);
    std::vector<double> jac(dim * dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      std::vector<double> fplus = flat, fminus = flat;
      fplus[j] += options.jacobian_fd_step;
      fminus[j] -= options.jacobian_fd_step;
      const Trajectory tp =
          integrate_trajectory(packet, unflatten(fplus), 0.0, delta_s, step, flow_options);
      const Trajectory tm =
          integrate_trajectory(packet, unflatten(fminus), 0.0, delta_s, step, flow_options);
      if (tp.status != TrajectoryStatus::Completed || tm.status != TrajectoryStatus::Completed)
        return;
      const std::vector<double> yp = flatten(tp.states.back());
      const std::vector<double> ym = flatten(tm.states.back());
      for (std::size_t r = 0; r < dim; ++r)
        jac[r * dim + j] = (yp[r] - ym[r]) / (2.0 * options.jacobian_fd_step);
    }
    const double det = determinant(jac, dim);
    const double rho_q = density(packet, q);
    const double rho_f = density(packet, central.states.back());
    violations[i] = std::fabs(rho_f * det / rho_q - 1.0);
  });

  for (double v : violations) {
    if (v < 0.0) continue;
    ++report.pointwise_used;
    report.pointwise_max_violation = std::max(report.pointwise_max_violation, v);
  }
  if (report.pointwise_used == 0)
    throw InconclusiveError("equivariance_check: every pointwise probe halted before delta_s");
  return report;
}

double nonlocality_probe(const WavePacket& packet, const Configuration& q, std::size_t moved,
                         const FourVector& displacement, std::size_t observed,
                         double node_threshold) {
  if (moved >= packet.particle_count() || observed >= packet.particle_count())
    throw DimensionError("nonlocality_probe: particle index out of range");
  const double threshold = resolve_threshold(packet, node_threshold);
  const VelocitySample before = velocity_field(packet, q, threshold);
  Configuration moved_q = q;
  moved_q[moved] = moved_q[moved] + displacement;
  const VelocitySample after = velocity_field(packet, moved_q, threshold);
  const FourVector d = after.velocities[observed] - before.velocities[observed];
  return std::sqrt(d.t * d.t + d.x * d.x + d.y * d.y + d.z * d.z);
}

double covariance_check(const WavePacket& packet, const Configuration& initial, double rapidity,
                        double s0, double s1, double step, Axis axis) {
  const Trajectory lab = integrate_trajectory(packet, initial, s0, s1, step);
  const WavePacket moving = boosted(packet, rapidity, axis);
  const Trajectory primed = integrate_trajectory(moving, boosted(initial, rapidity, axis), s0, s1, step);

  const std::size_t common = std::min(lab.states.size(), primed.states.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < common; ++i)
    for (std::size_t a = 0; a < packet.particle_count(); ++a) {
      const FourVector mapped = boost(lab.states[i][a], rapidity, axis);
      sup = std::max(sup, max_abs_component(mapped - primed.states[i][a]));
    }
  return sup;
}

}  // namespace kgpilot
