#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "kgpilot/four_vector.hpp"
#include "kgpilot/probability.hpp"
#include "kgpilot/wavepacket.hpp"

namespace kgpilot {

/// Default node threshold on |psi|: 1e-9 * sum|c_k|. The velocity field is
/// undefined where the wave function vanishes; evaluations at or below the
/// threshold raise NodeError.
double default_node_threshold(const WavePacket& packet);

/// Covariant phase gradient dS/dx_a^mu of psi = |psi| exp(iS), computed as
/// Im(grad psi / psi) from the analytic gradient; S itself is never built
/// (it is multivalued around nodes, its gradient is not).
/// For a single plane wave this equals -p_mu (lower index) exactly.
FourVector phase_gradient(const WavePacket& packet, const Configuration& q, std::size_t particle,
                          double node_threshold = -1.0);

struct VelocitySample {
  std::vector<FourVector> velocities;  // contravariant v^mu_a
  Configuration at;
  double psi_modulus{0.0};
};

/// Guidance field v^mu_a = -d^mu_a S on configuration spacetime. For a single
/// plane wave v^mu = p^mu, so v^0 = E > 0.
VelocitySample velocity_field(const WavePacket& packet, const Configuration& q,
                              double node_threshold = -1.0);

enum class TrajectoryStatus { Completed, HaltedAtNode, HaltedOutOfDomain };

std::string_view to_string(TrajectoryStatus status);

/// A sampled flow X^mu_a(s) in the frame-invariant evolution parameter s.
/// states[i] is the configuration at s_values[i]; s_values is strictly
/// monotone in the direction of integration.
struct Trajectory {
  std::vector<double> s_values;
  std::vector<Configuration> states;
  TrajectoryStatus status{TrajectoryStatus::Completed};
  /// Largest full-step vs two-half-steps deviation seen (error monitor only).
  double max_halfstep_error{0.0};
};

struct IntegrationOptions {
  double node_threshold{-1.0};  // < 0 selects the default
  /// When set, integration halts with HaltedOutOfDomain once the state leaves
  /// this box; the exiting state is recorded.
  std::optional<SpacetimeBox> domain{};
  /// Step-halving error monitor; roughly triples the cost and only reports,
  /// it never changes the step.
  bool error_monitor{false};
};

/// Classic fixed-step 4th-order integration of dX^mu_a/ds = v^mu_a(X_1..X_n)
/// over all 4n coordinates simultaneously, recording every step. `step` is a
/// magnitude; the direction comes from the span, so s1 < s0 integrates
/// backwards. Throws NodeError if the initial configuration is at a node and
/// NumericalBlowupError if the state becomes non-finite.
Trajectory integrate_trajectory(const WavePacket& packet, const Configuration& initial, double s0,
                                double s1, double step, const IntegrationOptions& options = {});

/// Central-difference residual of the conservation law
/// sum_a d_{a mu} (|psi|^2 v^mu_a) = 0, normalized by |psi(q)|^2 times the
/// packet's characteristic frequency. The identity holds analytically for
/// on-shell packets, so the return value is pure O(fd_step^2) discretization
/// error. Throws NodeError when a stencil point is at a node.
double continuity_residual(const WavePacket& packet, const Configuration& q, double fd_step,
                           double node_threshold = -1.0);

struct EquivarianceOptions {
  std::int64_t pointwise_samples{200};
  int histogram_bins{0};          // 0 selects an expected-count-driven choice, capped at 20
  double jacobian_fd_step{1e-3};  // displacement for the flow-map Jacobian columns
  double interior_margin{0.1};    // fraction of width shaved off each side of flow-active axes
  double node_threshold{-1.0};
  std::int64_t min_survivors{100};
  /// Pointwise probes require |psi| above this fraction of sum|c_k| so the
  /// density ratio is well conditioned.
  double probe_modulus_floor{1e-3};
};

struct EquivarianceReport {
  /// max over probes of |rho(Phi(q)) det DPhi(q) / rho(q) - 1|.
  double pointwise_max_violation{0.0};
  /// chi-square p-value of the flowed ensemble against |psi|^2 on the
  /// interior comparison region.
  double chi_square_p{1.0};
  /// Fraction of trajectories that started inside the comparison region and
  /// left it (or halted) during the flow.
  double exited_fraction{0.0};
  std::int64_t samples{0};
  std::int64_t survivors{0};
  std::int64_t halted{0};
  std::int64_t pointwise_used{0};
  double chi_square_statistic{0.0};
  int chi_square_dof{0};
};

/// Verifies that the flow by delta_s preserves the |psi|^2 measure:
/// (i) pointwise, via the flow-map Jacobian at uniformly drawn interior
/// probes; (ii) statistically, by flowing a |psi|^2 ensemble and comparing
/// interior survivors against |psi|^2 by chi-square. The comparison region is
/// the box shrunk by `interior_margin` per side along flow-active axes, which
/// keeps the preimage of the region inside the box for the displacement the
/// flow produces; the boundary leak is surfaced as exited_fraction. Throws
/// InconclusiveError when fewer than min_survivors remain.
EquivarianceReport equivariance_check(const WavePacket& packet, const SpacetimeBox& box,
                                      std::int64_t count, double delta_s, double step,
                                      std::uint64_t seed, const EquivarianceOptions& options = {});

/// Euclidean norm of the change of particle `observed`'s velocity when
/// particle `moved` is displaced. Exactly zero for product-form (single-mode)
/// packets; generically nonzero for entangled ones.
double nonlocality_probe(const WavePacket& packet, const Configuration& q, std::size_t moved,
                         const FourVector& displacement, std::size_t observed,
                         double node_threshold = -1.0);

/// Integrates the trajectory of (packet, initial) and of the boosted pair,
/// then returns the supremum over recorded s of the componentwise distance
/// between boost(X(s)) and X'(s). The scalar parameter s is frame-invariant,
/// so states are compared at equal s. Zero up to integrator rounding when the
/// dynamics is covariant.
double covariance_check(const WavePacket& packet, const Configuration& initial, double rapidity,
                        double s0, double s1, double step, Axis axis = Axis::X);

}  // namespace kgpilot
