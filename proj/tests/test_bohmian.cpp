#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kgpilot/bohmian.hpp"
#include "kgpilot/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kgpilot;

TEST_CASE("plane-wave phase gradient is -p_mu") {
  const WavePacket packet = support::plane_wave({0.4, -0.1, 0.25}, 1.2);
  const FourVector p_lower = lower_index(packet.mode_momentum(0, 0));
  std::mt19937 gen(3);
  for (int i = 0; i < 20; ++i) {
    const Configuration q = support::random_configuration(1, 4.0, gen);
    const FourVector ds = phase_gradient(packet, q, 0);
    CHECK(max_abs_component(ds + p_lower) <= 1e-12);
  }
}

TEST_CASE("product packets decouple: phase gradient ignores the other particle") {
  const WavePacket packet = support::product_two_particle();
  std::mt19937 gen(7);
  const Configuration q = support::random_configuration(2, 2.0, gen);
  const FourVector base = phase_gradient(packet, q, 0);
  for (int i = 0; i < 10; ++i) {
    Configuration moved = q;
    moved[1] = support::random_configuration(1, 3.0, gen)[0];
    const FourVector shifted = phase_gradient(packet, moved, 0);
    CHECK(max_abs_component(shifted - base) <= 1e-12);
    CHECK(max_abs_component(base + lower_index(packet.mode_momentum(0, 0))) <= 1e-12);
  }
}

TEST_CASE("phase gradient matches the finite-difference unwrapped-phase oracle") {
  const WavePacket packet = support::two_mode_1p1d();
  const Configuration q(std::vector<FourVector>{{0.8, 1.3, 0.0, 0.0}});
  const FourVector ds = phase_gradient(packet, q, 0);
  for (std::size_t mu = 0; mu < 4; ++mu) {
    const double fd = oracle::fd_phase_gradient_component(packet, q, 0, mu, 1e-5);
    CHECK(std::fabs(ds[mu] - fd) <= 1e-7);
  }
}

TEST_CASE("phase gradient and velocity raise node errors at nodes") {
  // equal amplitudes create true nodes; x = -2 pi at t = 0 is one
  const WavePacket noded(
      {1.0}, {PlaneWaveMode{{1.0, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{1.0, 0.0}, {{0.5, 0.0, 0.0}}}});
  const Configuration at_node(std::vector<FourVector>{{0.0, -2.0 * std::numbers::pi, 0.0, 0.0}});
  CHECK_THROWS_AS(phase_gradient(noded, at_node, 0), NodeError);
  CHECK_THROWS_AS(velocity_field(noded, at_node), NodeError);
  try {
    velocity_field(noded, at_node);
  } catch (const NodeError& e) {
    REQUIRE(e.configuration_coords().size() == 4);
    CHECK(e.configuration_coords()[1] == doctest::Approx(-2.0 * std::numbers::pi));
    CHECK(e.psi_modulus() <= e.threshold());
  }
}

TEST_CASE("plane-wave velocity equals the mode momentum") {
  const WavePacket packet = support::plane_wave({0.3, 0.2, -0.4}, 1.5);
  const FourVector p = packet.mode_momentum(0, 0);
  std::mt19937 gen(11);
  for (int i = 0; i < 20; ++i) {
    const VelocitySample sample =
        velocity_field(packet, support::random_configuration(1, 3.0, gen));
    CHECK(max_abs_component(sample.velocities[0] - p) <= 1e-12);
    CHECK(sample.velocities[0].t > 0.0);
  }

  const WavePacket rest = support::plane_wave({0.0, 0.0, 0.0}, 1.0);
  const VelocitySample sample = velocity_field(rest, Configuration({{0.4, 1.0, -2.0, 0.3}}));
  CHECK(max_abs_component(sample.velocities[0] - FourVector{1, 0, 0, 0}) <= 1e-15);
}

TEST_CASE("entangled velocities match the finite-difference oracle") {
  const WavePacket packet = support::entangled_two_particle();
  std::mt19937 gen(13);
  for (int i = 0; i < 25; ++i) {
    const Configuration q = support::random_configuration_away_from_nodes(packet, 2.0, gen, 0.1);
    const VelocitySample sample = velocity_field(packet, q);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t mu = 0; mu < 4; ++mu) {
        const double fd = oracle::fd_phase_gradient_component(packet, q, a, mu, 1e-5);
        // v^mu = -g^{mu nu} dS_nu
        const double expected = (mu == 0 ? -fd : fd);
        CHECK(std::fabs(sample.velocities[a][mu] - expected) <= 1e-7);
      }
  }
}

TEST_CASE("plane-wave trajectories are straight spacetime lines") {
  const WavePacket packet = support::plane_wave({0.5, 0.0, 0.1}, 1.0);
  const FourVector p = packet.mode_momentum(0, 0);
  const Configuration initial(std::vector<FourVector>{{0.1, -0.3, 0.0, 0.2}});
  const Trajectory traj = integrate_trajectory(packet, initial, 0.0, 2.0, 1e-3);
  REQUIRE(traj.status == TrajectoryStatus::Completed);
  REQUIRE(traj.states.size() == 2001);
  for (std::size_t i = 0; i < traj.states.size(); i += 100) {
    const FourVector expected = initial[0] + p * traj.s_values[i];
    CHECK(max_abs_component(traj.states[i][0] - expected) <= 1e-12);
  }
}

TEST_CASE("empty span returns the initial state only") {
  const WavePacket packet = support::plane_wave();
  const Configuration initial(std::vector<FourVector>{{0.0, 0.0, 0.0, 0.0}});
  const Trajectory traj = integrate_trajectory(packet, initial, 1.5, 1.5, 1e-3);
  CHECK(traj.states.size() == 1);
  CHECK(traj.s_values[0] == 1.5);
  CHECK(traj.status == TrajectoryStatus::Completed);
}

TEST_CASE("integration rejects bad parameters and initial nodes") {
  const WavePacket packet = support::plane_wave();
  const Configuration initial(std::vector<FourVector>{{0, 0, 0, 0}});
  CHECK_THROWS_AS(integrate_trajectory(packet, initial, 0, 1, 0.0), InvalidParameterError);
  CHECK_THROWS_AS(integrate_trajectory(packet, Configuration(std::vector<FourVector>(2)), 0, 1, 1e-2),
                  DimensionError);

  const WavePacket noded(
      {1.0}, {PlaneWaveMode{{1.0, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{1.0, 0.0}, {{0.5, 0.0, 0.0}}}});
  const Configuration at_node(std::vector<FourVector>{{0.0, -2.0 * std::numbers::pi, 0.0, 0.0}});
  CHECK_THROWS_AS(integrate_trajectory(noded, at_node, 0, 1, 1e-2), NodeError);
}

TEST_CASE("a huge node threshold halts the trajectory mid-flight") {
  const WavePacket packet = support::two_mode_1p1d();
  // |psi(0, -pi)| = sqrt(1.36) > 1; the flow drifts toward the |psi| = 1
  // contour within a few units of s
  const Configuration initial(std::vector<FourVector>{{0.0, -std::numbers::pi, 0.0, 0.0}});
  IntegrationOptions options;
  options.node_threshold = 1.0;
  const Trajectory traj = integrate_trajectory(packet, initial, 0.0, 10.0, 1e-2, options);
  CHECK(traj.status == TrajectoryStatus::HaltedAtNode);
  CHECK(traj.states.size() >= 1);
  CHECK(traj.states.size() < 1001);
}

TEST_CASE("a domain box halts the trajectory when the state leaves") {
  const WavePacket packet = support::plane_wave({0.4, 0.0, 0.0}, 1.0);
  const Configuration initial(std::vector<FourVector>{{0.1, 0.1, 0.0, 0.0}});
  IntegrationOptions options;
  options.domain = SpacetimeBox::uniform(
      1, {Interval{0, 1}, Interval{-1, 1}, Interval{-1, 1}, Interval{-1, 1}});
  const Trajectory traj = integrate_trajectory(packet, initial, 0.0, 5.0, 1e-2, options);
  CHECK(traj.status == TrajectoryStatus::HaltedOutOfDomain);
  // the exiting state is recorded last; every earlier state is inside
  CHECK(!options.domain->contains(traj.states.back()));
  CHECK(options.domain->contains(traj.states[traj.states.size() - 2]));
}

TEST_CASE("backward integration and flow invertibility") {
  const WavePacket packet = support::two_mode_1p1d();
  const Configuration initial(std::vector<FourVector>{{1.0, 2.0, 0.0, 0.0}});
  const Trajectory forward = integrate_trajectory(packet, initial, 0.0, 1.0, 1e-3);
  REQUIRE(forward.status == TrajectoryStatus::Completed);
  const Trajectory back =
      integrate_trajectory(packet, forward.states.back(), 1.0, 0.0, 1e-3);
  REQUIRE(back.status == TrajectoryStatus::Completed);
  CHECK(max_abs_component(back.states.back()[0] - initial[0]) <= 1e-8);
}

TEST_CASE("step-halving self-convergence is fourth order") {
  // strong amplitude contrast and momentum gap so the field curvature along
  // the trajectory puts the integrator error well above rounding
  const WavePacket packet(
      {1.0}, {PlaneWaveMode{{1.0, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{0.85, 0.0}, {{1.5, 0.0, 0.0}}}});
  const Configuration initial(std::vector<FourVector>{{0.1, 1.8, 0.0, 0.0}});
  // Richardson-extrapolated reference from two fine runs
  const Trajectory fine = integrate_trajectory(packet, initial, 0.0, 1.0, 1e-3);
  const Trajectory finer = integrate_trajectory(packet, initial, 0.0, 1.0, 5e-4);
  const FourVector reference =
      finer.states.back()[0] + (finer.states.back()[0] - fine.states.back()[0]) * (1.0 / 15.0);

  const Trajectory coarse = integrate_trajectory(packet, initial, 0.0, 1.0, 0.05);
  const Trajectory halved = integrate_trajectory(packet, initial, 0.0, 1.0, 0.025);
  const double e_coarse = max_abs_component(coarse.states.back()[0] - reference);
  const double e_halved = max_abs_component(halved.states.back()[0] - reference);
  REQUIRE(e_halved > 0.0);
  const double order = std::log2(e_coarse / e_halved);
  CHECK(order >= 3.5);
  CHECK(order <= 4.5);
  // the fine run itself is converged to well below 1e-9
  CHECK(max_abs_component(fine.states.back()[0] - reference) <= 1e-9);
}

TEST_CASE("the error monitor reports step errors without changing results") {
  const WavePacket packet(
      {1.0}, {PlaneWaveMode{{1.0, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{0.85, 0.0}, {{1.5, 0.0, 0.0}}}});
  const Configuration initial(std::vector<FourVector>{{0.1, 1.8, 0.0, 0.0}});
  IntegrationOptions monitored;
  monitored.error_monitor = true;
  const Trajectory a = integrate_trajectory(packet, initial, 0.0, 1.0, 5e-2, monitored);
  const Trajectory b = integrate_trajectory(packet, initial, 0.0, 1.0, 5e-2);
  CHECK(a.max_halfstep_error > 0.0);
  CHECK(a.max_halfstep_error < 1e-6);
  CHECK(max_abs_component(a.states.back()[0] - b.states.back()[0]) == 0.0);
  CHECK(b.max_halfstep_error == 0.0);
}

TEST_CASE("continuity residual vanishes for a plane wave") {
  const WavePacket packet = support::plane_wave({0.4, 0.1, 0.0}, 1.1);
  std::mt19937 gen(17);
  for (int i = 0; i < 10; ++i) {
    const Configuration q = support::random_configuration(1, 3.0, gen);
    CHECK(continuity_residual(packet, q, 1e-4) <= 1e-10);
  }
}

TEST_CASE("continuity residual is small and second order for superpositions") {
  std::mt19937 gen(19);
  const WavePacket packet = support::two_mode_1p1d();
  std::vector<double> orders;
  for (int i = 0; i < 30; ++i) {
    const Configuration q = support::random_configuration_away_from_nodes(packet, 3.0, gen, 0.2);
    const double fine = continuity_residual(packet, q, 1e-4);
    const double coarse = continuity_residual(packet, q, 1e-3);
    CHECK(fine < 1e-6);
    if (fine > 0.0) orders.push_back(std::log10(coarse / fine));
  }
  std::sort(orders.begin(), orders.end());
  CHECK(orders[orders.size() / 2] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("continuity residual sums over the particles of a product packet") {
  const WavePacket packet = support::product_two_particle();
  std::mt19937 gen(23);
  for (int i = 0; i < 10; ++i) {
    const Configuration q = support::random_configuration(2, 2.0, gen);
    CHECK(continuity_residual(packet, q, 1e-4) <= 1e-6);
  }
}

TEST_CASE("continuity residual raises node errors inside the stencil") {
  const WavePacket noded(
      {1.0}, {PlaneWaveMode{{1.0, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{1.0, 0.0}, {{0.5, 0.0, 0.0}}}});
  const Configuration at_node(std::vector<FourVector>{{0.0, -2.0 * std::numbers::pi, 0.0, 0.0}});
  CHECK_THROWS_AS(continuity_residual(noded, at_node, 1e-4), NodeError);
}

TEST_CASE("nonlocality probe vanishes for product packets") {
  const WavePacket packet = support::product_two_particle();
  std::mt19937 gen(29);
  for (int i = 0; i < 20; ++i) {
    const Configuration q = support::random_configuration(2, 2.0, gen);
    const FourVector displacement{gen() % 7 * 0.1 - 0.3, gen() % 5 * 0.1 - 0.2,
                                  gen() % 3 * 0.1, 0.05};
    CHECK(nonlocality_probe(packet, q, 1, displacement, 0) <= 1e-12);
  }
}

TEST_CASE("nonlocality probe responds for entangled packets and matches the oracle") {
  const WavePacket packet = support::entangled_two_particle();
  const Configuration q(std::vector<FourVector>{{0.3, 0.6, 0.0, 0.0}, {0.1, -0.4, 0.0, 0.0}});
  const FourVector displacement{0.3, 0.2, 0.0, 0.0};
  const double probe = nonlocality_probe(packet, q, 1, displacement, 0);
  CHECK(probe > 1e-3);

  // reproduce via the finite-difference phase oracle at both configurations
  Configuration moved = q;
  moved[1] = moved[1] + displacement;
  double sum_sq = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    const double before = oracle::fd_phase_gradient_component(packet, q, 0, mu, 1e-5);
    const double after = oracle::fd_phase_gradient_component(packet, moved, 0, mu, 1e-5);
    const double sign = (mu == 0 ? -1.0 : 1.0);
    const double diff = sign * (after - before);
    sum_sq += diff * diff;
  }
  CHECK(std::sqrt(sum_sq) == doctest::Approx(probe).epsilon(1e-4));
}

TEST_CASE("zero displacement probes exactly zero") {
  const WavePacket packet = support::entangled_two_particle();
  const Configuration q(std::vector<FourVector>{{0.2, 0.4, 0.0, 0.0}, {0.5, -0.1, 0.0, 0.0}});
  CHECK(nonlocality_probe(packet, q, 1, FourVector{0, 0, 0, 0}, 0) == 0.0);
}

TEST_CASE("covariance: zero rapidity and plane waves are exact") {
  const WavePacket packet = support::two_mode_1p1d();
  const Configuration initial(std::vector<FourVector>{{0.4, 1.2, 0.0, 0.0}});
  CHECK(covariance_check(packet, initial, 0.0, 0.0, 1.0, 1e-2) == 0.0);

  const WavePacket plane = support::plane_wave({0.5, 0.0, 0.0}, 1.0);
  CHECK(covariance_check(plane, initial, 0.8, 0.0, 5.0, 1e-2) <= 1e-12);
}

TEST_CASE("covariance of the two-mode flow") {
  const WavePacket packet = support::two_mode_1p1d();
  const Configuration initial(std::vector<FourVector>{{0.4, 1.2, 0.0, 0.0}});
  CHECK(covariance_check(packet, initial, 0.5, 0.0, 1.0, 1e-3) <= 1e-6);
}

TEST_CASE("equivariance of the rigid plane-wave flow") {
  const WavePacket packet = support::plane_wave({0.25, 0.0, 0.0}, 1.0);
  const SpacetimeBox box = support::box_1p1d(8.0);
  const EquivarianceReport report = equivariance_check(packet, box, 5000, 0.5, 5e-3, 7);
  CHECK(report.pointwise_max_violation <= 1e-6);
  CHECK(report.chi_square_p > 0.01);
  CHECK(report.exited_fraction < 0.3);
  CHECK(report.halted == 0);
}

TEST_CASE("equivariance smoke test on the two-mode packet") {
  const WavePacket packet = support::two_mode_1p1d();
  const SpacetimeBox box = support::box_1p1d(8.0);
  const EquivarianceReport report = equivariance_check(packet, box, 20000, 0.5, 5e-3, 11);
  CHECK(report.pointwise_max_violation <= 1e-3);
  CHECK(report.chi_square_p > 0.01);
  CHECK(report.exited_fraction < 0.3);
}

TEST_CASE("equivariance with too small an ensemble is inconclusive") {
  const WavePacket packet = support::two_mode_1p1d();
  const SpacetimeBox box = support::box_1p1d(8.0);
  CHECK_THROWS_AS(equivariance_check(packet, box, 50, 0.5, 1e-2, 3), InconclusiveError);
}
