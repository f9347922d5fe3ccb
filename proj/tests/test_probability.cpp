#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kgpilot/errors.hpp"
#include "kgpilot/probability.hpp"
#include "kgpilot/quadrature.hpp"
#include "kgpilot/stats.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kgpilot;

namespace {

SpacetimeBox unit_box(std::size_t particles) {
  return SpacetimeBox::uniform(particles, {Interval{0, 1}, Interval{0, 1}, Interval{0, 1},
                                           Interval{0, 1}});
}

}  // namespace

TEST_CASE("box validation and volumes") {
  CHECK_THROWS_AS(SpacetimeBox::uniform(1, {Interval{0, 0}, Interval{0, 1}, Interval{0, 1},
                                            Interval{0, 1}}),
                  InvalidParameterError);
  CHECK_THROWS_AS(SpacetimeBox::uniform(1, {Interval{1, 0}, Interval{0, 1}, Interval{0, 1},
                                            Interval{0, 1}}),
                  InvalidParameterError);
  const SpacetimeBox box = SpacetimeBox::uniform(
      2, {Interval{0, 2}, Interval{0, 1}, Interval{-1, 1}, Interval{0, 0.5}});
  CHECK(box.four_volume() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(box.spatial_volume() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(box.contains(Configuration({{1.0, 0.5, 0.0, 0.25}, {0.1, 0.9, -0.9, 0.4}})));
  CHECK(!box.contains(Configuration({{3.0, 0.5, 0.0, 0.25}, {0.1, 0.9, -0.9, 0.4}})));
}

TEST_CASE("density of a unit plane wave is one everywhere") {
  const WavePacket packet = support::plane_wave({0.7, -0.1, 0.2}, 1.1);
  std::mt19937 gen(3);
  for (int i = 0; i < 50; ++i) {
    const Configuration q = support::random_configuration(1, 5.0, gen);
    CHECK(density(packet, q) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("destructive interference yields an exact node") {
  // equal amplitudes; phase difference pi at x = pi / dp
  const WavePacket packet(
      {1.0}, {PlaneWaveMode{{1.0, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{1.0, 0.0}, {{0.5, 0.0, 0.0}}}});
  const double e0 = packet.mode_momentum(0, 0).t;
  const double e1 = packet.mode_momentum(1, 0).t;
  // choose t = 0; phase difference is (e1 - e0) * 0 - 0.5 x = -0.5 x = pi
  const double x = -2.0 * std::numbers::pi;
  (void)e0;
  (void)e1;
  const Configuration q(std::vector<FourVector>{{0.0, x, 0.0, 0.0}});
  CHECK(density(packet, q) <= 1e-25);
}

TEST_CASE("density equals |oracle evaluation|^2 at random points") {
  const WavePacket packet = support::random_packet({.particles = 2, .modes = 6, .seed = 9});
  std::mt19937 gen(29);
  for (int i = 0; i < 1000; ++i) {
    const Configuration q = support::random_configuration(2, 4.0, gen);
    const double reference = std::norm(oracle::naive_evaluate(packet, q));
    CHECK(density(packet, q) == doctest::Approx(reference).epsilon(1e-11));
  }
}

TEST_CASE("box integral of a unit plane wave is the 4-volume") {
  const WavePacket packet = support::plane_wave({0.4, 0.0, 0.0});
  const SpacetimeBox box = SpacetimeBox::uniform(
      1, {Interval{0, 2}, Interval{0, 1}, Interval{0, 1}, Interval{0, 2}});
  const DensityReport report = box_integral(packet, box, IntegrationMethod::TensorQuadrature, 16);
  CHECK(report.value == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(report.estimated_error <= 1e-10);
}

TEST_CASE("box integral of a zero-amplitude packet vanishes") {
  const WavePacket packet({1.0}, {PlaneWaveMode{{0.0, 0.0}, {{0.2, 0.0, 0.0}}}});
  const DensityReport report =
      box_integral(packet, unit_box(1), IntegrationMethod::TensorQuadrature, 8);
  CHECK(report.value == 0.0);
}

TEST_CASE("box integral resolution minimums") {
  const WavePacket packet = support::plane_wave();
  CHECK_THROWS_AS(box_integral(packet, unit_box(1), IntegrationMethod::TensorQuadrature, 1),
                  InvalidParameterError);
  CHECK_THROWS_AS(box_integral(packet, unit_box(1), IntegrationMethod::MonteCarlo, 9),
                  InvalidParameterError);
}

TEST_CASE("quadrature and monte carlo cross-validate on a two-mode packet") {
  const WavePacket packet = support::two_mode_1p1d();
  const SpacetimeBox box = unit_box(1);
  const DensityReport quad = box_integral(packet, box, IntegrationMethod::TensorQuadrature, 64);
  const DensityReport mc = box_integral(packet, box, IntegrationMethod::MonteCarlo, 1000000, 99);
  CHECK(std::fabs(quad.value - mc.value) <=
        3.0 * std::sqrt(mc.estimated_error * mc.estimated_error +
                        quad.estimated_error * quad.estimated_error));
  CHECK(mc.evaluation_count == 1000000);
}

TEST_CASE("monte carlo integral is reproducible and seed-sensitive") {
  const WavePacket packet = support::two_mode_1p1d();
  const DensityReport a = box_integral(packet, unit_box(1), IntegrationMethod::MonteCarlo, 20000, 5);
  const DensityReport b = box_integral(packet, unit_box(1), IntegrationMethod::MonteCarlo, 20000, 5);
  const DensityReport c = box_integral(packet, unit_box(1), IntegrationMethod::MonteCarlo, 20000, 6);
  CHECK(a.value == b.value);
  CHECK(a.value != c.value);
}

TEST_CASE("quadrature error shrinks with resolution") {
  const WavePacket packet = support::two_mode_1p1d();
  const SpacetimeBox box = support::box_1p1d(4.0);
  const double reference =
      box_integral(packet, box, IntegrationMethod::TensorQuadrature, 64).value;
  const double e4 =
      std::fabs(box_integral(packet, box, IntegrationMethod::TensorQuadrature, 4).value - reference);
  const double e16 =
      std::fabs(box_integral(packet, box, IntegrationMethod::TensorQuadrature, 16).value - reference);
  CHECK(e16 < e4);
  CHECK(e16 <= 1e-8);
}

TEST_CASE("normalize scales a plane wave by the inverse root volume") {
  const WavePacket packet = support::plane_wave({0.2, 0.0, 0.0});
  const SpacetimeBox box = SpacetimeBox::uniform(
      1, {Interval{0, 1}, Interval{0, 4}, Interval{0, 1}, Interval{0, 1}});  // volume 4
  const WavePacket normalized = normalize(packet, box);
  CHECK(std::abs(normalized.modes()[0].amplitude) == doctest::Approx(0.5).epsilon(1e-12));
  const double post = box_integral(normalized, box, IntegrationMethod::TensorQuadrature, 16).value;
  CHECK(post == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize is idempotent") {
  const WavePacket packet = support::two_mode_1p1d();
  const SpacetimeBox box = support::box_1p1d(2.0);
  const WavePacket once = normalize(packet, box);
  const WavePacket twice = normalize(once, box);
  for (std::size_t k = 0; k < once.mode_count(); ++k)
    CHECK(std::abs(once.modes()[k].amplitude - twice.modes()[k].amplitude) <= 1e-10);
}

TEST_CASE("normalized random packets integrate to one") {
  for (unsigned seed : {14u, 15u, 16u}) {
    // 1+1D: zero out y/z momenta so only two axes are active
    WavePacket base = support::random_packet({.particles = 1, .modes = 4, .seed = seed});
    std::vector<PlaneWaveMode> modes = base.modes();
    for (PlaneWaveMode& mode : modes)
      for (ThreeVector& p : mode.momenta) {
        p.y = 0.0;
        p.z = 0.0;
      }
    const WavePacket packet(base.masses(), modes);
    const SpacetimeBox box = support::box_1p1d(3.0);
    const WavePacket normalized = normalize(packet, box, 64);
    const double integral =
        box_integral(normalized, box, IntegrationMethod::TensorQuadrature, 64).value;
    CHECK(integral >= 0.999);
    CHECK(integral <= 1.001);
  }
}

TEST_CASE("normalize rejects the zero packet") {
  const WavePacket packet({1.0}, {PlaneWaveMode{{0.0, 0.0}, {{0.0, 0.0, 0.0}}}});
  CHECK_THROWS_AS(normalize(packet, unit_box(1)), DegeneratePacketError);
}

TEST_CASE("marginal normalization of a plane wave is the spatial volume") {
  const WavePacket packet = support::plane_wave({0.3, 0.1, 0.0});
  const SpacetimeBox box = SpacetimeBox::uniform(
      1, {Interval{0, 1}, Interval{0, 2}, Interval{0, 1.5}, Interval{0, 1}});  // V_s = 3
  const DensityReport report = marginal_normalization(packet, {0.7}, box);
  CHECK(report.value == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("time integral of the marginal recovers the box normalization") {
  const WavePacket packet = normalize(support::two_mode_1p1d(), support::box_1p1d(2.0), 64);
  const SpacetimeBox box = support::box_1p1d(2.0);
  // outer Gauss-Legendre in t over inner spatial marginals at a different
  // resolution, so the nesting is not trivially the box quadrature
  const GaussLegendreRule t_rule = gauss_legendre(64, 0.0, 2.0);
  double integral = 0.0;
  for (std::size_t i = 0; i < t_rule.nodes.size(); ++i)
    integral += t_rule.weights[i] *
                marginal_normalization(packet, {t_rule.nodes[i]}, box, 48).value;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("time-independent packets have a constant marginal") {
  // two rest modes: density varies in nothing
  const WavePacket packet(
      {1.0}, {PlaneWaveMode{{0.6, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{0.4, 0.0}, {{0.0, 0.0, 0.0}}}});
  const SpacetimeBox box = unit_box(1);
  const double n1 = marginal_normalization(packet, {0.1}, box).value;
  const double n2 = marginal_normalization(packet, {0.9}, box).value;
  CHECK(n1 == doctest::Approx(n2).epsilon(1e-13));
}

TEST_CASE("conditional density of a plane wave is uniform 1/V_s") {
  const WavePacket packet = support::plane_wave({0.5, 0.0, 0.0});
  const SpacetimeBox box = SpacetimeBox::uniform(
      1, {Interval{0, 1}, Interval{0, 2}, Interval{0, 1}, Interval{0, 1}});
  const double n = marginal_normalization(packet, {0.4}, box).value;
  CHECK(n == doctest::Approx(2.0).epsilon(1e-12));
  for (double x : {0.1, 0.5, 1.9})
    CHECK(conditional_density(packet, {0.4}, {{x, 0.5, 0.5}}, n) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("conditional density integrates to one") {
  const WavePacket packet = support::two_mode_1p1d();
  const SpacetimeBox box = support::box_1p1d(2.0);
  for (double t : {0.25, 1.3}) {
    const double n = marginal_normalization(packet, {t}, box, 64).value;
    const GaussLegendreRule x_rule = gauss_legendre(48, 0.0, 2.0);
    double integral = 0.0;
    for (std::size_t i = 0; i < x_rule.nodes.size(); ++i)
      integral +=
          x_rule.weights[i] * conditional_density(packet, {t}, {{x_rule.nodes[i], 0.0, 0.0}}, n);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("conditional density rejects degenerate normalizations and hits nodes") {
  const WavePacket packet = support::two_mode_1p1d();
  CHECK_THROWS_AS(conditional_density(packet, {0.0}, {{0.0, 0.0, 0.0}}, 0.0),
                  DegenerateConditionError);
  // equal-amplitude variant has a true node; conditional density vanishes there
  const WavePacket noded(
      {1.0}, {PlaneWaveMode{{1.0, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{1.0, 0.0}, {{0.5, 0.0, 0.0}}}});
  const double value =
      conditional_density(noded, {0.0}, {{-2.0 * std::numbers::pi, 0.0, 0.0}}, 1.0);
  CHECK(value <= 1e-25);
}

TEST_CASE("ensemble sampling is reproducible and seed-keyed") {
  const WavePacket packet = support::two_mode_1p1d();
  const SpacetimeBox box = support::box_1p1d(4.0);
  const EnsembleResult a = sample_ensemble(packet, box, 500, 11);
  const EnsembleResult b = sample_ensemble(packet, box, 500, 11);
  const EnsembleResult c = sample_ensemble(packet, box, 500, 12);
  REQUIRE(a.samples.size() == 500);
  bool identical = true, differs = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    for (std::size_t p = 0; p < 1; ++p)
      for (std::size_t mu = 0; mu < 4; ++mu) {
        identical = identical && a.samples[i][p][mu] == b.samples[i][p][mu];
        differs = differs || a.samples[i][p][mu] != c.samples[i][p][mu];
      }
  CHECK(identical);
  CHECK(differs);
  CHECK(a.proposals == b.proposals);
  CHECK(a.acceptance_rate > 0.1);
}

TEST_CASE("plane-wave ensembles are uniform per axis") {
  const WavePacket packet = support::plane_wave({0.3, 0.0, 0.0});
  const SpacetimeBox box = SpacetimeBox::uniform(
      1, {Interval{0, 1}, Interval{0, 2}, Interval{-1, 1}, Interval{0.5, 1.5}});
  const EnsembleResult ensemble = sample_ensemble(packet, box, 100000, 314);
  for (std::size_t mu = 0; mu < 4; ++mu) {
    const Interval iv = box.axis(0, mu);
    std::vector<std::int64_t> observed(20, 0);
    for (const Configuration& q : ensemble.samples) {
      auto bin = static_cast<std::size_t>((q[0][mu] - iv.lo) / iv.width() * 20.0);
      if (bin >= 20) bin = 19;
      ++observed[bin];
    }
    const std::vector<double> expected(20, 100000.0 / 20.0);
    const ChiSquareResult chi = chi_square_binned(observed, expected);
    CHECK(chi.p_value > 0.01);
  }
}

TEST_CASE("two-mode ensemble histogram matches the density") {
  const WavePacket packet = support::two_mode_1p1d();
  const SpacetimeBox box = support::box_1p1d(4.0);
  const std::int64_t count = 100000;
  const EnsembleResult ensemble = sample_ensemble(packet, box, count, 271);

  const int bins = 20;
  std::vector<std::int64_t> observed(bins * bins, 0);
  for (const Configuration& q : ensemble.samples) {
    auto bt = static_cast<int>(q[0].t / 4.0 * bins);
    auto bx = static_cast<int>(q[0].x / 4.0 * bins);
    bt = std::min(bt, bins - 1);
    bx = std::min(bx, bins - 1);
    ++observed[static_cast<std::size_t>(bt * bins + bx)];
  }

  // expected from a per-cell 4-point tensor rule
  std::vector<double> expected(bins * bins, 0.0);
  const GaussLegendreRule cell = gauss_legendre(2, 0.0, 4.0 / bins);
  double total = 0.0;
  for (int bt = 0; bt < bins; ++bt)
    for (int bx = 0; bx < bins; ++bx) {
      double integral = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
          const Configuration q(std::vector<FourVector>{
              {bt * 4.0 / bins + cell.nodes[i], bx * 4.0 / bins + cell.nodes[j], 0.0, 0.0}});
          integral += cell.weights[i] * cell.weights[j] * density(packet, q);
        }
      expected[static_cast<std::size_t>(bt * bins + bx)] = integral;
      total += integral;
    }
  for (double& e : expected) e *= static_cast<double>(count) / total;

  const ChiSquareResult chi = chi_square_binned(observed, expected);
  CHECK(chi.p_value > 0.01);
}

TEST_CASE("sampling a zero packet raises the degenerate error") {
  const WavePacket packet({1.0}, {PlaneWaveMode{{0.0, 0.0}, {{0.0, 0.0, 0.0}}}});
  CHECK_THROWS_AS(sample_ensemble(packet, unit_box(1), 10, 0), DegeneratePacketError);
}

TEST_CASE("a nearly cancelling packet stalls the sampler with the envelope error") {
  // amplitudes 1 and -1 with a tiny momentum gap: |psi|^2 <= (dp L)^2 ~ 1e-10
  // on the unit box while the envelope is (sum|c|)^2 = 4
  const WavePacket packet(
      {1.0}, {PlaneWaveMode{{1.0, 0.0}, {{0.0, 0.0, 0.0}}}, PlaneWaveMode{{-1.0, 0.0}, {{1e-5, 0.0, 0.0}}}});
  CHECK_THROWS_AS(sample_ensemble(packet, unit_box(1), 1, 0), PathologicalEnvelopeError);
}
