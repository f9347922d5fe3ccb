#include <benchmark/benchmark.h>

#include <random>

#include "kgpilot/bohmian.hpp"
#include "kgpilot/probability.hpp"
#include "kgpilot/transition.hpp"
#include "kgpilot/wavepacket.hpp"

namespace {

using namespace kgpilot;

WavePacket bench_packet(std::size_t particles, std::size_t modes) {
  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> momentum(-0.8, 0.8);
  std::vector<double> masses(particles, 1.0);
  std::vector<PlaneWaveMode> mode_list;
  for (std::size_t k = 0; k < modes; ++k) {
    PlaneWaveMode mode;
    mode.amplitude = {1.0 / static_cast<double>(modes), 0.0};
    for (std::size_t a = 0; a < particles; ++a)
      mode.momenta.push_back({momentum(gen), momentum(gen), momentum(gen)});
    mode_list.push_back(std::move(mode));
  }
  return WavePacket(std::move(masses), std::move(mode_list));
}

Configuration bench_configuration(std::size_t particles) {
  Configuration q;
  for (std::size_t a = 0; a < particles; ++a)
    q.points.emplace_back(0.3 * static_cast<double>(a) + 0.1, -0.2, 0.4, 0.05);
  return q;
}

void BM_Evaluate(benchmark::State& state) {
  const auto particles = static_cast<std::size_t>(state.range(0));
  const auto modes = static_cast<std::size_t>(state.range(1));
  const WavePacket packet = bench_packet(particles, modes);
  Configuration q = bench_configuration(particles);
  double t = 0.0;
  for (auto _ : state) {
    q[0].t = (t += 1e-3);
    benchmark::DoNotOptimize(evaluate(packet, q));
  }
}
BENCHMARK(BM_Evaluate)->Args({1, 2})->Args({1, 8})->Args({2, 8})->Args({2, 64});

void BM_EvaluateWithGradients(benchmark::State& state) {
  const auto particles = static_cast<std::size_t>(state.range(0));
  const WavePacket packet = bench_packet(particles, 8);
  Configuration q = bench_configuration(particles);
  double t = 0.0;
  for (auto _ : state) {
    q[0].t = (t += 1e-3);
    benchmark::DoNotOptimize(evaluate_with_gradients(packet, q));
  }
}
BENCHMARK(BM_EvaluateWithGradients)->Arg(1)->Arg(2);

void BM_VelocityField(benchmark::State& state) {
  const WavePacket packet = bench_packet(2, 8);
  Configuration q = bench_configuration(2);
  double t = 0.0;
  for (auto _ : state) {
    q[0].t = (t += 1e-3);
    benchmark::DoNotOptimize(velocity_field(packet, q));
  }
}
BENCHMARK(BM_VelocityField);

void BM_TrajectorySteps(benchmark::State& state) {
  const WavePacket packet = bench_packet(1, static_cast<std::size_t>(state.range(0)));
  const Configuration initial = bench_configuration(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_trajectory(packet, initial, 0.0, 0.1, 1e-3));
  state.SetItemsProcessed(state.iterations() * 100);  // RK4 steps per run
}
BENCHMARK(BM_TrajectorySteps)->Arg(2)->Arg(8);

void BM_BoxIntegralQuadrature(benchmark::State& state) {
  // two density-active axes (1+1D), where 64 points/axis is the default
  PlaneWaveMode rest{{1.0, 0.0}, {{0.0, 0.0, 0.0}}};
  PlaneWaveMode moving{{0.6, 0.0}, {{0.5, 0.0, 0.0}}};
  const WavePacket packet({1.0}, {rest, moving});
  const SpacetimeBox box = SpacetimeBox::uniform(
      1, {Interval{0, 1}, Interval{0, 1}, Interval{0, 1}, Interval{0, 1}});
  for (auto _ : state)
    benchmark::DoNotOptimize(box_integral(packet, box, IntegrationMethod::TensorQuadrature,
                                          static_cast<std::int64_t>(state.range(0))));
}
BENCHMARK(BM_BoxIntegralQuadrature)->Arg(16)->Arg(64);

void BM_SampleEnsemble(benchmark::State& state) {
  const WavePacket packet = bench_packet(1, 2);
  const SpacetimeBox box = SpacetimeBox::uniform(
      1, {Interval{0, 4}, Interval{0, 4}, Interval{-1, 1}, Interval{-1, 1}});
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_ensemble(packet, box, 1000, ++seed));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SampleEnsemble);

void BM_RateIntegral(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rate_integral(100.0, 6.3));
}
BENCHMARK(BM_RateIntegral);

}  // namespace

BENCHMARK_MAIN();
