#pragma once

// Deterministic builders for test fixtures. Test-data randomness uses
// std::mt19937 so it stays independent of the library's counter RNG.

#include <random>
#include <vector>

#include "kgpilot/probability.hpp"
#include "kgpilot/wavepacket.hpp"

namespace support {

struct PacketSpec {
  std::size_t particles{1};
  std::size_t modes{2};
  double max_momentum{0.5};
  double mass_lo{0.9};
  double mass_hi{1.1};
  // When true the first amplitude dominates the rest, which bounds |psi|
  // away from zero everywhere (no nodes).
  bool dominant_first_mode{false};
  unsigned seed{1};
};

inline kgpilot::WavePacket random_packet(const PacketSpec& spec) {
  std::mt19937 gen(spec.seed);
  std::uniform_real_distribution<double> mass(spec.mass_lo, spec.mass_hi);
  std::uniform_real_distribution<double> momentum(-spec.max_momentum, spec.max_momentum);
  std::uniform_real_distribution<double> angle(0.0, 6.28318530717958648);
  std::uniform_real_distribution<double> magnitude(0.2, 1.0);

  std::vector<double> masses;
  for (std::size_t a = 0; a < spec.particles; ++a) masses.push_back(mass(gen));

  std::vector<kgpilot::PlaneWaveMode> modes;
  double tail = 0.0;
  for (std::size_t k = 0; k < spec.modes; ++k) {
    kgpilot::PlaneWaveMode mode;
    const double r = magnitude(gen);
    mode.amplitude = std::polar(r, angle(gen));
    if (k > 0) tail += r;
    for (std::size_t a = 0; a < spec.particles; ++a)
      mode.momenta.push_back({momentum(gen), momentum(gen), momentum(gen)});
    modes.push_back(std::move(mode));
  }
  if (spec.dominant_first_mode && spec.modes > 1)
    modes[0].amplitude = std::polar(tail + 0.8, std::arg(modes[0].amplitude));

  // Keep sum|c| of order one so residual scales stay comparable across seeds.
  double l1 = 0.0;
  for (const auto& mode : modes) l1 += std::abs(mode.amplitude);
  for (auto& mode : modes) mode.amplitude /= l1;
  return kgpilot::WavePacket(std::move(masses), std::move(modes));
}

inline kgpilot::Configuration random_configuration(std::size_t particles, double extent,
                                                   std::mt19937& gen) {
  std::uniform_real_distribution<double> coord(-extent, extent);
  std::vector<kgpilot::FourVector> points;
  for (std::size_t a = 0; a < particles; ++a)
    points.emplace_back(coord(gen), coord(gen), coord(gen), coord(gen));
  return kgpilot::Configuration(std::move(points));
}

// Draw until |psi| exceeds floor_fraction * sum|c_k|.
inline kgpilot::Configuration random_configuration_away_from_nodes(
    const kgpilot::WavePacket& packet, double extent, std::mt19937& gen,
    double floor_fraction = 0.1) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    kgpilot::Configuration q = random_configuration(packet.particle_count(), extent, gen);
    if (std::abs(kgpilot::evaluate(packet, q)) > floor_fraction * packet.amplitude_l1()) return q;
  }
  throw std::runtime_error("no configuration away from nodes found");
}

// 1-particle, two-mode 1+1D fixture without nodes: |c1| > |c2| bounds |psi|
// within [0.4, 1.6]. Momentum 0 vs 0.5 along x.
inline kgpilot::WavePacket two_mode_1p1d() {
  kgpilot::PlaneWaveMode rest{{1.0, 0.0}, {{0.0, 0.0, 0.0}}};
  kgpilot::PlaneWaveMode moving{{0.6, 0.0}, {{0.5, 0.0, 0.0}}};
  return kgpilot::WavePacket({1.0}, {rest, moving});
}

// Matching box for the equivariance fixture: wide in (t, x) so the interior
// margin dominates the flow displacement, thin in the unused axes.
inline kgpilot::SpacetimeBox box_1p1d(double extent = 8.0) {
  return kgpilot::SpacetimeBox::uniform(
      1, {kgpilot::Interval{0.0, extent}, kgpilot::Interval{0.0, extent},
          kgpilot::Interval{-0.5, 0.5}, kgpilot::Interval{-0.5, 0.5}});
}

// Entangled two-particle fixture: two modes with different momentum pairs.
inline kgpilot::WavePacket entangled_two_particle() {
  kgpilot::PlaneWaveMode first{{1.0, 0.0}, {{0.4, 0.0, 0.0}, {-0.3, 0.0, 0.0}}};
  kgpilot::PlaneWaveMode second{{0.8, 0.0}, {{-0.2, 0.0, 0.0}, {0.5, 0.0, 0.0}}};
  return kgpilot::WavePacket({1.0, 1.0}, {first, second});
}

// Product-form two-particle fixture: a single mode factorizes exactly.
inline kgpilot::WavePacket product_two_particle() {
  kgpilot::PlaneWaveMode only{{0.7, 0.2}, {{0.3, -0.1, 0.0}, {0.0, 0.2, 0.4}}};
  return kgpilot::WavePacket({1.0, 1.5}, {only});
}

inline kgpilot::WavePacket plane_wave(kgpilot::ThreeVector p = {0.3, 0.0, 0.0}, double mass = 1.0) {
  return kgpilot::WavePacket({mass}, {kgpilot::PlaneWaveMode{{1.0, 0.0}, {p}}});
}

}  // namespace support
