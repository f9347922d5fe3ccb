#include "kgpilot/wavepacket.hpp"

#include <cmath>
#include <string>

#include "kgpilot/errors.hpp"

namespace kgpilot {

namespace {

constexpr double kAxisTol = 1e-12;

void require_particle_count(const WavePacket& packet, const Configuration& q) {
  if (q.size() != packet.particle_count())
    throw DimensionError("configuration has " + std::to_string(q.size()) + " points, packet has " +
                         std::to_string(packet.particle_count()) + " particles");
}

void require_particle_index(const WavePacket& packet, std::size_t a) {
  if (a >= packet.particle_count())
    throw DimensionError("particle index " + std::to_string(a) + " out of range (n = " +
                         std::to_string(packet.particle_count()) + ")");
}

}  // namespace

double on_shell_energy(const ThreeVector& p, double mass) {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw InvalidParameterError("on_shell_energy: mass must be positive and finite");
  return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z + mass * mass);
}

std::vector<double> flatten(const Configuration& q) {
  std::vector<double> out;
  out.reserve(4 * q.size());
  for (const FourVector& p : q.points) {
    out.push_back(p.t);
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
  }
  return out;
}

Configuration unflatten(std::span<const double> coords) {
  if (coords.size() % 4 != 0)
    throw DimensionError("unflatten: coordinate count must be a multiple of 4");
  Configuration q;
  q.points.reserve(coords.size() / 4);
  for (std::size_t i = 0; i < coords.size(); i += 4)
    q.points.emplace_back(coords[i], coords[i + 1], coords[i + 2], coords[i + 3]);
  return q;
}

WavePacket::WavePacket(std::vector<double> masses, std::vector<PlaneWaveMode> modes) {
  if (masses.empty()) throw InvalidParameterError("WavePacket: at least one particle required");
  if (modes.empty()) throw InvalidParameterError("WavePacket: at least one mode required");
  for (std::size_t a = 0; a < masses.size(); ++a) {
    if (!(masses[a] > 0.0) || !std::isfinite(masses[a]))
      throw InvalidParameterError("WavePacket: masses[" + std::to_string(a) +
                                  "] must be positive and finite");
  }
  const std::size_t n = masses.size();
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k].momenta.size() != n)
      throw DimensionError("WavePacket: modes[" + std::to_string(k) + "] lists " +
                           std::to_string(modes[k].momenta.size()) + " momenta for " +
                           std::to_string(n) + " particles");
    if (!std::isfinite(modes[k].amplitude.real()) || !std::isfinite(modes[k].amplitude.imag()))
      throw InvalidParameterError("WavePacket: modes[" + std::to_string(k) +
                                  "].amplitude must be finite");
    for (const ThreeVector& p : modes[k].momenta)
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
        throw InvalidParameterError("WavePacket: modes[" + std::to_string(k) +
                                    "] momentum components must be finite");
  }

  masses_ = std::move(masses);
  modes_ = std::move(modes);
  momenta_.reserve(modes_.size() * n);
  for (const PlaneWaveMode& mode : modes_)
    for (std::size_t a = 0; a < n; ++a) {
      const ThreeVector& p = mode.momenta[a];
      momenta_.emplace_back(on_shell_energy(p, masses_[a]), p.x, p.y, p.z);
    }
  finalize_derived();
}

WavePacket WavePacket::unchecked_with_energies(std::vector<double> masses,
                                               std::vector<PlaneWaveMode> modes,
                                               const std::vector<std::vector<double>>& energies) {
  WavePacket packet(masses, modes);  // run the regular validation first
  if (energies.size() != packet.mode_count())
    throw DimensionError("unchecked_with_energies: one energy list per mode required");
  const std::size_t n = packet.particle_count();
  for (std::size_t k = 0; k < energies.size(); ++k) {
    if (energies[k].size() != n)
      throw DimensionError("unchecked_with_energies: one energy per particle required");
    for (std::size_t a = 0; a < n; ++a) packet.momenta_[k * n + a].t = energies[k][a];
  }
  packet.finalize_derived();
  return packet;
}

void WavePacket::finalize_derived() {
  amplitude_l1_ = 0.0;
  characteristic_frequency_ = 0.0;
  characteristic_frequency_sq_ = 0.0;
  for (const PlaneWaveMode& mode : modes_) amplitude_l1_ += std::abs(mode.amplitude);
  const std::size_t n = masses_.size();
  for (std::size_t k = 0; k < modes_.size(); ++k)
    for (std::size_t a = 0; a < n; ++a) {
      const FourVector& p = momenta_[k * n + a];
      const double pnorm = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
      characteristic_frequency_ = std::max(characteristic_frequency_, std::fabs(p.t) + pnorm);
      characteristic_frequency_sq_ = std::max(
          characteristic_frequency_sq_, p.t * p.t + pnorm * pnorm + masses_[a] * masses_[a]);
    }
}

WavePacket WavePacket::with_amplitudes_scaled(std::complex<double> factor) const {
  WavePacket out = *this;
  for (PlaneWaveMode& mode : out.modes_) mode.amplitude *= factor;
  out.finalize_derived();
  return out;
}

std::complex<double> evaluate(const WavePacket& packet, const Configuration& q) {
  require_particle_count(packet, q);
  const std::size_t n = packet.particle_count();
  std::complex<double> sum{};
  for (std::size_t k = 0; k < packet.mode_count(); ++k) {
    double phase = 0.0;
    for (std::size_t a = 0; a < n; ++a) phase += minkowski_dot(packet.mode_momentum(k, a), q[a]);
    sum += packet.modes()[k].amplitude * std::polar(1.0, -phase);
  }
  return sum;
}

PacketEvaluation evaluate_with_gradients(const WavePacket& packet, const Configuration& q) {
  require_particle_count(packet, q);
  const std::size_t n = packet.particle_count();
  PacketEvaluation out;
  out.gradients.resize(n);
  for (std::size_t k = 0; k < packet.mode_count(); ++k) {
    double phase = 0.0;
    for (std::size_t a = 0; a < n; ++a) phase += minkowski_dot(packet.mode_momentum(k, a), q[a]);
    const std::complex<double> term = packet.modes()[k].amplitude * std::polar(1.0, -phase);
    out.value += term;
    const std::complex<double> minus_i_term{term.imag(), -term.real()};  // -i * term
    for (std::size_t a = 0; a < n; ++a) {
      const FourVector& p = packet.mode_momentum(k, a);
      // covariant components of p are (E, -px, -py, -pz)
      out.gradients[a].t += p.t * minus_i_term;
      out.gradients[a].x -= p.x * minus_i_term;
      out.gradients[a].y -= p.y * minus_i_term;
      out.gradients[a].z -= p.z * minus_i_term;
    }
  }
  return out;
}

ComplexFourVector gradient(const WavePacket& packet, const Configuration& q, std::size_t particle) {
  require_particle_index(packet, particle);
  require_particle_count(packet, q);
  const std::size_t n = packet.particle_count();
  ComplexFourVector g;
  for (std::size_t k = 0; k < packet.mode_count(); ++k) {
    double phase = 0.0;
    for (std::size_t a = 0; a < n; ++a) phase += minkowski_dot(packet.mode_momentum(k, a), q[a]);
    const std::complex<double> term = packet.modes()[k].amplitude * std::polar(1.0, -phase);
    const std::complex<double> minus_i_term{term.imag(), -term.real()};
    const FourVector& p = packet.mode_momentum(k, particle);
    g.t += p.t * minus_i_term;
    g.x -= p.x * minus_i_term;
    g.y -= p.y * minus_i_term;
    g.z -= p.z * minus_i_term;
  }
  return g;
}

double kg_residual_fd(const WavePacket& packet, const Configuration& q, std::size_t particle,
                      double h) {
  require_particle_index(packet, particle);
  require_particle_count(packet, q);
  if (!(h > 0.0)) throw InvalidParameterError("kg_residual_fd: step must be positive");

  const double mass = packet.masses()[particle];
  const std::complex<double> center = evaluate(packet, q);
  // d^mu d_mu = d_t^2 - d_x^2 - d_y^2 - d_z^2 on particle's own coordinates
  std::complex<double> box{};
  for (std::size_t mu = 0; mu < 4; ++mu) {
    Configuration plus = q, minus = q;
    plus[particle].set(mu, q[particle][mu] + h);
    minus[particle].set(mu, q[particle][mu] - h);
    const std::complex<double> second =
        (evaluate(packet, plus) - 2.0 * center + evaluate(packet, minus)) / (h * h);
    box += (mu == 0 ? second : -second);
  }
  return std::abs(box + mass * mass * center);
}

std::vector<std::array<bool, 4>> density_active_axes(const WavePacket& packet) {
  const std::size_t n = packet.particle_count();
  std::vector<std::array<bool, 4>> active(n, {false, false, false, false});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t mu = 0; mu < 4; ++mu) {
      const double first = packet.mode_momentum(0, a)[mu];
      for (std::size_t k = 1; k < packet.mode_count(); ++k) {
        const double pk = packet.mode_momentum(k, a)[mu];
        if (std::fabs(pk - first) > kAxisTol * (1.0 + std::fabs(first) + std::fabs(pk))) {
          active[a][mu] = true;
          break;
        }
      }
    }
  return active;
}

std::vector<std::array<bool, 4>> velocity_active_axes(const WavePacket& packet) {
  const std::size_t n = packet.particle_count();
  std::vector<std::array<bool, 4>> active(n, {true, false, false, false});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t mu = 1; mu < 4; ++mu)
      for (std::size_t k = 0; k < packet.mode_count(); ++k)
        if (std::fabs(packet.mode_momentum(k, a)[mu]) > kAxisTol) {
          active[a][mu] = true;
          break;
        }
  return active;
}

NonrelativisticPacket::NonrelativisticPacket(double mass, std::vector<NonrelativisticMode> modes)
    : mass_(mass), modes_(std::move(modes)) {
  if (!(mass_ > 0.0)) throw InvalidParameterError("NonrelativisticPacket: mass must be positive");
  for (const NonrelativisticMode& mode : modes_) amplitude_l1_ += std::abs(mode.amplitude);
}

std::complex<double> NonrelativisticPacket::evaluate(const FourVector& x) const {
  std::complex<double> sum{};
  for (const NonrelativisticMode& mode : modes_) {
    const double phase =
        mode.frequency * x.t - (mode.momentum.x * x.x + mode.momentum.y * x.y + mode.momentum.z * x.z);
    sum += mode.amplitude * std::polar(1.0, -phase);
  }
  return sum;
}

ComplexFourVector NonrelativisticPacket::gradient(const FourVector& x) const {
  ComplexFourVector g;
  for (const NonrelativisticMode& mode : modes_) {
    const double phase =
        mode.frequency * x.t - (mode.momentum.x * x.x + mode.momentum.y * x.y + mode.momentum.z * x.z);
    const std::complex<double> term = mode.amplitude * std::polar(1.0, -phase);
    const std::complex<double> minus_i_term{term.imag(), -term.real()};
    g.t += mode.frequency * minus_i_term;
    g.x -= mode.momentum.x * minus_i_term;
    g.y -= mode.momentum.y * minus_i_term;
    g.z -= mode.momentum.z * minus_i_term;
  }
  return g;
}

ThreeVector NonrelativisticPacket::bohmian_velocity(const FourVector& x,
                                                    double node_threshold) const {
  const double threshold = node_threshold >= 0.0 ? node_threshold : 1e-9 * amplitude_l1_;
  const std::complex<double> value = evaluate(x);
  if (std::abs(value) <= threshold)
    throw NodeError({x.t, x.x, x.y, x.z}, std::abs(value), threshold);
  const ComplexFourVector g = gradient(x);
  return {std::imag(g.x / value) / mass_, std::imag(g.y / value) / mass_,
          std::imag(g.z / value) / mass_};
}

NonrelativisticPacket nonrelativistic_reduce(const WavePacket& packet) {
  if (packet.particle_count() != 1)
    throw UnsupportedError("nonrelativistic_reduce: only single-particle packets are supported");
  std::vector<NonrelativisticMode> modes;
  modes.reserve(packet.mode_count());
  const double mass = packet.masses()[0];
  for (std::size_t k = 0; k < packet.mode_count(); ++k) {
    const FourVector& p = packet.mode_momentum(k, 0);
    modes.push_back({packet.modes()[k].amplitude, packet.modes()[k].momenta[0], p.t - mass});
  }
  return NonrelativisticPacket(mass, std::move(modes));
}

WavePacket boosted(const WavePacket& packet, double rapidity, Axis axis) {
  std::vector<PlaneWaveMode> modes = packet.modes();
  for (std::size_t k = 0; k < modes.size(); ++k)
    for (std::size_t a = 0; a < modes[k].momenta.size(); ++a) {
      const FourVector p = boost(packet.mode_momentum(k, a), rapidity, axis);
      modes[k].momenta[a] = {p.x, p.y, p.z};
    }
  // Orthochronous boosts keep on-shell momenta on the positive branch, so the
  // energies derived by the constructor coincide with the boosted ones.
  return WavePacket(packet.masses(), std::move(modes));
}

Configuration boosted(const Configuration& q, double rapidity, Axis axis) {
  Configuration out = q;
  for (FourVector& p : out.points) p = boost(p, rapidity, axis);
  return out;
}

}  // namespace kgpilot
