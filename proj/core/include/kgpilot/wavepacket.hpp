#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "kgpilot/four_vector.hpp"

namespace kgpilot {

struct ThreeVector {
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

inline double norm(const ThreeVector& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }

/// Positive-energy branch of the mass shell: +sqrt(|p|^2 + m^2) >= m.
/// Throws InvalidParameterError for non-positive mass.
double on_shell_energy(const ThreeVector& p, double mass);

/// One term of a finite plane-wave superposition: a complex coefficient and
/// one spatial 3-momentum per particle. The energy of each factor is never
/// stored; it is always derived on-shell from the momentum and the packet's
/// per-particle mass.
struct PlaneWaveMode {
  std::complex<double> amplitude{};
  std::vector<ThreeVector> momenta;
};

/// An ordered list of spacetime points, one per particle; the argument of the
/// wave function and the state of a trajectory. Each particle carries its own
/// time coordinate.
struct Configuration {
  std::vector<FourVector> points;

  Configuration() = default;
  explicit Configuration(std::vector<FourVector> pts) : points(std::move(pts)) {}

  std::size_t size() const noexcept { return points.size(); }
  FourVector& operator[](std::size_t a) { return points[a]; }
  const FourVector& operator[](std::size_t a) const { return points[a]; }
};

/// Flatten to (t,x,y,z) per particle, particle-major.
std::vector<double> flatten(const Configuration& q);
Configuration unflatten(std::span<const double> coords);

/// A many-time, many-particle wave function built as a finite superposition
/// of on-shell plane-wave factors,
///
///   psi(x_1,...,x_n) = sum_k c_k prod_a exp(-i p_{k,a} . x_a),
///
/// with p_{k,a}^0 = +sqrt(|p_{k,a}|^2 + m_a^2). Every mode solves each
/// particle's Klein-Gordon equation identically, so derivative and
/// conservation checks probe the implementation rather than a PDE solver.
/// Immutable after construction; all evaluation entry points are pure and
/// safe for unrestricted concurrent use.
class WavePacket {
 public:
  /// Particle count is masses.size(). Enforces: positive masses, at least one
  /// mode, per-mode momentum lists of matching length, finite amplitudes.
  WavePacket(std::vector<double> masses, std::vector<PlaneWaveMode> modes);

  std::size_t particle_count() const noexcept { return masses_.size(); }
  std::size_t mode_count() const noexcept { return modes_.size(); }
  const std::vector<double>& masses() const noexcept { return masses_; }
  const std::vector<PlaneWaveMode>& modes() const noexcept { return modes_; }

  /// Contravariant on-shell 4-momentum of mode k, particle a.
  const FourVector& mode_momentum(std::size_t k, std::size_t a) const {
    return momenta_[k * masses_.size() + a];
  }

  /// Sum of |c_k|; a global bound on |psi| used as the rejection envelope.
  double amplitude_l1() const noexcept { return amplitude_l1_; }

  /// max over modes and particles of E + |p|: the scale of one derivative.
  double characteristic_frequency() const noexcept { return characteristic_frequency_; }

  /// max over modes and particles of E^2 + |p|^2 + m^2: the scale of the
  /// Klein-Gordon operator applied to one mode.
  double characteristic_frequency_sq() const noexcept { return characteristic_frequency_sq_; }

  /// Same packet with every amplitude multiplied by `factor`.
  WavePacket with_amplitudes_scaled(std::complex<double> factor) const;

  /// Test hook: construct with explicit per-mode per-particle energies,
  /// bypassing the on-shell invariant. energies[k][a] replaces the derived
  /// value. Exists solely so negative-control data can be injected into the
  /// validation suites; regular construction has no off-shell path.
  static WavePacket unchecked_with_energies(std::vector<double> masses,
                                            std::vector<PlaneWaveMode> modes,
                                            const std::vector<std::vector<double>>& energies);

 private:
  WavePacket() = default;
  void finalize_derived();

  std::vector<double> masses_;
  std::vector<PlaneWaveMode> modes_;
  std::vector<FourVector> momenta_;  // mode-major [k * n + a]
  double amplitude_l1_{0.0};
  double characteristic_frequency_{0.0};
  double characteristic_frequency_sq_{0.0};
};

/// psi at a configuration. Throws DimensionError on size mismatch.
std::complex<double> evaluate(const WavePacket& packet, const Configuration& q);

/// Exact covariant gradient d psi / d x_a^mu (lower index), computed
/// analytically from the mode momenta.
ComplexFourVector gradient(const WavePacket& packet, const Configuration& q, std::size_t particle);

struct PacketEvaluation {
  std::complex<double> value{};
  std::vector<ComplexFourVector> gradients;  // covariant, one per particle
};

/// psi and all per-particle gradients in one pass over the modes.
PacketEvaluation evaluate_with_gradients(const WavePacket& packet, const Configuration& q);

/// Magnitude of the Klein-Gordon residual (d^mu d_mu + m_a^2) psi for
/// particle a, with the second derivatives replaced by second-order central
/// differences of step h. Zero up to O(h^2) discretization error for any
/// correctly constructed packet.
double kg_residual_fd(const WavePacket& packet, const Configuration& q, std::size_t particle,
                      double h);

/// Axes along which |psi|^2 actually varies, per particle: axis (a, mu) is
/// active when some pair of modes differs in the mu component of particle a's
/// 4-momentum. Inactive axes can be integrated trivially.
std::vector<std::array<bool, 4>> density_active_axes(const WavePacket& packet);

/// Axes along which the flow can move a trajectory: the time axis always
/// (positive energies), a spatial axis when any mode carries momentum there.
std::vector<std::array<bool, 4>> velocity_active_axes(const WavePacket& packet);

/// One factor of the nonrelativistic reduction: exp(-i (freq t - p.x)) with
/// freq = E - m (the rest-energy phase removed).
struct NonrelativisticMode {
  std::complex<double> amplitude{};
  ThreeVector momentum{};
  double frequency{0.0};
};

/// Single-particle packet after factoring out exp(-i m t). Satisfies
/// evaluate_nr(x) = exp(+i m t) * psi(x) identically, and approaches a
/// Schroedinger wave packet as |p|/m -> 0.
class NonrelativisticPacket {
 public:
  NonrelativisticPacket(double mass, std::vector<NonrelativisticMode> modes);

  double mass() const noexcept { return mass_; }
  const std::vector<NonrelativisticMode>& modes() const noexcept { return modes_; }
  double amplitude_l1() const noexcept { return amplitude_l1_; }

  std::complex<double> evaluate(const FourVector& x) const;
  /// Coordinate derivatives (d/dt, d/dx, d/dy, d/dz); no index lowering.
  ComplexFourVector gradient(const FourVector& x) const;
  /// Standard guidance velocity grad(S)/m of the reduced wave function.
  /// Throws NodeError when |psi_nr| <= node_threshold (default 1e-9 * sum|c|).
  ThreeVector bohmian_velocity(const FourVector& x, double node_threshold = -1.0) const;

 private:
  double mass_;
  std::vector<NonrelativisticMode> modes_;
  double amplitude_l1_{0.0};
};

/// Shift every mode frequency E -> E - m. Only defined for single-particle
/// packets; throws UnsupportedError otherwise.
NonrelativisticPacket nonrelativistic_reduce(const WavePacket& packet);

/// Boost every mode 4-momentum; the boosted packet represents the same scalar
/// field in the boosted frame: evaluate(boosted packet, boosted q) equals
/// evaluate(packet, q).
WavePacket boosted(const WavePacket& packet, double rapidity, Axis axis = Axis::X);
Configuration boosted(const Configuration& q, double rapidity, Axis axis = Axis::X);

}  // namespace kgpilot
