#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kgpilot/wavepacket.hpp"

namespace kgpilot {

struct Interval {
  double lo{0.0};
  double hi{0.0};
  double width() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// A bounded 4-volume per particle: the domain of normalization, quadrature
/// and sampling. The temporal interval realizes the finite time cutoff. All
/// intervals must have positive width.
class SpacetimeBox {
 public:
  using AxisIntervals = std::array<Interval, 4>;  // t, x, y, z

  explicit SpacetimeBox(std::vector<AxisIntervals> per_particle);

  /// Same bounds for every particle.
  static SpacetimeBox uniform(std::size_t particles, AxisIntervals axes);

  std::size_t particle_count() const noexcept { return axes_.size(); }
  const AxisIntervals& particle_axes(std::size_t a) const { return axes_[a]; }
  const Interval& axis(std::size_t particle, std::size_t mu) const { return axes_[particle][mu]; }

  /// Product of all 4n interval widths.
  double four_volume() const noexcept;
  /// Product of the 3n spatial widths.
  double spatial_volume() const noexcept;
  bool contains(const Configuration& q) const;

 private:
  std::vector<AxisIntervals> axes_;
};

/// Value with an error estimate and the work done to obtain it.
struct DensityReport {
  double value{0.0};
  double estimated_error{0.0};
  std::int64_t evaluation_count{0};
};

enum class IntegrationMethod { TensorQuadrature, MonteCarlo };

/// |psi(q)|^2: the density of dP per d^4x_1 ... d^4x_n.
double density(const WavePacket& packet, const Configuration& q);

/// Default tensor-quadrature resolution: 64 points per axis when at most two
/// axes carry density variation, 16 otherwise.
int default_quadrature_points(const WavePacket& packet);

/// Integral of |psi|^2 over the box.
///
/// TensorQuadrature: `resolution` = Gauss-Legendre points per active axis
/// (axes the density does not vary along are integrated exactly as width
/// factors); error estimated against a coarser rule; deterministic.
/// MonteCarlo: `resolution` = sample count; uniform proposals on the box with
/// counter-based streams keyed by (seed, chunk), so the result is independent
/// of thread count; error is the standard error of the mean.
///
/// Minimum resolution: 2 points per axis / 10 samples.
DensityReport box_integral(const WavePacket& packet, const SpacetimeBox& box,
                           IntegrationMethod method, std::int64_t resolution,
                           std::uint64_t seed = 0);

/// Rescale all amplitudes so the box integral becomes 1. `points_per_axis`
/// counts tensor-quadrature points (0 selects the default). Throws
/// DegeneratePacketError when the integral is not positive.
WavePacket normalize(const WavePacket& packet, const SpacetimeBox& box, int points_per_axis = 0);

/// N_{t_1..t_n}: the spatial integral of |psi|^2 with every particle's time
/// pinned to the given detection times. Uses the spatial part of `box`.
DensityReport marginal_normalization(const WavePacket& packet, const std::vector<double>& times,
                                     const SpacetimeBox& box, int points_per_axis = 0);

/// |psi(x_1,t_1,...)|^2 / normalization: the conditional 3n-space density at
/// fixed detection times. Throws DegenerateConditionError when
/// normalization <= 0.
double conditional_density(const WavePacket& packet, const std::vector<double>& times,
                           const std::vector<ThreeVector>& positions, double normalization);

struct EnsembleResult {
  std::vector<Configuration> samples;
  std::int64_t proposals{0};
  double acceptance_rate{0.0};
};

/// Draw `count` configurations from |psi|^2 restricted to the box by
/// rejection sampling against the exact envelope (sum |c_k|)^2 with uniform
/// proposals. Sample i uses stream i of the counter RNG, so results are
/// byte-reproducible for a fixed seed regardless of parallelism. Throws
/// PathologicalEnvelopeError when acceptance stalls below 1e-6 after 1e7
/// proposals.
EnsembleResult sample_ensemble(const WavePacket& packet, const SpacetimeBox& box,
                               std::int64_t count, std::uint64_t seed);

}  // namespace kgpilot
