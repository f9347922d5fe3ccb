#include "kgpilot/probability.hpp"

#include <cmath>
#include <string>

#include "kgpilot/errors.hpp"
#include "kgpilot/quadrature.hpp"
#include "kgpilot/rng.hpp"
#include "parallel_for.hpp"

namespace kgpilot {

namespace {

constexpr std::int64_t kMinMonteCarloSamples = 10;
constexpr int kMinQuadraturePoints = 2;
constexpr double kMaxQuadratureEvals = 1e8;

struct ActiveAxis {
  std::size_t particle;
  std::size_t mu;
  Interval interval;
};

void require_box_matches(const WavePacket& packet, const SpacetimeBox& box) {
  if (box.particle_count() != packet.particle_count())
    throw DimensionError("box lists " + std::to_string(box.particle_count()) +
                         " particles, packet has " + std::to_string(packet.particle_count()));
}

// Tensor-product Gauss-Legendre integral of |psi|^2 over the given axes, all
// other coordinates held at the values in `base`. A zero-axis integral is the
// density at `base` itself.
double tensor_density_integral(const WavePacket& packet, Configuration base,
                               const std::vector<ActiveAxis>& axes, int points,
                               std::int64_t& evaluations) {
  if (axes.empty()) {
    ++evaluations;
    return density(packet, base);
  }
  const double total_evals =
      std::pow(static_cast<double>(points), static_cast<double>(axes.size()));
  if (total_evals > kMaxQuadratureEvals)
    throw InvalidParameterError(
        "tensor quadrature would need " + std::to_string(total_evals) +
        " evaluations; lower the resolution or use Monte Carlo integration");

  std::vector<GaussLegendreRule> rules;
  rules.reserve(axes.size());
  for (const ActiveAxis& axis : axes)
    rules.push_back(gauss_legendre(points, axis.interval.lo, axis.interval.hi));

  std::vector<std::size_t> index(axes.size(), 0);
  double sum = 0.0;
  for (;;) {
    double weight = 1.0;
    for (std::size_t d = 0; d < axes.size(); ++d) {
      base[axes[d].particle].set(axes[d].mu, rules[d].nodes[index[d]]);
      weight *= rules[d].weights[index[d]];
    }
    sum += weight * density(packet, base);
    ++evaluations;

    std::size_t d = 0;
    while (d < index.size() && ++index[d] == static_cast<std::size_t>(points)) {
      index[d] = 0;
      ++d;
    }
    if (d == index.size()) break;
  }
  return sum;
}

}  // namespace

SpacetimeBox::SpacetimeBox(std::vector<AxisIntervals> per_particle) : axes_(std::move(per_particle)) {
  if (axes_.empty()) throw InvalidParameterError("SpacetimeBox: at least one particle required");
  for (std::size_t a = 0; a < axes_.size(); ++a)
    for (std::size_t mu = 0; mu < 4; ++mu) {
      const Interval& iv = axes_[a][mu];
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.width() > 0.0))
        throw InvalidParameterError("SpacetimeBox: particle " + std::to_string(a) + " axis " +
                                    std::to_string(mu) + " must be a finite positive interval");
    }
}

SpacetimeBox SpacetimeBox::uniform(std::size_t particles, AxisIntervals axes) {
  return SpacetimeBox(std::vector<AxisIntervals>(particles, axes));
}

double SpacetimeBox::four_volume() const noexcept {
  double v = 1.0;
  for (const AxisIntervals& p : axes_)
    for (const Interval& iv : p) v *= iv.width();
  return v;
}

double SpacetimeBox::spatial_volume() const noexcept {
  double v = 1.0;
  for (const AxisIntervals& p : axes_)
    for (std::size_t mu = 1; mu < 4; ++mu) v *= p[mu].width();
  return v;
}

bool SpacetimeBox::contains(const Configuration& q) const {
  if (q.size() != axes_.size()) return false;
  for (std::size_t a = 0; a < axes_.size(); ++a)
    for (std::size_t mu = 0; mu < 4; ++mu)
      if (!axes_[a][mu].contains(q[a][mu])) return false;
  return true;
}

double density(const WavePacket& packet, const Configuration& q) {
  const std::complex<double> value = evaluate(packet, q);
  return std::norm(value);
}

int default_quadrature_points(const WavePacket& packet) {
  const auto active = density_active_axes(packet);
  int count = 0;
  for (const auto& axes : active)
    for (bool flag : axes) count += flag ? 1 : 0;
  return count <= 2 ? 64 : 16;
}

DensityReport box_integral(const WavePacket& packet, const SpacetimeBox& box,
                           IntegrationMethod method, std::int64_t resolution, std::uint64_t seed) {
  require_box_matches(packet, box);

  if (method == IntegrationMethod::TensorQuadrature) {
    if (resolution < kMinQuadraturePoints)
      throw InvalidParameterError("box_integral: at least 2 quadrature points per axis required");

    const auto active_flags = density_active_axes(packet);
    std::vector<ActiveAxis> axes;
    Configuration base;
    base.points.resize(packet.particle_count());
    double inactive_volume = 1.0;
    for (std::size_t a = 0; a < packet.particle_count(); ++a)
      for (std::size_t mu = 0; mu < 4; ++mu) {
        const Interval& iv = box.axis(a, mu);
        base[a].set(mu, iv.mid());
        if (active_flags[a][mu])
          axes.push_back({a, mu, iv});
        else
          inactive_volume *= iv.width();
      }

    DensityReport report;
    const int points = static_cast<int>(resolution);
    const int coarse = points >= 4 ? points / 2 : points + 1;
    const double fine = tensor_density_integral(packet, base, axes, points, report.evaluation_count);
    const double check =
        tensor_density_integral(packet, base, axes, coarse, report.evaluation_count);
    report.value = inactive_volume * fine;
    report.estimated_error = inactive_volume * std::fabs(fine - check);
    return report;
  }

  // Monte Carlo: uniform proposals over the full 4n-volume, fixed-size chunks
  // with one RNG stream per chunk so the estimate is scheduling-independent.
  if (resolution < kMinMonteCarloSamples)
    throw InvalidParameterError("box_integral: at least 10 Monte Carlo samples required");

  const std::int64_t samples = resolution;
  constexpr std::int64_t kChunk = 4096;
  const std::size_t chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  std::vector<double> partial_sum(chunks, 0.0), partial_sumsq(chunks, 0.0);
  const std::size_t n = packet.particle_count();

  detail::parallel_for(chunks, [&](std::size_t c) {
    CounterRng rng(seed, c);
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t end = std::min(samples, begin + kChunk);
    Configuration q;
    q.points.resize(n);
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = begin; i < end; ++i) {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t mu = 0; mu < 4; ++mu) {
          const Interval& iv = box.axis(a, mu);
          q[a].set(mu, rng.uniform(iv.lo, iv.hi));
        }
      const double rho = density(packet, q);
      sum += rho;
      sumsq += rho * rho;
    }
    partial_sum[c] = sum;
    partial_sumsq[c] = sumsq;
  });

  double sum = 0.0, sumsq = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    sum += partial_sum[c];
    sumsq += partial_sumsq[c];
  }
  const double mean = sum / static_cast<double>(samples);
  const double variance =
      std::max(0.0, sumsq / static_cast<double>(samples) - mean * mean) *
      (static_cast<double>(samples) / std::max<double>(1.0, static_cast<double>(samples - 1)));
  const double volume = box.four_volume();
  DensityReport report;
  report.value = volume * mean;
  report.estimated_error = volume * std::sqrt(variance / static_cast<double>(samples));
  report.evaluation_count = samples;
  return report;
}

WavePacket normalize(const WavePacket& packet, const SpacetimeBox& box, int points_per_axis) {
  const int points = points_per_axis > 0 ? points_per_axis : default_quadrature_points(packet);
  const DensityReport report =
      box_integral(packet, box, IntegrationMethod::TensorQuadrature, points);
  if (!(report.value > 0.0) || !std::isfinite(report.value))
    throw DegeneratePacketError("normalize: box integral of |psi|^2 is not positive");
  return packet.with_amplitudes_scaled(1.0 / std::sqrt(report.value));
}

DensityReport marginal_normalization(const WavePacket& packet, const std::vector<double>& times,
                                     const SpacetimeBox& box, int points_per_axis) {
  require_box_matches(packet, box);
  if (times.size() != packet.particle_count())
    throw DimensionError("marginal_normalization: one detection time per particle required");

  const int points = points_per_axis > 0 ? points_per_axis : default_quadrature_points(packet);
  if (points < kMinQuadraturePoints)
    throw InvalidParameterError("marginal_normalization: at least 2 points per axis required");

  const auto active_flags = density_active_axes(packet);
  std::vector<ActiveAxis> axes;
  Configuration base;
  base.points.resize(packet.particle_count());
  double inactive_volume = 1.0;
  for (std::size_t a = 0; a < packet.particle_count(); ++a) {
    base[a].t = times[a];
    for (std::size_t mu = 1; mu < 4; ++mu) {
      const Interval& iv = box.axis(a, mu);
      base[a].set(mu, iv.mid());
      if (active_flags[a][mu])
        axes.push_back({a, mu, iv});
      else
        inactive_volume *= iv.width();
    }
  }

  DensityReport report;
  const int coarse = points >= 4 ? points / 2 : points + 1;
  const double fine = tensor_density_integral(packet, base, axes, points, report.evaluation_count);
  const double check = tensor_density_integral(packet, base, axes, coarse, report.evaluation_count);
  report.value = inactive_volume * fine;
  report.estimated_error = inactive_volume * std::fabs(fine - check);
  return report;
}

double conditional_density(const WavePacket& packet, const std::vector<double>& times,
                           const std::vector<ThreeVector>& positions, double normalization) {
  if (times.size() != packet.particle_count() || positions.size() != packet.particle_count())
    throw DimensionError("conditional_density: one time and one position per particle required");
  if (!(normalization > 0.0))
    throw DegenerateConditionError("conditional_density: normalization must be positive");
  Configuration q;
  q.points.reserve(packet.particle_count());
  for (std::size_t a = 0; a < packet.particle_count(); ++a)
    q.points.emplace_back(times[a], positions[a].x, positions[a].y, positions[a].z);
  return density(packet, q) / normalization;
}

EnsembleResult sample_ensemble(const WavePacket& packet, const SpacetimeBox& box,
                               std::int64_t count, std::uint64_t seed) {
  require_box_matches(packet, box);
  if (count < 1) throw InvalidParameterError("sample_ensemble: count must be >= 1");
  const double l1 = packet.amplitude_l1();
  if (!(l1 > 0.0))
    throw DegeneratePacketError("sample_ensemble: packet has vanishing amplitude sum");
  const double envelope = l1 * l1;

  constexpr std::int64_t kPerSampleLimit = 10'000'000;
  constexpr std::int64_t kGlobalWindow = 10'000'000;
  constexpr double kMinAcceptance = 1e-6;
  constexpr std::int64_t kChunk = 1024;

  EnsembleResult result;
  result.samples.resize(static_cast<std::size_t>(count));
  std::vector<std::int64_t> attempts(static_cast<std::size_t>(count), 0);
  const std::size_t n = packet.particle_count();

  std::int64_t done = 0;
  while (done < count) {
    const std::int64_t begin = done;
    const std::int64_t end = std::min(count, begin + kChunk);
    detail::parallel_for(static_cast<std::size_t>(end - begin), [&](std::size_t offset) {
      const std::int64_t i = begin + static_cast<std::int64_t>(offset);
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      Configuration q;
      q.points.resize(n);
      std::int64_t tries = 0;
      while (tries < kPerSampleLimit) {
        ++tries;
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t mu = 0; mu < 4; ++mu) {
            const Interval& iv = box.axis(a, mu);
            q[a].set(mu, rng.uniform(iv.lo, iv.hi));
          }
        if (rng.uniform() * envelope < density(packet, q)) {
          result.samples[static_cast<std::size_t>(i)] = q;
          attempts[static_cast<std::size_t>(i)] = tries;
          return;
        }
      }
      attempts[static_cast<std::size_t>(i)] = -tries;  // exhausted
    });

    for (std::int64_t i = begin; i < end; ++i) {
      const std::int64_t tries = attempts[static_cast<std::size_t>(i)];
      if (tries < 0)
        throw PathologicalEnvelopeError(
            "sample_ensemble: no acceptance within " + std::to_string(kPerSampleLimit) +
            " proposals for sample " + std::to_string(i) +
            "; the envelope (sum |c_k|)^2 is far above the density on this box");
      result.proposals += tries;
    }
    done = end;
    if (result.proposals >= kGlobalWindow &&
        static_cast<double>(done) < kMinAcceptance * static_cast<double>(result.proposals))
      throw PathologicalEnvelopeError("sample_ensemble: acceptance rate below 1e-6 after " +
                                      std::to_string(result.proposals) + " proposals");
  }

  result.acceptance_rate =
      static_cast<double>(count) / std::max<double>(1.0, static_cast<double>(result.proposals));
  return result;
}

}  // namespace kgpilot
