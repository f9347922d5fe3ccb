#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "kgpilot/bohmian.hpp"
#include "kgpilot/probability.hpp"
#include "kgpilot/transition.hpp"
#include "kgpilot/wavepacket.hpp"

namespace kgpilot {

/// A packet definition read from disk. `energy_override` flags files that
/// carry explicit (possibly off-shell) energies through the test hook; such
/// packets fail validation but load for negative-control checks.
struct LoadedPacket {
  WavePacket packet;
  bool energy_override{false};
};

/// Packet definition file (JSON):
///   {
///     "particles": n,
///     "masses": [m_1, ..., m_n],
///     "modes": [
///       {"amplitude_re": ..., "amplitude_im": ...,
///        "momenta": [[px,py,pz], ...n entries...],
///        "energy_override": [E_1, ..., E_n]   // optional test hook
///       }, ...
///     ]
///   }
/// Energies are never stored in regular files; they are derived on-shell.
/// Structural problems raise ParseError with field and line; value problems
/// (non-positive mass, non-finite amplitude) raise InvalidParameterError.
LoadedPacket load_packet(const std::filesystem::path& path);

/// Box definition file (JSON):
///   {"particles": [{"t_range": [lo,hi], "x_range": [lo,hi],
///                   "y_range": [lo,hi], "z_range": [lo,hi]}, ...]}
SpacetimeBox load_box(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits. Used in output
/// headers to record which inputs produced a file.
std::string fnv1a_file_digest(const std::filesystem::path& path);
std::string fnv1a_digest(std::string_view bytes);

/// Shortest text that round-trips the double exactly ("%.17g").
std::string format_double(double value);

/// Header lines stamped at the top of every output file.
struct OutputMeta {
  std::uint64_t seed{0};
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)
};

void write_meta_comments(std::ostream& os, const OutputMeta& meta);

/// Wide-format ensemble CSV: header t1,x1,y1,z1,...,tn,xn,yn,zn and one row
/// per configuration.
void write_ensemble_csv(std::ostream& os, const std::vector<Configuration>& samples,
                        const OutputMeta& meta);

/// Reads configurations back from the wide format (comments and header
/// skipped). `particles` fixes the expected column count.
std::vector<Configuration> read_configurations_csv(const std::filesystem::path& path,
                                                   std::size_t particles);

/// Single-trajectory CSV: s,t1,...,zn,status. The status column repeats the
/// trajectory's final status on every row.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const OutputMeta& meta);

/// Long-format multi-trajectory CSV with a leading trajectory_id column.
void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajectories,
                            const OutputMeta& meta);

/// Rate profile CSV: a `# T=<value>` header comment, then delta_E,rate rows.
void write_rate_csv(std::ostream& os, const RateProfile& profile, const OutputMeta& meta);

}  // namespace kgpilot
