#include "kgpilot/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "kgpilot/errors.hpp"
#include "kgpilot/version.hpp"

namespace kgpilot {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

json parse_json(const std::string& text, const std::filesystem::path& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), {},
                     line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
}

const json& require_key(const json& object, const std::string& key, const std::string& context) {
  if (!object.contains(key)) throw ParseError("missing required key", context + key);
  return object.at(key);
}

double require_number(const json& value, const std::string& field) {
  if (!value.is_number()) throw ParseError("expected a number", field);
  return value.get<double>();
}

std::int64_t require_integer(const json& value, const std::string& field) {
  if (!value.is_number_integer()) throw ParseError("expected an integer", field);
  return value.get<std::int64_t>();
}

const json& require_array(const json& value, const std::string& field) {
  if (!value.is_array()) throw ParseError("expected an array", field);
  return value;
}

void reject_unknown_keys(const json& object, std::initializer_list<const char*> allowed,
                         const std::string& context) {
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known) throw ParseError("unknown key", context + key);
  }
}

}  // namespace

LoadedPacket load_packet(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const json root = parse_json(text, path);
  if (!root.is_object()) throw ParseError("packet file must be a JSON object", "", 1);
  reject_unknown_keys(root, {"particles", "masses", "modes"}, "");

  const auto particles = require_integer(require_key(root, "particles", ""), "particles");
  if (particles < 1) throw InvalidParameterError("packet: particles must be >= 1");
  const std::size_t n = static_cast<std::size_t>(particles);

  const json& masses_json = require_array(require_key(root, "masses", ""), "masses");
  if (masses_json.size() != n) throw ParseError("one mass per particle required", "masses");
  std::vector<double> masses;
  masses.reserve(n);
  for (std::size_t a = 0; a < n; ++a)
    masses.push_back(require_number(masses_json.at(a), "masses[" + std::to_string(a) + "]"));

  const json& modes_json = require_array(require_key(root, "modes", ""), "modes");
  if (modes_json.empty()) throw ParseError("at least one mode required", "modes");

  std::vector<PlaneWaveMode> modes;
  std::vector<std::vector<double>> overrides;
  bool has_override = false;
  modes.reserve(modes_json.size());
  overrides.reserve(modes_json.size());
  for (std::size_t k = 0; k < modes_json.size(); ++k) {
    const std::string ctx = "modes[" + std::to_string(k) + "].";
    const json& mode_json = modes_json.at(k);
    if (!mode_json.is_object()) throw ParseError("mode must be an object", ctx);
    reject_unknown_keys(mode_json, {"amplitude_re", "amplitude_im", "momenta", "energy_override"},
                        ctx);
    PlaneWaveMode mode;
    mode.amplitude = {require_number(require_key(mode_json, "amplitude_re", ctx), ctx + "amplitude_re"),
                      require_number(require_key(mode_json, "amplitude_im", ctx), ctx + "amplitude_im")};
    const json& momenta_json = require_array(require_key(mode_json, "momenta", ctx), ctx + "momenta");
    if (momenta_json.size() != n)
      throw ParseError("one 3-momentum per particle required", ctx + "momenta");
    for (std::size_t a = 0; a < n; ++a) {
      const std::string pctx = ctx + "momenta[" + std::to_string(a) + "]";
      const json& p = require_array(momenta_json.at(a), pctx);
      if (p.size() != 3) throw ParseError("momentum must have 3 components", pctx);
      mode.momenta.push_back({require_number(p.at(0), pctx + "[0]"),
                              require_number(p.at(1), pctx + "[1]"),
                              require_number(p.at(2), pctx + "[2]")});
    }
    std::vector<double> mode_override;
    if (mode_json.contains("energy_override")) {
      has_override = true;
      const json& e = require_array(mode_json.at("energy_override"), ctx + "energy_override");
      if (e.size() != n) throw ParseError("one energy per particle required", ctx + "energy_override");
      for (std::size_t a = 0; a < n; ++a)
        mode_override.push_back(
            require_number(e.at(a), ctx + "energy_override[" + std::to_string(a) + "]"));
    }
    overrides.push_back(std::move(mode_override));
    modes.push_back(std::move(mode));
  }

  if (!has_override) return {WavePacket(std::move(masses), std::move(modes)), false};

  // Fill the gaps with on-shell values so a file may override selectively.
  for (std::size_t k = 0; k < modes.size(); ++k)
    if (overrides[k].empty())
      for (std::size_t a = 0; a < n; ++a)
        overrides[k].push_back(on_shell_energy(modes[k].momenta[a], masses[a]));
  return {WavePacket::unchecked_with_energies(std::move(masses), std::move(modes), overrides),
          true};
}

SpacetimeBox load_box(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const json root = parse_json(text, path);
  if (!root.is_object()) throw ParseError("box file must be a JSON object", "", 1);
  reject_unknown_keys(root, {"particles"}, "");

  const json& particles_json = require_array(require_key(root, "particles", ""), "particles");
  if (particles_json.empty()) throw ParseError("at least one particle entry required", "particles");

  static constexpr const char* kRangeKeys[4] = {"t_range", "x_range", "y_range", "z_range"};
  std::vector<SpacetimeBox::AxisIntervals> axes;
  axes.reserve(particles_json.size());
  for (std::size_t a = 0; a < particles_json.size(); ++a) {
    const std::string ctx = "particles[" + std::to_string(a) + "].";
    const json& entry = particles_json.at(a);
    if (!entry.is_object()) throw ParseError("particle entry must be an object", ctx);
    reject_unknown_keys(entry, {"t_range", "x_range", "y_range", "z_range"}, ctx);
    SpacetimeBox::AxisIntervals intervals;
    for (std::size_t mu = 0; mu < 4; ++mu) {
      const std::string field = ctx + kRangeKeys[mu];
      const json& range = require_array(require_key(entry, kRangeKeys[mu], ctx), field);
      if (range.size() != 2) throw ParseError("range must be [lo, hi]", field);
      intervals[mu] = {require_number(range.at(0), field + "[0]"),
                       require_number(range.at(1), field + "[1]")};
      if (!(intervals[mu].width() > 0.0))
        throw InvalidParameterError("box: " + field + " must have positive width");
    }
    axes.push_back(intervals);
  }
  return SpacetimeBox(std::move(axes));
}

std::string fnv1a_digest(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string fnv1a_file_digest(const std::filesystem::path& path) {
  return fnv1a_digest(read_file(path));
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_meta_comments(std::ostream& os, const OutputMeta& meta) {
  os << "# kgpilot " << version << "\n";
  os << "# seed=" << meta.seed << "\n";
  for (const auto& [path, digest] : meta.inputs) os << "# input=" << path << " fnv1a=" << digest << "\n";
}

namespace {

void write_configuration_header(std::ostream& os, std::size_t particles) {
  for (std::size_t a = 1; a <= particles; ++a) {
    if (a > 1) os << ",";
    os << "t" << a << ",x" << a << ",y" << a << ",z" << a;
  }
}

void write_configuration_row(std::ostream& os, const Configuration& q) {
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (a > 0) os << ",";
    os << format_double(q[a].t) << "," << format_double(q[a].x) << "," << format_double(q[a].y)
       << "," << format_double(q[a].z);
  }
}

}  // namespace

void write_ensemble_csv(std::ostream& os, const std::vector<Configuration>& samples,
                        const OutputMeta& meta) {
  write_meta_comments(os, meta);
  const std::size_t particles = samples.empty() ? 1 : samples.front().size();
  write_configuration_header(os, particles);
  os << "\n";
  for (const Configuration& q : samples) {
    write_configuration_row(os, q);
    os << "\n";
  }
}

std::vector<Configuration> read_configurations_csv(const std::filesystem::path& path,
                                                   std::size_t particles) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::vector<Configuration> out;
  std::string line;
  int lineno = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_skipped) {  // first non-comment line is the column header
      header_skipped = true;
      continue;
    }
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string token =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used == 0) throw std::invalid_argument("empty");
      } catch (const std::exception&) {
        throw ParseError("not a number: '" + token + "'", "", lineno);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (values.size() != 4 * particles)
      throw ParseError("expected " + std::to_string(4 * particles) + " columns, found " +
                           std::to_string(values.size()),
                       "", lineno);
    out.push_back(unflatten(values));
  }
  return out;
}

namespace {

void write_trajectory_rows(std::ostream& os, const Trajectory& trajectory, long id, bool with_id) {
  for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
    if (with_id) os << id << ",";
    os << format_double(trajectory.s_values[i]) << ",";
    write_configuration_row(os, trajectory.states[i]);
    os << "," << to_string(trajectory.status) << "\n";
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const OutputMeta& meta) {
  write_meta_comments(os, meta);
  const std::size_t particles = trajectory.states.empty() ? 1 : trajectory.states.front().size();
  os << "s,";
  write_configuration_header(os, particles);
  os << ",status\n";
  write_trajectory_rows(os, trajectory, 0, false);
}

void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajectories,
                            const OutputMeta& meta) {
  write_meta_comments(os, meta);
  const std::size_t particles = trajectories.empty() || trajectories.front().states.empty()
                                    ? 1
                                    : trajectories.front().states.front().size();
  os << "trajectory_id,s,";
  write_configuration_header(os, particles);
  os << ",status\n";
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    write_trajectory_rows(os, trajectories[i], static_cast<long>(i), true);
}

void write_rate_csv(std::ostream& os, const RateProfile& profile, const OutputMeta& meta) {
  write_meta_comments(os, meta);
  os << "# T=" << format_double(profile.cutoff) << "\n";
  os << "delta_E,rate\n";
  for (std::size_t i = 0; i < profile.delta_e_grid.size(); ++i)
    os << format_double(profile.delta_e_grid[i]) << "," << format_double(profile.rate[i]) << "\n";
}

}  // namespace kgpilot
