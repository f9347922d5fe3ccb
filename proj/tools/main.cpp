// kgpilot command-line front end: load packet/box definitions, run
// trajectories and ensembles, execute the invariant suites, and export
// transition-rate profiles. All randomness is keyed by --seed; identical
// invocations produce byte-identical outputs regardless of thread count.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgpilot/bohmian.hpp"
#include "kgpilot/checks.hpp"
#include "kgpilot/errors.hpp"
#include "kgpilot/io.hpp"
#include "kgpilot/probability.hpp"
#include "kgpilot/transition.hpp"
#include "kgpilot/version.hpp"

namespace {

using namespace kgpilot;

constexpr int kExitCheckFailure = 1;
constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitDegenerateRun = 4;
constexpr int kExitInconclusive = 5;

struct CommonArgs {
  std::string packet_path;
  std::string box_path;
  std::uint64_t seed{0};
  double step{1e-3};
  bool step_given{false};
  std::string format;  // empty selects the command default
  std::string output;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameterError("cannot open output file: " + path);
  return out;
}

OutputMeta make_meta(const CommonArgs& args, const std::vector<std::string>& extra_inputs = {}) {
  OutputMeta meta;
  meta.seed = args.seed;
  meta.inputs.push_back({args.packet_path, fnv1a_file_digest(args.packet_path)});
  if (!args.box_path.empty())
    meta.inputs.push_back({args.box_path, fnv1a_file_digest(args.box_path)});
  for (const std::string& path : extra_inputs)
    meta.inputs.push_back({path, fnv1a_file_digest(path)});
  return meta;
}

void require_format(const CommonArgs& args, const std::string& expected) {
  if (!args.format.empty() && args.format != expected)
    throw InvalidParameterError("this command writes " + expected + " output; got --format " +
                                args.format);
}

// ---------------------------------------------------------------------------

int run_validate(const CommonArgs& args) {
  const LoadedPacket loaded = load_packet(args.packet_path);
  const WavePacket& packet = loaded.packet;

  // On-shell scan; files with injected energies fail here with exit 3.
  for (std::size_t k = 0; k < packet.mode_count(); ++k)
    for (std::size_t a = 0; a < packet.particle_count(); ++a) {
      const FourVector& p = packet.mode_momentum(k, a);
      const double m2 = packet.masses()[a] * packet.masses()[a];
      if (std::fabs(minkowski_dot(p, p) - m2) > 1e-9 * (1.0 + m2) || p.t <= 0.0) {
        std::cerr << "invariant violation: modes[" << k << "] particle " << a + 1
                  << " is off the positive mass shell (p.p = " << minkowski_dot(p, p)
                  << ", m^2 = " << m2 << ")\n";
        return kExitInvariant;
      }
    }

  std::cout << "packet: " << args.packet_path << "\n";
  std::cout << "  particles: " << packet.particle_count() << "\n";
  std::cout << "  modes: " << packet.mode_count() << "\n";
  std::cout << "  masses:";
  for (double m : packet.masses()) std::cout << " " << format_double(m);
  std::cout << "\n  sum |c_k|: " << format_double(packet.amplitude_l1()) << "\n";
  const std::size_t shown = std::min<std::size_t>(packet.mode_count(), 8);
  for (std::size_t k = 0; k < shown; ++k) {
    std::cout << "  mode " << k << ": |c| = " << format_double(std::abs(packet.modes()[k].amplitude))
              << ", on-shell energies:";
    for (std::size_t a = 0; a < packet.particle_count(); ++a)
      std::cout << " " << format_double(packet.mode_momentum(k, a).t);
    std::cout << "\n";
  }
  if (shown < packet.mode_count())
    std::cout << "  ... (" << packet.mode_count() - shown << " more modes)\n";
  if (loaded.energy_override)
    std::cout << "  note: file carries energy_override entries (negative-control hook)\n";

  if (!args.box_path.empty()) {
    const SpacetimeBox box = load_box(args.box_path);
    if (box.particle_count() != packet.particle_count()) {
      std::cerr << "invariant violation: box lists " << box.particle_count()
                << " particles, packet has " << packet.particle_count() << "\n";
      return kExitInvariant;
    }
    std::cout << "box: " << args.box_path << "\n";
    std::cout << "  4-volume: " << format_double(box.four_volume()) << "\n";
    std::cout << "  spatial volume: " << format_double(box.spatial_volume()) << "\n";
  }
  std::cout << "ok\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrajectoryArgs {
  std::int64_t count{1};
  double s0{0.0};
  double s1{10.0};
  std::string initial_file;
  bool per_trajectory_files{false};
  bool halt_outside{false};
  bool monitor{false};
  double node_threshold{-1.0};
};

int run_trajectories(const CommonArgs& args, const TrajectoryArgs& traj_args) {
  require_format(args, "csv");
  const LoadedPacket loaded = load_packet(args.packet_path);
  const WavePacket& packet = loaded.packet;
  if (traj_args.count < 0) throw InvalidParameterError("--count must be >= 0");

  std::optional<SpacetimeBox> box;
  if (!args.box_path.empty()) box = load_box(args.box_path);

  std::vector<Configuration> initials;
  std::vector<std::string> extra_inputs;
  if (traj_args.count > 0) {
    if (!traj_args.initial_file.empty()) {
      initials = read_configurations_csv(traj_args.initial_file, packet.particle_count());
      extra_inputs.push_back(traj_args.initial_file);
      if (static_cast<std::int64_t>(initials.size()) < traj_args.count)
        throw InvalidParameterError("initial file provides " + std::to_string(initials.size()) +
                                    " configurations, --count asks for " +
                                    std::to_string(traj_args.count));
      initials.resize(static_cast<std::size_t>(traj_args.count));
    } else {
      if (!box)
        throw InvalidParameterError("sampled initial conditions require --box");
      initials = sample_ensemble(packet, *box, traj_args.count, args.seed).samples;
    }
  }

  IntegrationOptions options;
  options.node_threshold = traj_args.node_threshold;
  options.error_monitor = traj_args.monitor;
  if (traj_args.halt_outside) {
    if (!box) throw InvalidParameterError("--halt-outside requires --box");
    options.domain = *box;
  }

  std::vector<Trajectory> trajectories;
  trajectories.reserve(initials.size());
  std::int64_t completed = 0, at_node = 0, out_of_domain = 0, dead_initials = 0;
  double worst_step_error = 0.0;
  for (const Configuration& initial : initials) {
    try {
      trajectories.push_back(
          integrate_trajectory(packet, initial, traj_args.s0, traj_args.s1, args.step, options));
    } catch (const NodeError&) {
      Trajectory dead;
      dead.s_values.push_back(traj_args.s0);
      dead.states.push_back(initial);
      dead.status = TrajectoryStatus::HaltedAtNode;
      trajectories.push_back(std::move(dead));
      ++dead_initials;
    }
    switch (trajectories.back().status) {
      case TrajectoryStatus::Completed: ++completed; break;
      case TrajectoryStatus::HaltedAtNode: ++at_node; break;
      case TrajectoryStatus::HaltedOutOfDomain: ++out_of_domain; break;
    }
    worst_step_error = std::max(worst_step_error, trajectories.back().max_halfstep_error);
  }
  if (!initials.empty() && dead_initials == static_cast<std::int64_t>(initials.size())) {
    std::cerr << "every initial configuration sits at a node of |psi|\n";
    return kExitDegenerateRun;
  }

  const OutputMeta meta = make_meta(args, extra_inputs);
  if (traj_args.per_trajectory_files) {
    if (args.output.empty())
      throw InvalidParameterError("--per-trajectory-files requires --output as a filename prefix");
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      std::ofstream out = open_output(args.output + std::to_string(i) + ".csv");
      write_trajectory_csv(out, trajectories[i], meta);
    }
  } else if (!args.output.empty()) {
    std::ofstream out = open_output(args.output);
    write_trajectories_csv(out, trajectories, meta);
  } else {
    write_trajectories_csv(std::cout, trajectories, meta);
  }

  std::cout << "trajectories: " << trajectories.size() << " (completed " << completed
            << ", halted-at-node " << at_node << ", halted-out-of-domain " << out_of_domain
            << ")\n";
  if (traj_args.monitor)
    std::cout << "max step-halving error estimate: " << format_double(worst_step_error) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run_ensemble(const CommonArgs& args, std::int64_t count) {
  require_format(args, "csv");
  const LoadedPacket loaded = load_packet(args.packet_path);
  if (args.box_path.empty()) throw InvalidParameterError("ensemble requires --box");
  const SpacetimeBox box = load_box(args.box_path);

  const EnsembleResult ensemble = sample_ensemble(loaded.packet, box, count, args.seed);
  const OutputMeta meta = make_meta(args);
  if (!args.output.empty()) {
    std::ofstream out = open_output(args.output);
    write_ensemble_csv(out, ensemble.samples, meta);
  } else {
    write_ensemble_csv(std::cout, ensemble.samples, meta);
  }
  std::cout << "accepted " << ensemble.samples.size() << " of " << ensemble.proposals
            << " proposals (rate " << format_double(ensemble.acceptance_rate) << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  std::string suite{"all"};
  std::int64_t samples{20000};
  double delta_s{0.5};
};

int run_check(const CommonArgs& args, const CheckArgs& check_args) {
  require_format(args, "json");
  const LoadedPacket loaded = load_packet(args.packet_path);
  if (args.box_path.empty()) throw InvalidParameterError("check requires --box");
  const SpacetimeBox box = load_box(args.box_path);

  CheckOptions options;
  options.seed = args.seed;
  options.equivariance_samples = check_args.samples;
  options.equivariance_delta_s = check_args.delta_s;
  if (args.step_given) {
    options.trajectory_step = args.step;
    options.equivariance_step = args.step;
  }

  const std::vector<CheckResult> results =
      run_check_suite(loaded.packet, box, check_args.suite, options);

  nlohmann::ordered_json report;
  report["meta"] = {{"tool", "kgpilot"}, {"version", version}, {"seed", args.seed}};
  auto& inputs = report["meta"]["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, digest] : make_meta(args).inputs)
    inputs.push_back({{"path", path}, {"fnv1a", digest}});
  report["suite"] = check_args.suite;
  auto& checks = report["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& r : results)
    checks.push_back({{"name", r.name},
                      {"measured", r.measured},
                      {"tolerance", r.tolerance},
                      {"comparison", r.comparison},
                      {"pass", r.pass},
                      {"note", r.note}});
  const bool ok = all_pass(results);
  report["all_pass"] = ok;

  const std::string text = report.dump(2) + "\n";
  if (!args.output.empty()) {
    std::ofstream out = open_output(args.output);
    out << text;
  } else {
    std::cout << text;
  }
  for (const CheckResult& r : results)
    std::cout << (r.pass ? "[pass] " : "[FAIL] ") << r.name << " = " << format_double(r.measured)
              << " (" << r.comparison << " " << format_double(r.tolerance) << ")\n";
  return ok ? 0 : kExitCheckFailure;
}

// ---------------------------------------------------------------------------

struct RateArgs {
  double cutoff{100.0};
  double halfwidth{0.0};  // 0 selects 100 lobes
  int resolution{0};
  int points{2001};
};

int run_rate(const CommonArgs& args, const RateArgs& rate_args) {
  require_format(args, "csv");
  const double halfwidth = rate_args.halfwidth > 0.0
                               ? rate_args.halfwidth
                               : 100.0 * 2.0 * std::numbers::pi / rate_args.cutoff;
  const RateProfile profile = make_rate_profile(rate_args.cutoff, halfwidth, rate_args.points);
  const double integral = rate_integral(rate_args.cutoff, halfwidth, rate_args.resolution);

  OutputMeta meta;
  meta.seed = args.seed;
  if (!args.output.empty()) {
    std::ofstream out = open_output(args.output);
    write_rate_csv(out, profile, meta);
  } else {
    write_rate_csv(std::cout, profile, meta);
  }

  const double two_pi = 2.0 * std::numbers::pi;
  std::cout << "integral of |A_T|^2/T over [-" << format_double(halfwidth) << ", "
            << format_double(halfwidth) << "]: " << format_double(integral) << "\n";
  std::cout << "2 pi: " << format_double(two_pi)
            << ", relative deviation: " << format_double(std::fabs(integral - two_pi) / two_pi)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relativistic pilot-wave dynamics on Klein-Gordon wave packets"};
  app.require_subcommand(1);

  CommonArgs common;
  app.add_option("--seed", common.seed, "seed for every pseudo-random stream")
      ->capture_default_str();
  auto* step_option =
      app.add_option("--step", common.step, "integrator step in s")->capture_default_str();
  app.add_option("--format", common.format, "output format (csv or json, command default)");
  app.add_option("--output", common.output, "output file (stdout when omitted)");

  auto* validate = app.add_subcommand("validate", "parse a packet (and box) and report invariants");
  validate->fallthrough();
  validate->add_option("--packet", common.packet_path, "packet definition file")->required();
  validate->add_option("--box", common.box_path, "box definition file");

  auto* trajectories =
      app.add_subcommand("trajectories", "integrate Bohmian trajectories and write CSV");
  trajectories->fallthrough();
  TrajectoryArgs traj_args;
  trajectories->add_option("--packet", common.packet_path, "packet definition file")->required();
  trajectories->add_option("--box", common.box_path, "box for sampling / --halt-outside");
  trajectories->add_option("--count", traj_args.count, "number of trajectories")
      ->capture_default_str();
  trajectories->add_option("--s0", traj_args.s0, "start of the s span")->capture_default_str();
  trajectories->add_option("--s1", traj_args.s1, "end of the s span")->capture_default_str();
  trajectories->add_option("--initial-file", traj_args.initial_file,
                           "wide-format CSV of initial configurations (default: sample |psi|^2)");
  trajectories->add_flag("--per-trajectory-files", traj_args.per_trajectory_files,
                         "write one file per trajectory, --output is the prefix");
  trajectories->add_flag("--halt-outside", traj_args.halt_outside,
                         "halt trajectories that leave the box");
  trajectories->add_flag("--monitor", traj_args.monitor, "step-halving error monitor");
  trajectories->add_option("--node-threshold", traj_args.node_threshold,
                           "|psi| cutoff for node halting (default 1e-9 sum|c|)");

  auto* ensemble = app.add_subcommand("ensemble", "draw |psi|^2-distributed configurations");
  ensemble->fallthrough();
  std::int64_t ensemble_count = 1000;
  ensemble->add_option("--packet", common.packet_path, "packet definition file")->required();
  ensemble->add_option("--box", common.box_path, "box definition file")->required();
  ensemble->add_option("--count", ensemble_count, "number of samples")->capture_default_str();

  auto* check = app.add_subcommand("check", "run invariant suites and write a JSON report");
  check->fallthrough();
  CheckArgs check_args;
  check->add_option("--packet", common.packet_path, "packet definition file")->required();
  check->add_option("--box", common.box_path, "box definition file")->required();
  check
      ->add_option("--suite", check_args.suite,
                   "kg | continuity | equivariance | covariance | nonlocality | all")
      ->capture_default_str();
  check->add_option("--samples", check_args.samples, "equivariance ensemble size")
      ->capture_default_str();
  check->add_option("--delta-s", check_args.delta_s, "equivariance flow span")
      ->capture_default_str();

  auto* rate_cmd = app.add_subcommand("rate", "finite-time transition-rate profile");
  rate_cmd->fallthrough();
  RateArgs rate_args;
  rate_cmd->add_option("--cutoff", rate_args.cutoff, "time cutoff T")->required();
  rate_cmd->add_option("--halfwidth", rate_args.halfwidth,
                       "dE integration halfwidth (default 100 lobes = 200 pi / T)");
  rate_cmd->add_option("--resolution", rate_args.resolution,
                       "quadrature panels (default: auto-resolve the oscillations)");
  rate_cmd->add_option("--points", rate_args.points, "CSV grid points")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }
  common.step_given = step_option->count() > 0;

  try {
    if (validate->parsed()) return run_validate(common);
    if (trajectories->parsed()) return run_trajectories(common, traj_args);
    if (ensemble->parsed()) return run_ensemble(common, ensemble_count);
    if (check->parsed()) return run_check(common, check_args);
    if (rate_cmd->parsed()) return run_rate(common, rate_args);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const DegeneratePacketError& e) {
    std::cerr << "degenerate run: " << e.what() << "\n";
    return kExitDegenerateRun;
  } catch (const DegenerateConditionError& e) {
    std::cerr << "degenerate run: " << e.what() << "\n";
    return kExitDegenerateRun;
  } catch (const PathologicalEnvelopeError& e) {
    std::cerr << "degenerate run: " << e.what() << "\n";
    return kExitDegenerateRun;
  } catch (const NumericalBlowupError& e) {
    std::cerr << "degenerate run: " << e.what() << "\n";
    return kExitDegenerateRun;
  } catch (const NodeError& e) {
    std::cerr << "degenerate run: " << e.what() << "\n";
    return kExitDegenerateRun;
  } catch (const Error& e) {
    // InvalidParameterError, DimensionError, UnsupportedError: bad inputs
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvariant;
  }
  return 0;
}
