#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kgpilot/probability.hpp"
#include "kgpilot/wavepacket.hpp"

namespace kgpilot {

/// One measured invariant with its gate. `pass` is true when
/// `measured cmp tolerance` holds, with cmp given by `comparison`
/// ("<=", ">=", or "|x-2|<=" for convergence orders).
struct CheckResult {
  std::string name;
  double measured{0.0};
  double tolerance{0.0};
  std::string comparison{"<="};
  bool pass{false};
  std::string note;
};

struct CheckOptions {
  std::uint64_t seed{0};
  int sample_configurations{100};  // kg / continuity probe count
  double kg_fd_step{1e-3};
  double continuity_fd_step{1e-4};
  double trajectory_step{1e-3};
  double covariance_rapidity{0.5};
  double covariance_s_end{5.0};
  std::int64_t equivariance_samples{20000};
  double equivariance_delta_s{0.5};
  double equivariance_step{2e-3};
};

/// Runs one of the named invariant suites: "kg", "continuity",
/// "equivariance", "covariance", "nonlocality", or "all". Measured values and
/// tolerances come from the module defaults. Throws InvalidParameterError for
/// unknown suite names and InconclusiveError when a statistical suite cannot
/// reach a verdict.
std::vector<CheckResult> run_check_suite(const WavePacket& packet, const SpacetimeBox& box,
                                         std::string_view suite, const CheckOptions& options = {});

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace kgpilot
