#pragma once

#include <functional>
#include <iosfwd>

#include "cskin/config.hpp"
#include "cskin/output.hpp"

namespace cskin {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitNumerical = 2,
  kExitIo = 3,
  kExitConfig = 4,
};

/// Initial ensemble of a run: sample(init, n, seed).
Ensemble initial_ensemble(const RunConfig& cfg);

/// Diagnostic settings implied by the init and regime sections.
DiagnosticSettings diagnostic_settings(const RunConfig& cfg);

/// Copy of `ens` with every velocity component shifted by uniform noise in
/// [-eps, eps], deterministic in seed.
Ensemble perturb_velocities(const Ensemble& ens, double eps, std::uint64_t seed);

Json config_json(const RunConfig& cfg);

int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_rates(const RunConfig& cfg, std::ostream& log);
int cmd_stability(const RunConfig& cfg, std::ostream& log);
int cmd_uniqueness(const RunConfig& cfg, std::ostream& log);

/// Runs `body`, mapping exceptions to exit codes: ConfigError and
/// DomainError to 4, IoError to 3, IntegrationError and OverflowError to 2.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace cskin
