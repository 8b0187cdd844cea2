#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cskin/functionals.hpp"
#include "cskin/model.hpp"

namespace cskin {

/// Fixed-step time grid. Each step may be split into `substeps` equal RK4
/// substeps; snapshot times are always computed from the coarse step index,
/// so grids that differ only in substeps share bit-identical times.
struct TimeGrid {
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 1e-2;
  std::size_t snapshot_stride = 1;
  std::size_t substeps = 1;

  void validate() const;
  /// Number of coarse steps; the last one is shortened if dt does not
  /// divide t_end - t0.
  std::size_t steps() const;
  double time_at(std::size_t step) const;
  std::size_t snapshot_count() const { return steps() / snapshot_stride + 1; }
};

/// dt = 1e-2 min(1, 1/kappa).
double default_time_step(double kappa);

class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, std::size_t step, double time)
      : std::runtime_error(what), step_(step), time_(time) {}
  std::size_t step() const { return step_; }
  double time() const { return time_; }

private:
  std::size_t step_;
  double time_;
};

struct Snapshot {
  std::size_t step;
  double t;
  Ensemble ensemble;
};

struct Trajectory {
  TimeGrid grid;
  ModelParams params;
  std::uint64_t init_digest = 0;
  DiagnosticSettings settings;
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticRecord> diagnostics;
  /// State at t_end, whether or not it is a snapshot.
  std::optional<Ensemble> final_state;

  std::vector<double> times() const;
};

struct IntegrateOptions {
  KernelMode kernel = KernelMode::Parallel;
  DiagnosticSettings diagnostics;
  bool keep_snapshots = true;
  bool record_diagnostics = true;
};

/// Coordinates beyond this magnitude abort the run.
inline constexpr double kOverflowThreshold = 1e100;

/// FNV-1a over the dimension, size and coordinate bit patterns.
std::uint64_t content_digest(const Ensemble& ens);

/// One classical RK4 step of x' = v, v' = cs_acceleration.
Ensemble step_rk4(const Ensemble& ens, const ModelParams& params, double dt,
                  KernelMode mode = KernelMode::Parallel);

Trajectory integrate(const Ensemble& ens, const ModelParams& params, const TimeGrid& grid,
                     const IntegrateOptions& options = {});

/// Integrates the same ensemble at dt and dt/refine; snapshots align.
std::pair<Trajectory, Trajectory> paired_integrate(const Ensemble& ens, const ModelParams& params,
                                                   const TimeGrid& grid, std::size_t refine,
                                                   const IntegrateOptions& options = {});

}  // namespace cskin
