#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cskin/model.hpp"
#include "cskin/regime.hpp"

namespace cskin {

struct Trajectory;
class Ensemble;

/// (t, value) samples, t strictly increasing.
using TimeSeries = std::vector<std::pair<double, double>>;

/// Velocity-variance decay exponent of the regime: 1 - (D/2 (gamma - 1) + beta gamma)
/// for regimes 1 and 2 (regime 2 at the derived order), -2 kappa for regime 3.
/// Checks the fields first; the order and coupling hypotheses are not required
/// to evaluate the formula.
double theoretical_exponent(const RegimeSpec& spec);

/// True when the exponent is not stated for the regime itself (regime 2).
bool exponent_is_derived(const RegimeSpec& spec);

struct FitWindow {
  double t_min;
  double t_max;
};

/// Last half of the horizon in log(1 + t).
FitWindow default_fit_window(const TimeSeries& series);

struct RateFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  FitWindow window{0.0, 0.0};
  std::size_t points = 0;
};

/// Least-squares slope of log(value) against log(1 + t) on the window.
/// Needs at least 8 points, all positive.
RateFit fit_power_exponent(const TimeSeries& series, FitWindow window);
/// Same against t.
RateFit fit_exponential_rate(const TimeSeries& series, FitWindow window);

enum class EnvelopeKind { PowerLaw, Exponential, Boundedness, TailBound };
std::string to_string(EnvelopeKind kind);

struct EnvelopeVerdict {
  EnvelopeKind kind = EnvelopeKind::PowerLaw;
  double theoretical_exponent_or_rate = 0.0;
  double fitted_constant = 0.0;
  std::size_t violation_count = 0;
  std::size_t checked_count = 0;
  double max_relative_violation = 0.0;
  /// Boundedness only: sup over the post-burn-in window and sup / first value.
  double sup = 0.0;
  double sup_ratio = 0.0;
  bool passed = false;
};

struct EnvelopeOptions {
  double burn_in = 1.0;
  double tolerance = 0.05;
  double max_violation_fraction = 0.02;
};

/// C = value(t1) / envelope(t1) at the first point with t >= t_first + burn_in;
/// a later point violates when value > C (1 + tolerance) envelope. The
/// envelope is (1 + t)^e for PowerLaw and e^(r t) for Exponential.
EnvelopeVerdict envelope_check(const TimeSeries& series, double exponent_or_rate, EnvelopeKind kind,
                               const EnvelopeOptions& options = {});

/// Passes when the last-quartile mean of the post-burn-in series is at most
/// 1.1 times the mean of its middle half.
EnvelopeVerdict boundedness_check(const TimeSeries& series, double burn_in = 1.0);

/// Empirical initial budget used by the tail inequalities:
/// (1/N) sum |x|^D + |v|^D for regimes 1 and 2, (1/N) sum e^(alpha |x|) for regime 3.
double initial_tail_budget(const Ensemble& initial, const RegimeSpec& spec);

/// Checks tail_mass(., R_x(t)) against 2^(D-1) M_p (1+t)^D / R_x^D (regimes 1, 2)
/// or M_e e^(alpha P_inf t - alpha R_x) (regime 3) at every snapshot, for both
/// position and velocity tails. The budget defaults to the first snapshot.
EnvelopeVerdict tail_bound_check(const Trajectory& traj, const RegimeSpec& spec,
                                 std::optional<double> budget = std::nullopt);

/// Residual of the discrete energy identity: trapezoidal average of the
/// dissipation rate against the finite difference of velocity_variance,
/// max |fd - avg| / max |avg| over adjacent snapshots.
double dissipation_identity_residual(const Trajectory& traj);

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double threshold = 0.0;
  std::size_t violations = 0;
};

struct InvariantOptions {
  double momentum_tol = 1e-11;
  double center_of_mass_tol = 1e-9;
  double variance_slack = 1e-10;
  double moment_slack = 1e-9;
  double speed_slack = 1e-9;  // raised to dt^5 when larger
  double dissipation_tol = 1e-2;
};

/// Largest per-component |m(t) - m(t0)|.
double momentum_drift(const Trajectory& traj);
/// Largest per-component |x_c(t) - x_c(t0) - (t - t0) m(t0)|.
double center_of_mass_error(const Trajectory& traj);

/// Counts k with series[k+1] > series[k] (1 + slack); residual is the largest
/// relative increase.
CheckResult monotone_check(const std::string& name, const std::vector<double>& values, double slack);

/// momentum, center_of_mass, energy_monotone, moment_D_monotone,
/// max_speed_monotone, dissipation_identity and, with a regime, tail_bounds.
std::vector<CheckResult> invariant_suite(const Trajectory& traj, const std::optional<RegimeSpec>& spec,
                                         const InvariantOptions& options = {});

struct GronwallReport {
  double theoretical_exponent = 0.0;
  bool exponent_derived = false;
  RateFit fit;
  EnvelopeVerdict velocity_envelope;
  EnvelopeVerdict cohesion_boundedness;
  EnvelopeVerdict tail_bound;
  double dissipation_residual = 0.0;
  bool dissipation_passed = false;
  double momentum_drift = 0.0;
  double center_of_mass_error = 0.0;
  bool conservation_passed = false;
  bool passed = false;
};

struct GronwallOptions {
  EnvelopeOptions envelope;
  InvariantOptions invariants;
};

/// Bundles the rate, cohesion, tail, dissipation and conservation checks of a
/// regime run. Throws DomainError on empty diagnostics.
GronwallReport gronwall_report(const Trajectory& traj, const RegimeSpec& spec,
                               const GronwallOptions& options = {});

/// Column extractors over the diagnostics of a trajectory.
TimeSeries velocity_variance_series(const Trajectory& traj);
TimeSeries spatial_cohesion_series(const Trajectory& traj);

}  // namespace cskin
