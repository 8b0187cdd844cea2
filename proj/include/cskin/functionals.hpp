#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cskin/model.hpp"
#include "cskin/regime.hpp"

namespace cskin {

struct Trajectory;

enum class Coordinate { Position, Velocity };
enum class ExpWeight { Position, Velocity, Both };

class OverflowError : public std::overflow_error {
public:
  using std::overflow_error::overflow_error;
};

/// Every scalar functional recorded at a snapshot.
struct DiagnosticRecord {
  double t = 0.0;
  std::vector<double> momentum;        // (1/N) sum v_i
  std::vector<double> center_of_mass;  // (1/N) sum x_i, kept for transport checks
  double velocity_variance = 0.0;      // about the initial mean velocity
  double spatial_cohesion = 0.0;       // about x_c(0) + (t - t0) v_c(0)
  double moment_D_velocity = 0.0;
  double moment_D_position = 0.0;
  std::optional<double> exp_mass_alpha;
  std::optional<double> tail_mass_position;
  std::optional<double> tail_mass_velocity;
  double max_speed = 0.0;
  double dissipation_rate = 0.0;
  std::optional<double> effective_radius;
};

/// What compute_diagnostics needs beyond the ensemble itself.
struct DiagnosticSettings {
  double moment_order = kDerivedMomentOrder;
  std::optional<double> exp_rate;
  ExpWeight exp_weight = ExpWeight::Both;
  /// Effective region; tail masses are evaluated at its radius. The regime
  /// must carry the parameters its radius needs (C1 for regimes 1 and 2).
  std::optional<RegimeSpec> regime;
  /// Reference frame; empty means "take it from the initial ensemble".
  std::vector<double> x_ref;
  std::vector<double> v_ref;
  KernelMode kernel = KernelMode::Parallel;
};

/// (1/N) sum |v_i - v_ref|^2
double velocity_variance(const Ensemble& ens, std::span<const double> v_ref);

/// (1/N) sum |x_i - x_ref - t v_ref|^2
double spatial_cohesion(const Ensemble& ens, std::span<const double> x_ref,
                        std::span<const double> v_ref, double t);

/// (1/N) sum |.|^D for the chosen coordinate, D >= 1.
double p_moment(const Ensemble& ens, Coordinate which, double D);

/// (1/N) sum exp(alpha w_i); throws OverflowError if a term exceeds 1e300.
double exp_weighted_mass(const Ensemble& ens, ExpWeight which, double alpha);

/// Fraction of particles with |.| > R.
double tail_mass(const Ensemble& ens, Coordinate which, double R);

/// Discrete energy dissipation -(kappa/N^2) sum_{i != j} phi_ij |v_i - v_j|^2,
/// the exact time derivative of velocity_variance along the particle flow.
double dissipation_rate(const Ensemble& ens, const ModelParams& params,
                        KernelMode mode = KernelMode::Parallel);

/// phi(2R): floor of the weight over pairs inside the ball of radius R.
double phi_floor(double R, double beta);

/// R_x(t) of the regime's effective region.
double effective_radius(const RegimeSpec& regime, double t);

/// Default effective-region constant: 99th-percentile initial radius + 1.
double default_region_constant(const Ensemble& initial);

/// Fills x_ref, v_ref from the ensemble when unset, and C1 when the regime
/// needs it and it is absent.
DiagnosticSettings resolve_settings(DiagnosticSettings settings, const Ensemble& initial);

/// All functionals at elapsed time t - t0 (t0 given separately so the
/// cohesion frame uses elapsed time). settings must be resolved.
DiagnosticRecord compute_diagnostics(const Ensemble& ens, const ModelParams& params,
                                     const DiagnosticSettings& settings, double t, double t0);

/// Delta(t) = (1/N) sum_i (|X_i^A - X_i^B| + |V_i^A - V_i^B|) at every
/// common snapshot of two trajectories issued from the same ensemble.
std::vector<std::pair<double, double>> delta_functional(const Trajectory& a, const Trajectory& b);

}  // namespace cskin
