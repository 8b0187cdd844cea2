#include "cskin/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cskin/functionals.hpp"
#include "cskin/integrate.hpp"

namespace cskin {

double theoretical_exponent(const RegimeSpec& spec) {
  spec.check_fields();
  if (spec.regime == Regime::CompactVelocity) return -2.0 * spec.kappa;
  const double g = spec.gamma_or_default();
  const double D = spec.moment_order();
  return 1.0 - (D / 2.0 * (g - 1.0) + spec.beta * g);
}

bool exponent_is_derived(const RegimeSpec& spec) { return spec.regime == Regime::ExponentialTail; }

FitWindow default_fit_window(const TimeSeries& series) {
  if (series.empty()) throw DomainError("default_fit_window: empty series");
  const double a = series.front().first;
  const double b = series.back().first;
  // midpoint in log(1 + t)
  return {std::sqrt((1.0 + a) * (1.0 + b)) - 1.0, b};
}

namespace {

RateFit least_squares(const TimeSeries& series, FitWindow window, bool log_time) {
  if (!(window.t_min < window.t_max)) throw DomainError("rate fit: degenerate window");
  std::vector<double> xs, ys;
  for (const auto& [t, y] : series) {
    if (t < window.t_min || t > window.t_max) continue;
    if (!(y > 0.0)) throw DomainError("rate fit: series values must be positive");
    xs.push_back(log_time ? std::log1p(t) : t);
    ys.push_back(std::log(y));
  }
  if (xs.size() < 8) throw DomainError("rate fit: fewer than 8 points in the window");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("rate fit: degenerate window");
  RateFit fit;
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.log_prefactor + fit.exponent * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.window = window;
  fit.points = xs.size();
  return fit;
}

std::size_t first_post_burn_in(const TimeSeries& series, double burn_in) {
  if (series.empty()) throw DomainError("envelope check: empty series");
  const double start = series.front().first + burn_in;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].first >= start) return i;
  }
  throw DomainError("envelope check: no samples beyond the burn-in");
}

}  // namespace

RateFit fit_power_exponent(const TimeSeries& series, FitWindow window) {
  return least_squares(series, window, true);
}

RateFit fit_exponential_rate(const TimeSeries& series, FitWindow window) {
  return least_squares(series, window, false);
}

std::string to_string(EnvelopeKind kind) {
  switch (kind) {
    case EnvelopeKind::PowerLaw: return "power_law";
    case EnvelopeKind::Exponential: return "exponential";
    case EnvelopeKind::Boundedness: return "boundedness";
    case EnvelopeKind::TailBound: return "tail_bound";
  }
  return "unknown";
}

EnvelopeVerdict envelope_check(const TimeSeries& series, double exponent_or_rate, EnvelopeKind kind,
                               const EnvelopeOptions& options) {
  if (kind != EnvelopeKind::PowerLaw && kind != EnvelopeKind::Exponential) {
    throw DomainError("envelope_check: kind must be power_law or exponential");
  }
  auto envelope = [&](double t) {
    return kind == EnvelopeKind::PowerLaw ? std::pow(1.0 + t, exponent_or_rate)
                                          : std::exp(exponent_or_rate * t);
  };
  const std::size_t first = first_post_burn_in(series, options.burn_in);
  EnvelopeVerdict v;
  v.kind = kind;
  v.theoretical_exponent_or_rate = exponent_or_rate;
  v.fitted_constant = series[first].second / envelope(series[first].first);
  v.max_relative_violation = 0.0;
  for (std::size_t i = first + 1; i < series.size(); ++i) {
    const auto [t, y] = series[i];
    const double bound = v.fitted_constant * envelope(t);
    ++v.checked_count;
    const double excess = bound > 0.0 ? y / bound - 1.0 : (y > 0.0 ? INFINITY : 0.0);
    v.max_relative_violation = std::max(v.max_relative_violation, excess);
    if (y > v.fitted_constant * (1.0 + options.tolerance) * envelope(t)) ++v.violation_count;
  }
  v.passed = static_cast<double>(v.violation_count) <=
             options.max_violation_fraction * static_cast<double>(v.checked_count);
  return v;
}

EnvelopeVerdict boundedness_check(const TimeSeries& series, double burn_in) {
  const std::size_t first = first_post_burn_in(series, burn_in);
  const std::size_t m = series.size() - first;
  if (m < 4) throw DomainError("boundedness_check: fewer than 4 samples beyond the burn-in");
  EnvelopeVerdict v;
  v.kind = EnvelopeKind::Boundedness;
  for (std::size_t i = first; i < series.size(); ++i) v.sup = std::max(v.sup, series[i].second);
  const double y0 = series[first].second;
  v.sup_ratio = y0 > 0.0 ? v.sup / y0 : (v.sup > 0.0 ? INFINITY : 1.0);
  auto mean = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += series[first + i].second;
    return s / static_cast<double>(hi - lo);
  };
  const double mid = mean(m / 4, 3 * m / 4);
  const double last = mean(3 * m / 4, m);
  v.fitted_constant = mid;
  v.checked_count = m;
  v.max_relative_violation = mid > 0.0 ? last / mid - 1.0 : 0.0;
  v.passed = last <= 1.1 * mid;
  v.violation_count = v.passed ? 0 : 1;
  return v;
}

double initial_tail_budget(const Ensemble& initial, const RegimeSpec& spec) {
  if (spec.regime == Regime::CompactVelocity) {
    if (!spec.alpha) throw DomainError("tail budget of regime 3 needs alpha");
    return exp_weighted_mass(initial, ExpWeight::Position, *spec.alpha);
  }
  const double D = spec.moment_order();
  return p_moment(initial, Coordinate::Position, D) + p_moment(initial, Coordinate::Velocity, D);
}

EnvelopeVerdict tail_bound_check(const Trajectory& traj, const RegimeSpec& spec,
                                 std::optional<double> budget) {
  if (traj.diagnostics.empty()) throw DomainError("tail_bound_check: trajectory has no diagnostics");
  if (!traj.settings.regime || traj.settings.regime->regime != spec.regime) {
    throw DomainError("tail_bound_check: diagnostics were not recorded for this regime");
  }
  if (!budget) {
    if (traj.snapshots.empty()) throw DomainError("tail_bound_check: no initial snapshot for the budget");
    budget = initial_tail_budget(traj.snapshots.front().ensemble, spec);
  }
  const double t0 = traj.grid.t0;
  EnvelopeVerdict v;
  v.kind = EnvelopeKind::TailBound;
  v.fitted_constant = *budget;
  v.max_relative_violation = -1.0;
  for (const auto& rec : traj.diagnostics) {
    if (!rec.effective_radius || !rec.tail_mass_position || !rec.tail_mass_velocity) {
      throw DomainError("tail_bound_check: diagnostics lack tail masses");
    }
    const double t = rec.t - t0;
    const double R = *rec.effective_radius;
    double log_bound = 0.0;
    if (spec.regime == Regime::CompactVelocity) {
      const double a = *spec.alpha;
      log_bound = std::log(*budget) + a * *spec.p_inf * t - a * R;
    } else {
      const double D = spec.moment_order();
      v.theoretical_exponent_or_rate = D;
      log_bound = (D - 1.0) * std::numbers::ln2 + std::log(*budget) + D * std::log1p(t) - D * std::log(R);
    }
    const double tail = std::max(*rec.tail_mass_position, *rec.tail_mass_velocity);
    ++v.checked_count;
    if (tail == 0.0) continue;
    const double excess = std::exp(std::log(tail) - log_bound) - 1.0;
    v.max_relative_violation = std::max(v.max_relative_violation, excess);
    if (std::log(tail) > log_bound + 1e-12) ++v.violation_count;
  }
  v.passed = v.violation_count == 0;
  return v;
}

double dissipation_identity_residual(const Trajectory& traj) {
  const auto& d = traj.diagnostics;
  if (d.size() < 2) throw DomainError("dissipation identity: need at least two snapshots");
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const double fd = (d[k + 1].velocity_variance - d[k].velocity_variance) / (d[k + 1].t - d[k].t);
    const double avg = 0.5 * (d[k].dissipation_rate + d[k + 1].dissipation_rate);
    worst = std::max(worst, std::abs(fd - avg));
    scale = std::max(scale, std::abs(avg));
  }
  if (scale == 0.0) return worst == 0.0 ? 0.0 : INFINITY;
  return worst / scale;
}

double momentum_drift(const Trajectory& traj) {
  if (traj.diagnostics.empty()) throw DomainError("momentum_drift: no diagnostics");
  const auto& m0 = traj.diagnostics.front().momentum;
  double worst = 0.0;
  for (const auto& rec : traj.diagnostics) {
    for (std::size_t k = 0; k < m0.size(); ++k) worst = std::max(worst, std::abs(rec.momentum[k] - m0[k]));
  }
  return worst;
}

double center_of_mass_error(const Trajectory& traj) {
  if (traj.diagnostics.empty()) throw DomainError("center_of_mass_error: no diagnostics");
  const auto& first = traj.diagnostics.front();
  double worst = 0.0;
  for (const auto& rec : traj.diagnostics) {
    const double t = rec.t - first.t;
    for (std::size_t k = 0; k < first.momentum.size(); ++k) {
      const double expected = first.center_of_mass[k] + t * first.momentum[k];
      worst = std::max(worst, std::abs(rec.center_of_mass[k] - expected));
    }
  }
  return worst;
}

CheckResult monotone_check(const std::string& name, const std::vector<double>& values, double slack) {
  CheckResult r;
  r.name = name;
  r.threshold = slack;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double prev = values[k];
    const double next = values[k + 1];
    if (next > prev * (1.0 + slack)) ++r.violations;
    if (prev > 0.0) r.residual = std::max(r.residual, next / prev - 1.0);
    else if (next > 0.0) r.residual = INFINITY;
  }
  r.passed = r.violations == 0;
  return r;
}

std::vector<CheckResult> invariant_suite(const Trajectory& traj, const std::optional<RegimeSpec>& spec,
                                         const InvariantOptions& options) {
  if (traj.diagnostics.empty()) throw DomainError("invariant suite: no diagnostics");
  std::vector<CheckResult> out;

  CheckResult mom{"momentum", false, momentum_drift(traj), options.momentum_tol, 0};
  mom.passed = mom.residual <= mom.threshold;
  mom.violations = mom.passed ? 0 : 1;
  out.push_back(mom);

  CheckResult com{"center_of_mass", false, center_of_mass_error(traj), options.center_of_mass_tol, 0};
  com.passed = com.residual <= com.threshold;
  com.violations = com.passed ? 0 : 1;
  out.push_back(com);

  std::vector<double> var, mom_d, speed;
  for (const auto& rec : traj.diagnostics) {
    var.push_back(rec.velocity_variance);
    mom_d.push_back(rec.moment_D_velocity);
    speed.push_back(rec.max_speed);
  }
  out.push_back(monotone_check("energy_monotone", var, options.variance_slack));
  out.push_back(monotone_check("moment_D_monotone", mom_d, options.moment_slack));
  const double h = traj.grid.dt / static_cast<double>(traj.grid.substeps);
  out.push_back(monotone_check("max_speed_monotone", speed, std::max(options.speed_slack, std::pow(h, 5))));

  CheckResult dis{"dissipation_identity", false, 0.0, options.dissipation_tol, 0};
  if (traj.diagnostics.size() >= 2) {
    dis.residual = dissipation_identity_residual(traj);
    dis.passed = dis.residual <= dis.threshold;
  } else {
    dis.passed = true;
  }
  dis.violations = dis.passed ? 0 : 1;
  out.push_back(dis);

  if (spec) {
    const auto tb = tail_bound_check(traj, *spec);
    CheckResult tail{"tail_bounds", tb.passed, tb.max_relative_violation, 0.0, tb.violation_count};
    out.push_back(tail);
  }
  return out;
}

TimeSeries velocity_variance_series(const Trajectory& traj) {
  TimeSeries s;
  for (const auto& rec : traj.diagnostics) s.emplace_back(rec.t, rec.velocity_variance);
  return s;
}

TimeSeries spatial_cohesion_series(const Trajectory& traj) {
  TimeSeries s;
  for (const auto& rec : traj.diagnostics) s.emplace_back(rec.t, rec.spatial_cohesion);
  return s;
}

GronwallReport gronwall_report(const Trajectory& traj, const RegimeSpec& spec,
                               const GronwallOptions& options) {
  if (traj.diagnostics.empty()) throw DomainError("gronwall_report: no diagnostics");
  GronwallReport r;
  r.theoretical_exponent = theoretical_exponent(spec);
  r.exponent_derived = exponent_is_derived(spec);

  const auto var = velocity_variance_series(traj);
  try {
    r.fit = fit_power_exponent(var, default_fit_window(var));
  } catch (const DomainError&) {
    r.fit = RateFit{};
  }
  r.velocity_envelope = envelope_check(var, r.theoretical_exponent, EnvelopeKind::PowerLaw, options.envelope);
  r.cohesion_boundedness = boundedness_check(spatial_cohesion_series(traj), options.envelope.burn_in);
  r.tail_bound = tail_bound_check(traj, spec);

  r.dissipation_residual = traj.diagnostics.size() >= 2 ? dissipation_identity_residual(traj) : 0.0;
  r.dissipation_passed = r.dissipation_residual <= options.invariants.dissipation_tol;
  r.momentum_drift = momentum_drift(traj);
  r.center_of_mass_error = center_of_mass_error(traj);
  r.conservation_passed = r.momentum_drift <= options.invariants.momentum_tol &&
                          r.center_of_mass_error <= options.invariants.center_of_mass_tol;
  r.passed = r.velocity_envelope.passed && r.cohesion_boundedness.passed && r.tail_bound.passed &&
             r.dissipation_passed && r.conservation_passed;
  return r;
}

}  // namespace cskin
