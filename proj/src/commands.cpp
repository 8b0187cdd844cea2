#include "cskin/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "cskin/analysis.hpp"
#include "cskin/functionals.hpp"
#include "cskin/integrate.hpp"
#include "cskin/kernels.hpp"
#include "cskin/sampler.hpp"
#include "cskin/transport.hpp"

namespace cskin {

namespace fs = std::filesystem;

Ensemble initial_ensemble(const RunConfig& cfg) { return sample(cfg.init, cfg.n_particles, cfg.seed); }

DiagnosticSettings diagnostic_settings(const RunConfig& cfg) {
  DiagnosticSettings s;
  if (cfg.regime && cfg.regime->regime != Regime::CompactVelocity) s.moment_order = cfg.regime->moment_order();
  else if (cfg.init.D) s.moment_order = *cfg.init.D;
  if (cfg.init.variant != InitVariant::PolynomialTail) {
    s.exp_rate = cfg.init.alpha;
    s.exp_weight = cfg.init.variant == InitVariant::CompactVelocity ? ExpWeight::Position : ExpWeight::Both;
  }
  s.regime = cfg.regime;
  s.kernel = cfg.kernel;
  return s;
}

Ensemble perturb_velocities(const Ensemble& ens, double eps, std::uint64_t seed) {
  Ensemble out = ens;
  std::mt19937_64 rng(stream_seed(seed, 0x5eed5eedULL));
  for (double& v : out.velocities()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v += eps * (2.0 * u - 1.0);
  }
  return out;
}

namespace {

std::string hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

IntegrateOptions options_for(const RunConfig& cfg, bool keep_snapshots, bool diagnostics = true) {
  IntegrateOptions o;
  o.kernel = cfg.kernel;
  o.diagnostics = diagnostic_settings(cfg);
  o.keep_snapshots = keep_snapshots;
  o.record_diagnostics = diagnostics;
  return o;
}

Json regime_json(const RegimeSpec& r) {
  Json j;
  j["id"] = static_cast<int>(r.regime);
  j["name"] = to_string(r.regime);
  j["beta"] = r.beta;
  j["kappa"] = r.kappa;
  j["gamma"] = r.gamma_or_default();
  if (r.regime != Regime::CompactVelocity) j["D"] = r.moment_order();
  if (r.alpha) j["alpha"] = *r.alpha;
  if (r.p_inf) j["p_inf"] = *r.p_inf;
  if (r.C1) j["C1"] = *r.C1;
  return j;
}

Json fit_json(const RateFit& f) {
  return Json{{"exponent", f.exponent},
              {"log_prefactor", f.log_prefactor},
              {"r_squared", f.r_squared},
              {"window", {f.window.t_min, f.window.t_max}},
              {"points", f.points}};
}

Json verdict_json(const EnvelopeVerdict& v) {
  Json j;
  j["kind"] = to_string(v.kind);
  if (v.kind == EnvelopeKind::PowerLaw || v.kind == EnvelopeKind::Exponential) {
    j["theoretical_exponent_or_rate"] = v.theoretical_exponent_or_rate;
  }
  j["fitted_constant"] = v.fitted_constant;
  j["violation_count"] = v.violation_count;
  j["checked_count"] = v.checked_count;
  j["max_relative_violation"] = v.max_relative_violation;
  if (v.kind == EnvelopeKind::Boundedness) {
    j["sup"] = v.sup;
    j["sup_ratio"] = v.sup_ratio;
  }
  j["passed"] = v.passed;
  return j;
}

Json check_json(const CheckResult& c) {
  return Json{{"name", c.name},
              {"passed", c.passed},
              {"residual", c.residual},
              {"threshold", c.threshold},
              {"violations", c.violations}};
}

void write_wall_time(const fs::path& dir, std::chrono::steady_clock::time_point start) {
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(dir / "wall_time.txt", format_double(secs) + "\n");
}

std::vector<double> column(const TimeSeries& s, bool second) {
  std::vector<double> out;
  for (const auto& [t, y] : s) out.push_back(second ? y : t);
  return out;
}

void write_series_plot(const fs::path& path, const std::string& title, const std::string& y_label,
                       const TimeSeries& series, bool log_x, bool log_y,
                       const std::vector<PlotSeries>& extra = {}) {
  Plot p;
  p.title = title;
  p.x_label = log_x ? "1 + t" : "t";
  p.y_label = y_label;
  p.log_x = log_x;
  p.log_y = log_y;
  PlotSeries s{y_label, column(series, false), column(series, true), false};
  if (log_x) {
    for (double& x : s.x) x += 1.0;
  }
  p.series.push_back(std::move(s));
  for (auto e : extra) {
    if (log_x) {
      for (double& x : e.x) x += 1.0;
    }
    p.series.push_back(std::move(e));
  }
  write_text(path, render_svg(p));
}

struct SimulationOutputs {
  Ensemble initial;
  Trajectory traj;
};

SimulationOutputs run_simulation(const RunConfig& cfg, bool keep_snapshots) {
  Ensemble initial = initial_ensemble(cfg);
  Trajectory traj = integrate(initial, cfg.model, cfg.grid, options_for(cfg, keep_snapshots));
  return {std::move(initial), std::move(traj)};
}

Json run_header(const RunConfig& cfg, const Trajectory& traj) {
  Json j;
  j["config"] = config_json(cfg);
  j["init_digest"] = hex(traj.init_digest);
  j["steps"] = traj.grid.steps();
  j["snapshots"] = traj.diagnostics.empty() ? traj.snapshots.size() : traj.diagnostics.size();
  return j;
}

}  // namespace

Json config_json(const RunConfig& cfg) {
  Json j;
  Json entries = Json::object();
  for (const auto& [k, v] : cfg.echo) entries[k] = v;
  j["entries"] = entries;
  j["model"] = {{"kappa", cfg.model.kappa()}, {"beta", cfg.model.beta()}};
  Json init;
  init["variant"] = to_string(cfg.init.variant);
  init["dim"] = cfg.init.dim;
  if (cfg.init.D) init["D"] = *cfg.init.D;
  if (cfg.init.alpha) init["alpha"] = *cfg.init.alpha;
  if (cfg.init.p_inf) init["p_inf"] = *cfg.init.p_inf;
  init["scale"] = cfg.init.scale;
  init["recenter"] = cfg.init.recenter;
  j["init"] = init;
  j["grid"] = {{"t0", cfg.grid.t0},
               {"t_end", cfg.grid.t_end},
               {"dt", cfg.grid.dt},
               {"stride", cfg.grid.snapshot_stride}};
  if (cfg.regime) j["regime"] = regime_json(*cfg.regime);
  j["n"] = cfg.n_particles;
  j["seed"] = cfg.seed;
  j["kernel"] = to_string(cfg.kernel);
  return j;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  ensure_directory(cfg.outputs);
  auto [initial, traj] = run_simulation(cfg, false);
  const Ensemble& final_state = *traj.final_state;

  write_text(cfg.outputs / "diagnostics.csv", diagnostics_csv(traj.diagnostics, initial.dim()));
  write_text(cfg.outputs / "ensemble_final.csv", ensemble_csv(final_state));

  Json summary = run_header(cfg, traj);
  summary["momentum_drift"] = momentum_drift(traj);
  summary["center_of_mass_error"] = center_of_mass_error(traj);
  const auto& f = traj.diagnostics.back();
  summary["final"] = {{"t", f.t},
                      {"velocity_variance", f.velocity_variance},
                      {"spatial_cohesion", f.spatial_cohesion},
                      {"max_speed", f.max_speed}};
  if (traj.settings.regime && traj.settings.regime->C1) summary["effective_region_C1"] = *traj.settings.regime->C1;
  write_json(cfg.outputs / "summary.json", summary);

  if (cfg.emit_plots) {
    write_series_plot(cfg.outputs / "velocity_variance.svg", "velocity variance", "velocity_variance",
                      velocity_variance_series(traj), true, true);
    write_series_plot(cfg.outputs / "spatial_cohesion.svg", "spatial cohesion", "spatial_cohesion",
                      spatial_cohesion_series(traj), false, false);
  }
  write_wall_time(cfg.outputs, start);
  log << "simulate: " << traj.diagnostics.size() << " snapshots, momentum drift "
      << format_double(summary["momentum_drift"].get<double>()) << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  ensure_directory(cfg.outputs);
  auto [initial, traj] = run_simulation(cfg, true);
  const auto checks = invariant_suite(traj, cfg.regime);
  traj.snapshots.clear();

  Json report = run_header(cfg, traj);
  Json arr = Json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back(check_json(c));
    all = all && c.passed;
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " residual=" << format_double(c.residual) << "\n";
  }
  report["checks"] = arr;
  report["passed"] = all;
  write_text(cfg.outputs / "diagnostics.csv", diagnostics_csv(traj.diagnostics, initial.dim()));
  write_json(cfg.outputs / "verify.json", report);
  write_wall_time(cfg.outputs, start);
  return all ? kExitOk : kExitCheckFailed;
}

int cmd_rates(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.regime) throw ConfigError("regime.id", "the rates command needs a regime");
  const auto start = std::chrono::steady_clock::now();
  ensure_directory(cfg.outputs);
  auto [initial, traj] = run_simulation(cfg, true);
  const auto report = gronwall_report(traj, *cfg.regime);
  traj.snapshots.clear();

  Json j = run_header(cfg, traj);
  j["regime"] = regime_json(*traj.settings.regime);
  j["theoretical_exponent"] = report.theoretical_exponent;
  j["exponent_derived"] = report.exponent_derived;
  j["fitted_exponent"] = fit_json(report.fit);
  j["velocity_envelope"] = verdict_json(report.velocity_envelope);
  j["cohesion_boundedness"] = verdict_json(report.cohesion_boundedness);
  j["tail_bound"] = verdict_json(report.tail_bound);
  j["dissipation_identity"] = {{"residual", report.dissipation_residual}, {"passed", report.dissipation_passed}};
  j["conservation"] = {{"momentum_drift", report.momentum_drift},
                       {"center_of_mass_error", report.center_of_mass_error},
                       {"passed", report.conservation_passed}};
  j["passed"] = report.passed;
  write_text(cfg.outputs / "diagnostics.csv", diagnostics_csv(traj.diagnostics, initial.dim()));
  write_json(cfg.outputs / "rates.json", j);

  if (cfg.emit_plots) {
    const auto var = velocity_variance_series(traj);
    PlotSeries env{"C (1+t)^" + format_double(report.theoretical_exponent), {}, {}, true};
    for (const auto& [t, y] : var) {
      env.x.push_back(t);
      env.y.push_back(report.velocity_envelope.fitted_constant * std::pow(1.0 + t, report.theoretical_exponent));
    }
    write_series_plot(cfg.outputs / "rates_velocity_variance.svg", "velocity variance with envelope",
                      "velocity_variance", var, true, true, {env});
    write_series_plot(cfg.outputs / "rates_spatial_cohesion.svg", "spatial cohesion", "spatial_cohesion",
                      spatial_cohesion_series(traj), false, false);
  }
  write_wall_time(cfg.outputs, start);
  log << "rates: theoretical exponent " << format_double(report.theoretical_exponent) << ", fitted "
      << format_double(report.fit.exponent) << ", " << (report.passed ? "pass" : "fail") << "\n";
  return report.passed ? kExitOk : kExitCheckFailed;
}

int cmd_stability(const RunConfig& cfg, std::ostream& log) {
  if (!(cfg.perturbation > 0.0)) throw ConfigError("stability.perturbation", "must be positive");
  if (!cfg.stability_sliced && cfg.n_particles > kExactTransportMax) {
    throw ConfigError("run.n", "exceeds the exact transport limit; set stability.sliced = true");
  }
  const auto start = std::chrono::steady_clock::now();
  ensure_directory(cfg.outputs);
  const Ensemble a0 = initial_ensemble(cfg);
  const Ensemble b0 = perturb_velocities(a0, cfg.perturbation, cfg.seed);
  const auto opts = options_for(cfg, true, false);
  const Trajectory a = integrate(a0, cfg.model, cfg.grid, opts);
  const Trajectory b = integrate(b0, cfg.model, cfg.grid, opts);
  StabilityOptions so;
  so.allow_sliced = cfg.stability_sliced;
  so.seed = cfg.seed;
  const auto series = stability_ratio(a, b, cfg.stability_p, cfg.stability_phase, so);

  Json j;
  j["config"] = config_json(cfg);
  j["perturbation"] = cfg.perturbation;
  j["p"] = cfg.stability_p;
  j["phase"] = to_string(cfg.stability_phase);
  j["phase_metric"] = "euclidean on (x, v) with unit relative weight";
  j["distance"] = series.sliced ? "sliced" : "exact";
  Json pts = Json::array();
  for (const auto& p : series.points) pts.push_back({{"t", p.t}, {"distance", p.distance}, {"ratio", p.ratio}});
  j["series"] = pts;
  j["max_ratio"] = series.max_ratio();
  write_json(cfg.outputs / "stability.json", j);
  if (cfg.emit_plots) {
    TimeSeries s;
    for (const auto& p : series.points) s.emplace_back(p.t, p.ratio);
    write_series_plot(cfg.outputs / "stability_ratio.svg", "W_p stability ratio", "ratio", s, false, false);
  }
  write_wall_time(cfg.outputs, start);
  log << "stability: max ratio " << format_double(series.max_ratio()) << "\n";
  return kExitOk;
}

int cmd_uniqueness(const RunConfig& cfg, std::ostream& log) {
  if (cfg.refine < 2) throw ConfigError("uniqueness.refine", "must be at least 2");
  const auto start = std::chrono::steady_clock::now();
  ensure_directory(cfg.outputs);
  const Ensemble init = initial_ensemble(cfg);
  const auto opts = options_for(cfg, true, false);
  TimeGrid mid = cfg.grid;
  mid.substeps = cfg.refine;
  TimeGrid fine = cfg.grid;
  fine.substeps = cfg.refine * cfg.refine;
  const Trajectory coarse = integrate(init, cfg.model, cfg.grid, opts);
  const Trajectory middle = integrate(init, cfg.model, mid, opts);
  const Trajectory finest = integrate(init, cfg.model, fine, opts);
  const Trajectory again = integrate(init, cfg.model, cfg.grid, opts);

  const auto d1 = delta_functional(coarse, middle);
  const auto d2 = delta_functional(middle, finest);
  const auto d0 = delta_functional(coarse, again);
  auto max_of = [](const std::vector<std::pair<double, double>>& d) {
    double m = 0.0;
    for (const auto& [t, v] : d) m = std::max(m, v);
    return m;
  };
  const double m1 = max_of(d1), m2 = max_of(d2), m0 = max_of(d0);
  const double order = (m1 > 0.0 && m2 > 0.0) ? std::log(m1 / m2) / std::log(static_cast<double>(cfg.refine))
                                              : std::numeric_limits<double>::quiet_NaN();
  const bool passed = std::isfinite(order) && order >= 3.5 && m0 == 0.0;

  auto series_json = [](const std::vector<std::pair<double, double>>& d) {
    Json a = Json::array();
    for (const auto& [t, v] : d) a.push_back({{"t", t}, {"delta", v}});
    return a;
  };
  Json j;
  j["config"] = config_json(cfg);
  j["init_digest"] = hex(coarse.init_digest);
  j["refine"] = cfg.refine;
  j["dt"] = {cfg.grid.dt, cfg.grid.dt / static_cast<double>(cfg.refine),
             cfg.grid.dt / static_cast<double>(cfg.refine * cfg.refine)};
  j["delta_coarse"] = series_json(d1);
  j["delta_fine"] = series_json(d2);
  j["max_delta_coarse"] = m1;
  j["max_delta_fine"] = m2;
  j["max_delta_identical"] = m0;
  if (std::isfinite(order)) j["observed_order"] = order;
  else j["observed_order"] = nullptr;
  j["passed"] = passed;
  write_json(cfg.outputs / "uniqueness.json", j);
  if (cfg.emit_plots) {
    TimeSeries s1(d1.begin(), d1.end()), s2(d2.begin(), d2.end());
    PlotSeries fine_series{"dt/refine vs dt/refine^2", column(s2, false), column(s2, true), true};
    write_series_plot(cfg.outputs / "uniqueness_delta.svg", "deviation functional", "dt vs dt/refine", s1, false,
                      true, {fine_series});
  }
  write_wall_time(cfg.outputs, start);
  log << "uniqueness: observed order " << (std::isfinite(order) ? format_double(order) : "n/a") << "\n";
  return passed ? kExitOk : kExitCheckFailed;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IntegrationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const OverflowError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace cskin
