#include "cskin/integrate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "cskin/kernels.hpp"

namespace cskin {

void TimeGrid::validate() const {
  if (!std::isfinite(t0) || !std::isfinite(t_end)) throw DomainError("grid times must be finite");
  if (!(t_end >= t0)) throw DomainError("grid.t_end must not precede grid.t0");
  if (!std::isfinite(dt) || !(dt > 0.0)) throw DomainError("grid.dt must be positive");
  if (t_end > t0 && dt > t_end - t0) throw DomainError("grid.dt exceeds the time horizon");
  if (snapshot_stride == 0) throw DomainError("grid.stride must be positive");
  if (substeps == 0) throw DomainError("grid substeps must be positive");
}

std::size_t TimeGrid::steps() const {
  const double span = t_end - t0;
  if (!(span > 0.0)) return 0;
  return static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
}

double TimeGrid::time_at(std::size_t step) const {
  if (step >= steps()) return t_end;
  return t0 + static_cast<double>(step) * dt;
}

double default_time_step(double kappa) { return 1e-2 * std::min(1.0, kappa > 0.0 ? 1.0 / kappa : 1.0); }

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) t.push_back(d.t);
  } else {
    for (const auto& s : snapshots) t.push_back(s.t);
  }
  return t;
}

std::uint64_t content_digest(const Ensemble& ens) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(ens.dim());
  mix(ens.size());
  for (double c : ens.positions()) mix(std::bit_cast<std::uint64_t>(c));
  for (double c : ens.velocities()) mix(std::bit_cast<std::uint64_t>(c));
  return h;
}

namespace {

class Rk4Stepper {
public:
  Rk4Stepper(std::size_t dim, std::size_t n, const ModelParams& params, KernelMode mode)
      : dim_(dim), n_(n), params_(params), mode_(mode) {
    const std::size_t m = dim * n;
    for (auto* buf : {&xs_, &vs_, &k1v_, &k2v_, &k3v_, &k4v_, &k2x_, &k3x_}) buf->resize(m);
  }

  void step(std::span<double> x, std::span<double> v, double h) {
    const std::size_t m = dim_ * n_;
    const double half = 0.5 * h;
    accel(x, v, k1v_);
    for (std::size_t i = 0; i < m; ++i) {
      xs_[i] = x[i] + half * v[i];
      vs_[i] = v[i] + half * k1v_[i];
    }
    k2x_ = vs_;
    accel(xs_, vs_, k2v_);
    for (std::size_t i = 0; i < m; ++i) {
      xs_[i] = x[i] + half * k2x_[i];
      vs_[i] = v[i] + half * k2v_[i];
    }
    k3x_ = vs_;
    accel(xs_, vs_, k3v_);
    for (std::size_t i = 0; i < m; ++i) {
      xs_[i] = x[i] + h * k3x_[i];
      vs_[i] = v[i] + h * k3v_[i];
    }
    accel(xs_, vs_, k4v_);
    const double sixth = h / 6.0;
    for (std::size_t i = 0; i < m; ++i) {
      // k1x = v, k4x = vs_
      x[i] += sixth * (v[i] + 2.0 * k2x_[i] + 2.0 * k3x_[i] + vs_[i]);
      v[i] += sixth * (k1v_[i] + 2.0 * k2v_[i] + 2.0 * k3v_[i] + k4v_[i]);
    }
  }

private:
  void accel(std::span<const double> x, std::span<const double> v, std::vector<double>& out) {
    kernels::acceleration({dim_, n_, x, v}, params_, mode_, out);
  }

  std::size_t dim_;
  std::size_t n_;
  ModelParams params_;
  KernelMode mode_;
  std::vector<double> xs_, vs_, k1v_, k2v_, k3v_, k4v_, k2x_, k3x_;
};

bool finite_and_bounded(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(),
                      [](double c) { return std::isfinite(c) && std::abs(c) <= kOverflowThreshold; });
}

}  // namespace

Ensemble step_rk4(const Ensemble& ens, const ModelParams& params, double dt, KernelMode mode) {
  if (!std::isfinite(dt) || !(dt > 0.0)) throw DomainError("step_rk4: dt must be positive");
  Ensemble out = ens;
  Rk4Stepper stepper(ens.dim(), ens.size(), params, mode);
  stepper.step(out.positions(), out.velocities(), dt);
  if (!finite_and_bounded(out.positions()) || !finite_and_bounded(out.velocities())) {
    throw IntegrationError("non-finite or overflowing state after RK4 step", 0, dt);
  }
  return out;
}

Trajectory integrate(const Ensemble& ens, const ModelParams& params, const TimeGrid& grid,
                     const IntegrateOptions& options) {
  grid.validate();
  Trajectory traj;
  traj.grid = grid;
  traj.params = params;
  traj.init_digest = content_digest(ens);
  DiagnosticSettings settings = options.diagnostics;
  settings.kernel = options.kernel;
  if (options.record_diagnostics) settings = resolve_settings(std::move(settings), ens);
  traj.settings = settings;

  Ensemble state = ens;
  auto capture = [&](std::size_t step) {
    const double t = grid.time_at(step);
    if (options.record_diagnostics) {
      traj.diagnostics.push_back(compute_diagnostics(state, params, settings, t, grid.t0));
    }
    if (options.keep_snapshots) traj.snapshots.push_back({step, t, state});
  };

  const std::size_t n_steps = grid.steps();
  const std::size_t cap = grid.snapshot_count();
  traj.diagnostics.reserve(cap);
  if (options.keep_snapshots) traj.snapshots.reserve(cap);

  capture(0);
  Rk4Stepper stepper(ens.dim(), ens.size(), params, options.kernel);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t_start = grid.time_at(k);
    const double h = grid.time_at(k + 1) - t_start;
    const double sub = h / static_cast<double>(grid.substeps);
    for (std::size_t s = 0; s < grid.substeps; ++s) {
      stepper.step(state.positions(), state.velocities(), sub);
    }
    if (!finite_and_bounded(state.positions()) || !finite_and_bounded(state.velocities())) {
      throw IntegrationError("integration failed at step " + std::to_string(k + 1) + " (t = " +
                                 std::to_string(grid.time_at(k + 1)) + ")",
                             k + 1, grid.time_at(k + 1));
    }
    if ((k + 1) % grid.snapshot_stride == 0) capture(k + 1);
  }
  traj.final_state = std::move(state);
  return traj;
}

std::pair<Trajectory, Trajectory> paired_integrate(const Ensemble& ens, const ModelParams& params,
                                                   const TimeGrid& grid, std::size_t refine,
                                                   const IntegrateOptions& options) {
  if (refine < 2) throw DomainError("paired_integrate: refine must be at least 2");
  TimeGrid fine = grid;
  fine.substeps = grid.substeps * refine;
  return {integrate(ens, params, grid, options), integrate(ens, params, fine, options)};
}

}  // namespace cskin
