#include "cskin/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cskin/integrate.hpp"
#include "cskin/kernels.hpp"

namespace cskin {

namespace {

void require_dim(const Ensemble& ens, std::span<const double> ref, const char* what) {
  if (ref.size() != ens.dim()) {
    throw DomainError(std::string(what) + ": reference vector has wrong dimension");
  }
}

double squared_norm(std::span<const double> a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return s;
}

}  // namespace

double velocity_variance(const Ensemble& ens, std::span<const double> v_ref) {
  require_dim(ens, v_ref, "velocity_variance");
  const std::size_t d = ens.dim();
  double sum = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto v = ens.velocity(i);
    for (std::size_t k = 0; k < d; ++k) {
      const double dv = v[k] - v_ref[k];
      sum += dv * dv;
    }
  }
  return sum * ens.weight();
}

double spatial_cohesion(const Ensemble& ens, std::span<const double> x_ref,
                        std::span<const double> v_ref, double t) {
  require_dim(ens, x_ref, "spatial_cohesion");
  require_dim(ens, v_ref, "spatial_cohesion");
  const std::size_t d = ens.dim();
  double sum = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto x = ens.position(i);
    for (std::size_t k = 0; k < d; ++k) {
      const double dx = x[k] - x_ref[k] - t * v_ref[k];
      sum += dx * dx;
    }
  }
  return sum * ens.weight();
}

double p_moment(const Ensemble& ens, Coordinate which, double D) {
  if (!(D >= 1.0) || !std::isfinite(D)) throw DomainError("p_moment: order must be >= 1");
  const double half = 0.5 * D;
  double sum = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const double r2 = squared_norm(which == Coordinate::Position ? ens.position(i) : ens.velocity(i));
    sum += std::pow(r2, half);
  }
  return sum * ens.weight();
}

double exp_weighted_mass(const Ensemble& ens, ExpWeight which, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("exp_weighted_mass: alpha must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    double w = 0.0;
    if (which != ExpWeight::Velocity) w += norm(ens.position(i));
    if (which != ExpWeight::Position) w += norm(ens.velocity(i));
    const double term = std::exp(alpha * w);
    if (!(term <= 1e300)) {
      throw OverflowError("exp_weighted_mass: term e^(alpha w) exceeds 1e300 at particle " +
                          std::to_string(i));
    }
    sum += term;
  }
  return sum * ens.weight();
}

double tail_mass(const Ensemble& ens, Coordinate which, double R) {
  if (!(R >= 0.0)) throw DomainError("tail_mass: radius must be nonnegative");
  const double R2 = R * R;
  std::size_t count = 0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto a = which == Coordinate::Position ? ens.position(i) : ens.velocity(i);
    if (squared_norm(a) > R2) ++count;
  }
  return static_cast<double>(count) * ens.weight();
}

double dissipation_rate(const Ensemble& ens, const ModelParams& params, KernelMode mode) {
  const double n = static_cast<double>(ens.size());
  const double pairs = kernels::pair_dissipation(kernels::view(ens), params.beta(), mode);
  // sum over ordered pairs i != j is twice the unordered sum
  return -2.0 * params.kappa() * pairs / (n * n);
}

double phi_floor(double R, double beta) {
  if (!(R >= 0.0)) throw DomainError("phi_floor: radius must be nonnegative");
  return comm_weight(2.0 * R, beta);
}

double effective_radius(const RegimeSpec& regime, double t) {
  if (!(t >= 0.0)) throw DomainError("effective_radius: time must be nonnegative");
  regime.require_radius_parameters();
  if (regime.regime == Regime::CompactVelocity) {
    const double a = *regime.alpha;
    return (1.0 / a + 1.0) * *regime.p_inf + t / a;
  }
  return *regime.C1 * std::pow(1.0 + t, regime.gamma_or_default());
}

double default_region_constant(const Ensemble& initial) {
  std::vector<double> r(initial.size());
  for (std::size_t i = 0; i < initial.size(); ++i) r[i] = norm(initial.position(i));
  const auto n = r.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n) - 1;
  std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k), r.end());
  return r[k] + 1.0;
}

DiagnosticSettings resolve_settings(DiagnosticSettings settings, const Ensemble& initial) {
  if (settings.x_ref.empty()) settings.x_ref = initial.mean_position();
  if (settings.v_ref.empty()) settings.v_ref = initial.mean_velocity();
  if (settings.x_ref.size() != initial.dim() || settings.v_ref.size() != initial.dim()) {
    throw DomainError("diagnostic reference vectors have wrong dimension");
  }
  if (settings.regime && settings.regime->regime != Regime::CompactVelocity && !settings.regime->C1) {
    settings.regime->C1 = default_region_constant(initial);
  }
  return settings;
}

DiagnosticRecord compute_diagnostics(const Ensemble& ens, const ModelParams& params,
                                     const DiagnosticSettings& settings, double t, double t0) {
  const double elapsed = t - t0;
  DiagnosticRecord rec;
  rec.t = t;
  rec.momentum = ens.mean_velocity();
  rec.center_of_mass = ens.mean_position();
  rec.velocity_variance = velocity_variance(ens, settings.v_ref);
  rec.spatial_cohesion = spatial_cohesion(ens, settings.x_ref, settings.v_ref, elapsed);
  rec.moment_D_velocity = p_moment(ens, Coordinate::Velocity, settings.moment_order);
  rec.moment_D_position = p_moment(ens, Coordinate::Position, settings.moment_order);
  if (settings.exp_rate) {
    try {
      rec.exp_mass_alpha = exp_weighted_mass(ens, settings.exp_weight, *settings.exp_rate);
    } catch (const OverflowError&) {
      rec.exp_mass_alpha.reset();
    }
  }
  if (settings.regime) {
    const double R = effective_radius(*settings.regime, std::max(0.0, elapsed));
    rec.effective_radius = R;
    rec.tail_mass_position = tail_mass(ens, Coordinate::Position, R);
    rec.tail_mass_velocity = tail_mass(ens, Coordinate::Velocity, R);
  }
  double vmax2 = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) vmax2 = std::max(vmax2, squared_norm(ens.velocity(i)));
  rec.max_speed = std::sqrt(vmax2);
  rec.dissipation_rate = dissipation_rate(ens, params, settings.kernel);
  return rec;
}

std::vector<std::pair<double, double>> delta_functional(const Trajectory& a, const Trajectory& b) {
  if (a.init_digest != b.init_digest) throw DomainError("delta_functional: initial digests differ");
  if (a.snapshots.size() != b.snapshots.size()) {
    throw DomainError("delta_functional: snapshot counts differ");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(a.snapshots.size());
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    const auto& sa = a.snapshots[s];
    const auto& sb = b.snapshots[s];
    if (sa.t != sb.t) throw DomainError("delta_functional: snapshot times are not aligned");
    const Ensemble& ea = sa.ensemble;
    const Ensemble& eb = sb.ensemble;
    if (ea.dim() != eb.dim() || ea.size() != eb.size()) {
      throw DomainError("delta_functional: ensembles have different shapes");
    }
    const std::size_t d = ea.dim();
    double sum = 0.0;
    for (std::size_t i = 0; i < ea.size(); ++i) {
      double dx = 0.0, dv = 0.0;
      const auto xa = ea.position(i), xb = eb.position(i);
      const auto va = ea.velocity(i), vb = eb.velocity(i);
      for (std::size_t k = 0; k < d; ++k) {
        dx += (xa[k] - xb[k]) * (xa[k] - xb[k]);
        dv += (va[k] - vb[k]) * (va[k] - vb[k]);
      }
      sum += std::sqrt(dx) + std::sqrt(dv);
    }
    out.emplace_back(sa.t, sum * ea.weight());
  }
  return out;
}

}  // namespace cskin
