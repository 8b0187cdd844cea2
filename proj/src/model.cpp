#include "cskin/model.hpp"

#include <cmath>

#include "cskin/kernels.hpp"
#include "weight.hpp"

namespace cskin {

ModelParams::ModelParams(double kappa, double beta) : kappa_(kappa), beta_(beta) {
  if (!std::isfinite(kappa) || kappa < 0.0) {
    throw DomainError("model.kappa must be a finite nonnegative number");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw DomainError("model.beta must lie in [0, 1]");
  }
}

Ensemble::Ensemble(std::size_t dim, std::size_t n)
    : dim_(dim), n_(n), x_(dim * n, 0.0), v_(dim * n, 0.0) {
  if (dim == 0) throw DomainError("ensemble dimension must be positive");
  if (n == 0) throw DomainError("ensemble must hold at least one particle");
}

Ensemble::Ensemble(std::size_t dim, std::vector<double> positions, std::vector<double> velocities)
    : dim_(dim), n_(dim == 0 ? 0 : positions.size() / dim), x_(std::move(positions)),
      v_(std::move(velocities)) {
  if (dim == 0) throw DomainError("ensemble dimension must be positive");
  if (x_.size() % dim != 0 || x_.size() != v_.size()) {
    throw DomainError("position and velocity buffers must both hold N * dim entries");
  }
  if (n_ == 0) throw DomainError("ensemble must hold at least one particle");
}

namespace {

std::vector<double> column_mean(std::span<const double> data, std::size_t dim, std::size_t n) {
  std::vector<double> m(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) m[k] += data[i * dim + k];
  }
  for (double& c : m) c /= static_cast<double>(n);
  return m;
}

}  // namespace

std::vector<double> Ensemble::mean_position() const { return column_mean(x_, dim_, n_); }
std::vector<double> Ensemble::mean_velocity() const { return column_mean(v_, dim_, n_); }

std::string to_string(KernelMode mode) {
  return mode == KernelMode::Reference ? "reference" : "parallel";
}

KernelMode kernel_mode_from_string(const std::string& name) {
  if (name == "reference" || name == "serial") return KernelMode::Reference;
  if (name == "parallel") return KernelMode::Parallel;
  throw DomainError("unknown kernel mode '" + name + "'");
}

double comm_weight_sq(double r2, double beta) {
  return detail::with_weight(beta, [r2](auto w) { return w(1.0 + r2); });
}

double comm_weight(double r, double beta) {
  if (!(r >= 0.0)) throw DomainError("comm_weight: distance must be nonnegative");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("comm_weight: beta must lie in [0, 1]");
  return comm_weight_sq(r * r, beta);
}

std::vector<double> cs_acceleration(const Ensemble& ens, const ModelParams& params,
                                    KernelMode mode) {
  std::vector<double> out(ens.size() * ens.dim());
  kernels::acceleration(kernels::view(ens), params, mode, out);
  return out;
}

std::vector<double> mean_field_force(const Ensemble& ens, const PhasePoint& p,
                                     const ModelParams& params) {
  const std::size_t d = ens.dim();
  if (p.x.size() != d || p.v.size() != d) {
    throw DomainError("mean_field_force: phase point dimension does not match the ensemble");
  }
  std::vector<double> f(d, 0.0);
  for (std::size_t j = 0; j < ens.size(); ++j) {
    auto xj = ens.position(j);
    auto vj = ens.velocity(j);
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double dx = xj[k] - p.x[k];
      r2 += dx * dx;
    }
    const double w = comm_weight_sq(r2, params.beta());
    for (std::size_t k = 0; k < d; ++k) f[k] += w * (vj[k] - p.v[k]);
  }
  const double scale = params.kappa() / static_cast<double>(ens.size());
  for (double& c : f) c *= scale;
  return f;
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return std::sqrt(s);
}

}  // namespace cskin
