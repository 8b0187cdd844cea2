#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cskin {

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Coupling strength and decay exponent of the communication weight.
/// Construction rejects kappa < 0 and beta outside [0, 1].
class ModelParams {
public:
  ModelParams() = default;
  ModelParams(double kappa, double beta);

  double kappa() const { return kappa_; }
  double beta() const { return beta_; }

  bool operator==(const ModelParams&) const = default;

private:
  double kappa_ = 1.0;
  double beta_ = 0.0;
};

/// N equally weighted phase-space samples in d dimensions.
///
/// Coordinates are stored row-major: particle i occupies
/// [i * dim, (i + 1) * dim) of both the position and the velocity buffer.
class Ensemble {
public:
  Ensemble(std::size_t dim, std::size_t n);
  Ensemble(std::size_t dim, std::vector<double> positions, std::vector<double> velocities);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return n_; }
  double weight() const { return 1.0 / static_cast<double>(n_); }

  std::span<const double> position(std::size_t i) const { return {x_.data() + i * dim_, dim_}; }
  std::span<double> position(std::size_t i) { return {x_.data() + i * dim_, dim_}; }
  std::span<const double> velocity(std::size_t i) const { return {v_.data() + i * dim_, dim_}; }
  std::span<double> velocity(std::size_t i) { return {v_.data() + i * dim_, dim_}; }

  std::span<const double> positions() const { return x_; }
  std::span<double> positions() { return x_; }
  std::span<const double> velocities() const { return v_; }
  std::span<double> velocities() { return v_; }

  /// Empirical means (1/N) sum x_i and (1/N) sum v_i.
  std::vector<double> mean_position() const;
  std::vector<double> mean_velocity() const;

  bool operator==(const Ensemble&) const = default;

private:
  std::size_t dim_;
  std::size_t n_;
  std::vector<double> x_;
  std::vector<double> v_;
};

struct PhasePoint {
  std::vector<double> x;
  std::vector<double> v;
};

/// Which pairwise kernel evaluates the alignment force.
///  - Reference: scalar loop over unordered pairs (i, j), i < j, row-major.
///  - Parallel: OpenMP over fixed row blocks, SIMD inner loops.
enum class KernelMode { Reference, Parallel };

std::string to_string(KernelMode mode);
KernelMode kernel_mode_from_string(const std::string& name);

/// phi(r) = (1 + r^2)^(-beta/2).
double comm_weight(double r, double beta);

/// Same weight evaluated from the squared distance. Exponents 0, 1/4, 1/2
/// and 1 take a sqrt-only path; everything else goes through pow.
double comm_weight_sq(double r2, double beta);

/// a_i = (kappa/N) sum_j phi(|x_j - x_i|) (v_j - v_i), row-major N x d.
std::vector<double> cs_acceleration(const Ensemble& ens, const ModelParams& params,
                                    KernelMode mode = KernelMode::Parallel);

/// -kappa (1/N) sum_j phi(|p.x - x_j|) (p.v - v_j): the empirical
/// alignment force felt by a test point.
std::vector<double> mean_field_force(const Ensemble& ens, const PhasePoint& p,
                                     const ModelParams& params);

double norm(std::span<const double> a);

}  // namespace cskin
