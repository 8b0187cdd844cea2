#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cskin/model.hpp"

namespace cskin {

enum class InitVariant { PolynomialTail, ExponentialTail, CompactVelocity };

std::string to_string(InitVariant v);
InitVariant init_variant_from_string(const std::string& name);

/// Isotropic initial law. Positions and velocities are drawn independently:
///  - PolynomialTail: radial density r^(d-1) (1 + r/scale)^-(D + d + 1)
///  - ExponentialTail: radial density r^(d-1) exp(-2 alpha r)
///  - CompactVelocity: exponential positions, velocities uniform in the
///    closed ball of radius p_inf
struct InitSpec {
  InitVariant variant = InitVariant::PolynomialTail;
  std::size_t dim = 2;
  std::optional<double> D;
  std::optional<double> alpha;
  std::optional<double> p_inf;
  double scale = 1.0;
  bool recenter = true;

  static InitSpec polynomial(std::size_t dim, double D, double scale = 1.0, bool recenter = true);
  static InitSpec exponential(std::size_t dim, double alpha, bool recenter = true);
  static InitSpec compact_velocity(std::size_t dim, double alpha, double p_inf, bool recenter = true);

  /// Throws DomainError unless the fields of the active variant are present
  /// and valid (D >= 2 for the polynomial tail).
  void validate() const;
};

struct MomentBudget {
  enum class Kind { Polynomial, Exponential };
  Kind kind;
  double order_or_rate;
  double empirical_value;
  std::optional<double> analytic_value;
};

/// Tabulated inverse CDF of a radial density on [0, r_max]: 2^14 log-spaced
/// nodes, Gauss-Legendre cell integrals, linear interpolation of r against
/// the cumulative mass.
class RadialLaw {
public:
  RadialLaw(const std::function<double(double)>& density, double r_min, double r_max);

  static RadialLaw polynomial(std::size_t dim, double D, double scale);
  static RadialLaw exponential(std::size_t dim, double rate);

  double quantile(double u) const;
  double r_max() const { return nodes_.back(); }

  static constexpr std::size_t kNodes = std::size_t{1} << 14;

private:
  std::vector<double> nodes_;
  std::vector<double> cdf_;
};

Ensemble sample_polynomial(const InitSpec& spec, std::size_t n, std::uint64_t seed);
Ensemble sample_exponential(const InitSpec& spec, std::size_t n, std::uint64_t seed);
Ensemble sample_compact_velocity(const InitSpec& spec, std::size_t n, std::uint64_t seed);

/// Dispatches on spec.variant.
Ensemble sample(const InitSpec& spec, std::size_t n, std::uint64_t seed);

/// Empirical M_p (polynomial class) or M_e (exponential classes) of an
/// ensemble, with the closed form of the sampling law where one exists.
/// For CompactVelocity the exponential weight is e^(alpha |x|).
MomentBudget verify_moment_budget(const Ensemble& ens, const InitSpec& spec);

/// Seed of the independent stream of particle `index`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace cskin
