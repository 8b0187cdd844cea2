#pragma once

#include <optional>
#include <string>

namespace cskin {

/// Flocking regimes with an explicit effective-region construction.
///  1: polynomial tail, beta < 1, radius C1 (1+t)^gamma
///  2: exponential tail, beta < 1, treated as regime 1 at a derived order D
///  3: beta = 1 with compact velocity support, radius (1/alpha + 1) P_inf + t/alpha
enum class Regime { PolynomialTail = 1, ExponentialTail = 2, CompactVelocity = 3 };

/// Moment order substituted in regime 2, where every polynomial moment is finite.
inline constexpr double kDerivedMomentOrder = 8.0;

struct RegimeSpec {
  Regime regime = Regime::PolynomialTail;
  double beta = 0.0;
  double kappa = 1.0;
  std::optional<double> gamma;
  std::optional<double> D;
  std::optional<double> alpha;
  std::optional<double> p_inf;
  std::optional<double> C1;

  /// gamma if set, else 1/beta for beta > 0 and 2 for beta = 0.
  double gamma_or_default() const;
  /// D if set, else the derived order for regime 2.
  double moment_order() const;

  /// Checks that the fields are present and in range, without the order
  /// and coupling hypotheses. Throws DomainError.
  void check_fields() const;

  /// check_fields plus the hypotheses of the regime (lower bound on D for
  /// regime 1, kappa > 1 for regime 3). Throws DomainError naming the
  /// violated constraint.
  void validate() const;

  /// Throws DomainError when a parameter needed for effective_radius is
  /// missing (C1 included for regimes 1 and 2).
  void require_radius_parameters() const;
};

/// Lower bound on D for regime 1: max{2(3 - beta gamma)/(gamma - 1), 4}.
double regime1_min_order(double beta, double gamma);

std::string to_string(Regime r);

}  // namespace cskin
