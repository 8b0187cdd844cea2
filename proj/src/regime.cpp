#include "cskin/regime.hpp"

#include <algorithm>
#include <cmath>

#include "cskin/model.hpp"

namespace cskin {

double RegimeSpec::gamma_or_default() const {
  if (gamma) return *gamma;
  return beta > 0.0 ? 1.0 / beta : 2.0;
}

double RegimeSpec::moment_order() const {
  if (D) return *D;
  if (regime == Regime::ExponentialTail) return kDerivedMomentOrder;
  throw DomainError("regime.D is required for the polynomial-tail regime");
}

double regime1_min_order(double beta, double gamma) {
  return std::max(2.0 * (3.0 - beta * gamma) / (gamma - 1.0), 4.0);
}

void RegimeSpec::check_fields() const {
  if (!(kappa > 0.0)) throw DomainError("regime.kappa must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("regime.beta must lie in [0, 1]");
  switch (regime) {
    case Regime::PolynomialTail:
    case Regime::ExponentialTail:
      if (!(beta < 1.0)) throw DomainError("regimes 1 and 2 require beta < 1");
      if (!(gamma_or_default() > 1.0)) throw DomainError("regime.gamma must exceed 1");
      if (regime == Regime::PolynomialTail) {
        if (!D) throw DomainError("regime.D is required for regime 1");
      } else if (!alpha || !(*alpha > 0.0)) {
        throw DomainError("regime.alpha must be positive for regime 2");
      }
      break;
    case Regime::CompactVelocity:
      if (beta != 1.0) throw DomainError("regime 3 requires beta = 1");
      if (!alpha || !(*alpha > 0.0)) throw DomainError("regime.alpha must be positive for regime 3");
      if (!p_inf || !(*p_inf > 0.0)) throw DomainError("regime.p_inf must be positive for regime 3");
      break;
  }
  if (C1 && !(*C1 > 0.0)) throw DomainError("regime.C1 must be positive");
}

void RegimeSpec::validate() const {
  check_fields();
  if (regime == Regime::PolynomialTail && !(*D > regime1_min_order(beta, gamma_or_default()))) {
    throw DomainError("regime.D must exceed max{2(3 - beta gamma)/(gamma - 1), 4}");
  }
  if (regime == Regime::CompactVelocity && !(kappa > 1.0)) throw DomainError("regime 3 requires kappa > 1");
}

void RegimeSpec::require_radius_parameters() const {
  if (regime == Regime::CompactVelocity) {
    if (!alpha || !p_inf) throw DomainError("effective radius of regime 3 needs alpha and p_inf");
    return;
  }
  if (!C1) throw DomainError("effective radius of regimes 1 and 2 needs C1");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::PolynomialTail: return "polynomial_tail";
    case Regime::ExponentialTail: return "exponential_tail";
    case Regime::CompactVelocity: return "compact_velocity";
  }
  return "unknown";
}

}  // namespace cskin
