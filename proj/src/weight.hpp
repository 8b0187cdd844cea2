#pragma once

#include <cmath>

namespace cskin::detail {

// Communication weight (1 + r^2)^(-beta/2) as a function of s = 1 + r^2.
// The special exponents keep the inner kernel loops free of pow calls so
// they vectorize.

struct UnitWeight {
  double operator()(double) const { return 1.0; }
};

struct InvSqrtWeight {  // beta = 1
  double operator()(double s) const { return 1.0 / std::sqrt(s); }
};

struct InvFourthRootWeight {  // beta = 1/2
  double operator()(double s) const { return 1.0 / std::sqrt(std::sqrt(s)); }
};

struct InvEighthRootWeight {  // beta = 1/4
  double operator()(double s) const { return 1.0 / std::sqrt(std::sqrt(std::sqrt(s))); }
};

struct PowWeight {
  double exponent;  // -beta/2
  double operator()(double s) const { return std::pow(s, exponent); }
};

template <class F>
decltype(auto) with_weight(double beta, F&& f) {
  if (beta == 0.0) return f(UnitWeight{});
  if (beta == 1.0) return f(InvSqrtWeight{});
  if (beta == 0.5) return f(InvFourthRootWeight{});
  if (beta == 0.25) return f(InvEighthRootWeight{});
  return f(PowWeight{-0.5 * beta});
}

}  // namespace cskin::detail
