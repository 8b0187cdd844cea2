#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cskin/functionals.hpp"
#include "cskin/sampler.hpp"
#include "oracles.hpp"

using namespace cskin;

namespace {

double max_abs_mean(const std::vector<double>& m) {
  double r = 0.0;
  for (double x : m) r = std::max(r, std::abs(x));
  return r;
}

double poly_budget(const Ensemble& e, double D) {
  return p_moment(e, Coordinate::Position, D) + p_moment(e, Coordinate::Velocity, D);
}

}  // namespace

TEST_CASE("InitSpec validation") {
  CHECK_THROWS_AS(InitSpec::polynomial(2, 1.5).validate(), DomainError);
  CHECK_NOTHROW(InitSpec::polynomial(2, 2.0).validate());
  CHECK_THROWS_AS(InitSpec::exponential(2, 0.0).validate(), DomainError);
  CHECK_THROWS_AS(InitSpec::compact_velocity(2, 1.0, -1.0).validate(), DomainError);
  InitSpec missing;
  missing.variant = InitVariant::ExponentialTail;
  CHECK_THROWS_AS(missing.validate(), DomainError);
  CHECK_THROWS_AS(sample(InitSpec::polynomial(2, 4.0), 0, 1), DomainError);
  CHECK_THROWS_AS(sample(InitSpec::polynomial(2, std::nan("")), 10, 1), DomainError);
  CHECK(init_variant_from_string("compact_velocity") == InitVariant::CompactVelocity);
  CHECK_THROWS_AS(init_variant_from_string("gaussian"), DomainError);
}

TEST_CASE("recentering zeroes the empirical means") {
  const auto p = sample(InitSpec::polynomial(2, 6.0), 3000, 1);
  CHECK(max_abs_mean(p.mean_position()) < 1e-13);
  CHECK(max_abs_mean(p.mean_velocity()) < 1e-13);
  const auto e = sample(InitSpec::exponential(3, 1.0), 3000, 2);
  CHECK(max_abs_mean(e.mean_position()) < 1e-13);
  CHECK(max_abs_mean(e.mean_velocity()) < 1e-13);
  const auto c = sample(InitSpec::compact_velocity(2, 1.0, 1.0), 3000, 3);
  CHECK(max_abs_mean(c.mean_position()) < 1e-13);
}

TEST_CASE("samplers are pure functions of (spec, n, seed)") {
  for (const auto& spec : {InitSpec::polynomial(2, 6.0), InitSpec::exponential(2, 1.0),
                           InitSpec::compact_velocity(3, 0.5, 2.0)}) {
    CHECK(sample(spec, 500, 42) == sample(spec, 500, 42));
    CHECK_FALSE(sample(spec, 500, 42) == sample(spec, 500, 43));
  }
}

TEST_CASE("particle i depends only on (seed, i)") {
  const auto spec = InitSpec::polynomial(2, 5.0, 1.0, false);
  const auto small = sample(spec, 50, 9);
  const auto big = sample(spec, 200, 9);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(small.position(i)[0] == big.position(i)[0]);
    CHECK(small.velocity(i)[1] == big.velocity(i)[1]);
  }
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) != stream_seed(2, 0));
}

TEST_CASE("polynomial budget is stable under doubling N") {
  const auto spec = InitSpec::polynomial(2, 6.0);
  const double a = poly_budget(sample(spec, 1 << 12, 5), 6.0);
  const double b = poly_budget(sample(spec, 1 << 13, 5), 6.0);
  CHECK(std::isfinite(a));
  CHECK(b / a >= 0.5);
  CHECK(b / a <= 2.0);
}

TEST_CASE("exponential budget is stable under doubling N") {
  const auto spec = InitSpec::exponential(2, 1.0);
  const double a = exp_weighted_mass(sample(spec, 1 << 12, 6), ExpWeight::Both, 1.0);
  const double b = exp_weighted_mass(sample(spec, 1 << 13, 6), ExpWeight::Both, 1.0);
  CHECK(b / a >= 0.5);
  CHECK(b / a <= 2.0);
  const auto budget = verify_moment_budget(sample(spec, 16, 1), spec);
  const double mgf = oracle::exponential_radial_mgf(2.0);
  CHECK(*budget.analytic_value == doctest::Approx(mgf * mgf));
}

TEST_CASE("compact velocity support and spatial budget") {
  const auto spec = InitSpec::compact_velocity(2, 1.0, 0.75);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto e = sample(spec, 5000, seed);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(norm(e.velocity(i)) <= 0.75);
  }
  const double a = exp_weighted_mass(sample(spec, 1 << 12, 8), ExpWeight::Position, 1.0);
  const double b = exp_weighted_mass(sample(spec, 1 << 13, 8), ExpWeight::Position, 1.0);
  CHECK(b / a >= 0.5);
  CHECK(b / a <= 2.0);
  CHECK(*verify_moment_budget(sample(spec, 4, 1), spec).analytic_value ==
        doctest::Approx(oracle::exponential_radial_mgf(2.0)));
}

TEST_CASE("verify_moment_budget on degenerate ensembles") {
  const Ensemble origin(2, 100);
  const auto p = verify_moment_budget(origin, InitSpec::polynomial(2, 4.0));
  CHECK(p.kind == MomentBudget::Kind::Polynomial);
  CHECK(p.empirical_value == 0.0);
  const auto e = verify_moment_budget(origin, InitSpec::exponential(2, 1.0));
  CHECK(e.kind == MomentBudget::Kind::Exponential);
  CHECK(e.empirical_value == 1.0);
  CHECK_THROWS_AS(verify_moment_budget(origin, InitSpec::polynomial(3, 4.0)), DomainError);
}

TEST_CASE("polynomial D = 4, d = 1 against closed forms") {
  const double D = 4.0;
  const auto spec = InitSpec::polynomial(1, D, 1.0, false);
  const std::size_t n = 1 << 15;
  const auto e = sample(spec, n, 17);
  // analytic budget: two coordinates, each E|.|^D from quadrature
  const double per_coordinate = oracle::polynomial_radial_moment(1.0, D + 2.0, 1.0, D);
  CHECK(*verify_moment_budget(e, spec).analytic_value == doctest::Approx(2.0 * per_coordinate).epsilon(1e-6));

  // |x|^D itself has infinite variance here, so the Monte-Carlo checks use
  // the radial CDF 1 - (1 + r)^-5 and the finite-variance second moment.
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = std::abs(e.velocity(i)[0]);
  std::sort(r.begin(), r.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double F = 1.0 - std::pow(1.0 + r[i], -5.0);
    ks = std::max({ks, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));  // 1% Kolmogorov level

  const double m2 = oracle::polynomial_radial_moment(1.0, D + 2.0, 1.0, 2.0);
  double s = 0.0, s2 = 0.0;
  for (double x : r) {
    s += x * x;
    s2 += x * x * x * x;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - m2) <= 3.0 * se);
}

TEST_CASE("polynomial class is genuinely heavy-tailed") {
  // q = D + d + 1: the D-th radial moment converges, the (D + 2)-th grows
  // without bound as the truncation radius doubles.
  const double d = 2.0, D = 6.0, q = D + d + 1.0;
  const double m1 = oracle::polynomial_radial_moment(d, q, 1.0, D, 1e3);
  const double m2 = oracle::polynomial_radial_moment(d, q, 1.0, D, 2e3);
  CHECK(m2 / m1 < 1.01);
  const double h1 = oracle::polynomial_radial_moment(d, q, 1.0, D + 2.0, 1e3);
  const double h2 = oracle::polynomial_radial_moment(d, q, 1.0, D + 2.0, 2e3);
  CHECK(h2 / h1 > 1.8);
}

TEST_CASE("tabulated inverse CDF") {
  // rate-2 exponential on the line: F^-1(u) = -log(1 - u) / 2
  const auto law = RadialLaw::exponential(1, 2.0);
  for (double u = 0.01; u < 0.995; u += 0.01) {
    CHECK(law.quantile(u) == doctest::Approx(-std::log1p(-u) / 2.0).epsilon(1e-6));
  }
  CHECK(law.quantile(0.0) == 0.0);
  const auto poly = RadialLaw::polynomial(2, 6.0, 1.0);
  double prev = 0.0;
  for (double u = 0.001; u < 1.0; u += 0.001) {
    const double r = poly.quantile(u);
    CHECK(r >= prev);
    prev = r;
  }
}
