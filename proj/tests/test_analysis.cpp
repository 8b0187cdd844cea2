#include <doctest.h>

#include <cmath>

#include "cskin/analysis.hpp"
#include "cskin/functionals.hpp"
#include "cskin/integrate.hpp"
#include "cskin/sampler.hpp"
#include "oracles.hpp"

using namespace cskin;

namespace {

RegimeSpec regime1(double beta, double gamma, double D) {
  RegimeSpec s;
  s.regime = Regime::PolynomialTail;
  s.beta = beta;
  s.gamma = gamma;
  s.D = D;
  return s;
}

RegimeSpec regime3(double kappa) {
  RegimeSpec s;
  s.regime = Regime::CompactVelocity;
  s.beta = 1.0;
  s.kappa = kappa;
  s.alpha = 1.0;
  s.p_inf = 1.0;
  return s;
}

TimeSeries synthetic(double t0, double t1, std::size_t n, double (*f)(double)) {
  TimeSeries s;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    s.emplace_back(t, f(t));
  }
  return s;
}

Trajectory regime_run(const RegimeSpec& spec, const InitSpec& init, std::size_t n, const TimeGrid& grid) {
  IntegrateOptions o;
  o.diagnostics.regime = spec;
  if (spec.regime == Regime::CompactVelocity) {
    o.diagnostics.exp_rate = *spec.alpha;
    o.diagnostics.exp_weight = ExpWeight::Position;
  } else {
    o.diagnostics.moment_order = spec.moment_order();
  }
  return integrate(sample(init, n, 3), ModelParams(spec.kappa, spec.beta), grid, o);
}

}  // namespace

TEST_CASE("theoretical_exponent") {
  // 1 - (8/2 * 0.5 + 0.5 * 1.5)
  CHECK(theoretical_exponent(regime1(0.5, 1.5, 8.0)) == doctest::Approx(-1.75).epsilon(1e-15));
  CHECK(theoretical_exponent(regime3(1.25)) == -2.5);
  CHECK(theoretical_exponent(regime1(0.0, 2.0, 6.0)) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(theoretical_exponent(regime1(0.25, 2.0, 8.0)) == doctest::Approx(-3.5).epsilon(1e-15));
  CHECK_FALSE(exponent_is_derived(regime1(0.25, 2.0, 8.0)));

  RegimeSpec r2;
  r2.regime = Regime::ExponentialTail;
  r2.beta = 0.5;
  r2.alpha = 1.0;
  CHECK(exponent_is_derived(r2));
  // default gamma 1/beta = 2 at the derived order 8
  CHECK(theoretical_exponent(r2) == doctest::Approx(1.0 - (4.0 + 1.0)).epsilon(1e-15));

  RegimeSpec bad = regime1(0.5, 1.5, 8.0);
  bad.D.reset();
  CHECK_THROWS_AS(theoretical_exponent(bad), DomainError);
  CHECK_THROWS_AS(regime1(0.5, 1.5, 8.0).validate(), DomainError);
  CHECK_NOTHROW(regime1(0.25, 2.0, 8.0).validate());
  CHECK_THROWS_AS(regime3(1.0).validate(), DomainError);
}

TEST_CASE("theoretical_exponent is decreasing in D and kappa") {
  double prev = INFINITY;
  for (double D = 6.0; D < 20.0; D += 0.5) {
    const double e = theoretical_exponent(regime1(0.25, 2.0, D));
    CHECK(e < prev);
    prev = e;
  }
  prev = INFINITY;
  for (double k = 1.05; k < 4.0; k += 0.1) {
    const double e = theoretical_exponent(regime3(k));
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("power and exponential fits on synthetic laws") {
  const auto p2 = synthetic(1.0, 50.0, 200, [](double t) { return std::pow(1.0 + t, -2.0); });
  const auto f = fit_power_exponent(p2, {1.0, 50.0});
  CHECK(std::abs(f.exponent + 2.0) < 1e-9);
  CHECK(std::abs(f.log_prefactor) < 1e-9);
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.points == 200);

  const auto p3 = synthetic(1.0, 50.0, 200, [](double t) { return 3.0 * std::pow(1.0 + t, -2.0); });
  const auto g = fit_power_exponent(p3, {1.0, 50.0});
  CHECK(std::abs(g.exponent + 2.0) < 1e-9);
  CHECK(std::abs(g.log_prefactor - std::log(3.0)) < 1e-9);

  const auto c = synthetic(0.0, 10.0, 50, [](double) { return 4.0; });
  CHECK(std::abs(fit_power_exponent(c, {0.0, 10.0}).exponent) < 1e-9);
  CHECK(std::abs(fit_exponential_rate(c, {0.0, 10.0}).exponent) < 1e-9);

  const auto e3 = synthetic(0.0, 5.0, 100, [](double t) { return std::exp(-3.0 * t); });
  CHECK(std::abs(fit_exponential_rate(e3, {0.0, 5.0}).exponent + 3.0) < 1e-9);
  const auto e1 = synthetic(0.0, 5.0, 100, [](double t) { return 2.0 * std::exp(-t); });
  const auto h = fit_exponential_rate(e1, {0.0, 5.0});
  CHECK(std::abs(h.exponent + 1.0) < 1e-9);
  CHECK(std::abs(h.log_prefactor - std::log(2.0)) < 1e-9);

  // agrees with the plain covariance slope
  std::vector<double> xs, ys;
  for (const auto& [t, y] : p3) {
    xs.push_back(std::log1p(t));
    ys.push_back(std::log(y));
  }
  CHECK(g.exponent == doctest::Approx(oracle::slope(xs, ys)).epsilon(1e-12));
}

TEST_CASE("fits are equivariant under scaling") {
  const auto s = synthetic(0.0, 30.0, 120, [](double t) { return std::pow(1.0 + t, -1.3) * (1.0 + 0.1 * std::sin(t)); });
  const auto base = fit_power_exponent(s, {2.0, 30.0});
  for (double c : {1e-6, 0.5, 7.0, 1e8}) {
    TimeSeries sc = s;
    for (auto& [t, y] : sc) y *= c;
    const auto f = fit_power_exponent(sc, {2.0, 30.0});
    CHECK(f.exponent == doctest::Approx(base.exponent).epsilon(1e-9));
    CHECK(f.log_prefactor == doctest::Approx(base.log_prefactor + std::log(c)).epsilon(1e-9));
    const auto r = fit_exponential_rate(sc, {2.0, 30.0});
    CHECK(r.exponent == doctest::Approx(fit_exponential_rate(s, {2.0, 30.0}).exponent).epsilon(1e-9));
  }
}

TEST_CASE("fit errors") {
  const auto s = synthetic(0.0, 10.0, 20, [](double t) { return 1.0 + t; });
  CHECK_THROWS_AS(fit_power_exponent(s, {5.0, 5.0}), DomainError);
  CHECK_THROWS_AS(fit_power_exponent(s, {0.0, 2.0}), DomainError);  // 4 points
  TimeSeries z = s;
  z[3].second = 0.0;
  CHECK_THROWS_AS(fit_exponential_rate(z, {0.0, 10.0}), DomainError);
  const auto w = default_fit_window(s);
  CHECK(w.t_max == 10.0);
  CHECK(std::log1p(w.t_min) == doctest::Approx(0.5 * std::log1p(10.0)).epsilon(1e-14));
}

TEST_CASE("envelope_check") {
  const auto env = synthetic(0.0, 20.0, 201, [](double t) { return 5.0 * std::pow(1.0 + t, -2.0); });
  SUBCASE("series equal to its envelope") {
    const auto v = envelope_check(env, -2.0, EnvelopeKind::PowerLaw);
    CHECK(v.violation_count == 0);
    CHECK(v.fitted_constant == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(v.checked_count == 190);
    CHECK(v.passed);
  }
  SUBCASE("faster decay never violates") {
    const auto fast = synthetic(0.0, 20.0, 201, [](double t) { return std::pow(1.0 + t, -4.0); });
    CHECK(envelope_check(fast, -2.0, EnvelopeKind::PowerLaw).violation_count == 0);
    const auto efast = synthetic(0.0, 20.0, 201, [](double t) { return std::exp(-3.0 * t); });
    CHECK(envelope_check(efast, -1.0, EnvelopeKind::Exponential).violation_count == 0);
  }
  SUBCASE("a single 10% bump") {
    TimeSeries bumped = env;
    bumped[100].second *= 1.10;
    const auto v = envelope_check(bumped, -2.0, EnvelopeKind::PowerLaw);
    CHECK(v.violation_count == 1);
    CHECK(v.max_relative_violation == doctest::Approx(0.10).epsilon(1e-9));
    CHECK(v.passed);  // 1 of 190 is under 2%
  }
  SUBCASE("slower decay fails") {
    const auto slow = synthetic(0.0, 20.0, 201, [](double t) { return std::pow(1.0 + t, -1.0); });
    CHECK_FALSE(envelope_check(slow, -2.0, EnvelopeKind::PowerLaw).passed);
  }
  CHECK_THROWS_AS(envelope_check(env, -2.0, EnvelopeKind::Boundedness), DomainError);
  CHECK_THROWS_AS(envelope_check(TimeSeries{{0.0, 1.0}}, -2.0, EnvelopeKind::PowerLaw), DomainError);
}

TEST_CASE("boundedness_check") {
  const auto flat = synthetic(0.0, 50.0, 101, [](double) { return 2.0; });
  const auto v = boundedness_check(flat, 1.0);
  CHECK(v.passed);
  CHECK(v.sup_ratio == 1.0);
  CHECK(boundedness_check(synthetic(0.0, 50.0, 101, [](double t) { return std::exp(-t); }), 1.0).passed);
  CHECK_FALSE(boundedness_check(synthetic(0.0, 50.0, 101, [](double t) { return std::log1p(t); }), 1.0).passed);
  // saturating growth counts as bounded
  CHECK(boundedness_check(synthetic(0.0, 50.0, 101, [](double t) { return 1.0 - std::exp(-t); }), 1.0).passed);
  CHECK_THROWS_AS(boundedness_check(synthetic(0.0, 1.0, 5, [](double) { return 1.0; }), 0.9), DomainError);
}

TEST_CASE("tail_bound_check") {
  SUBCASE("t = 0 bound by direct evaluation") {
    auto spec = regime1(0.25, 2.0, 8.0);
    spec.C1 = 1.5;
    const auto traj = regime_run(spec, InitSpec::polynomial(2, 8.0), 400, TimeGrid{0.0, 0.0, 0.1, 1, 1});
    const auto& e = traj.snapshots.front().ensemble;
    double mp = 0.0;
    std::size_t outside_x = 0, outside_v = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double rx = std::hypot(e.position(i)[0], e.position(i)[1]);
      const double rv = std::hypot(e.velocity(i)[0], e.velocity(i)[1]);
      mp += std::pow(rx, 8.0) + std::pow(rv, 8.0);
      outside_x += rx > 1.5;
      outside_v += rv > 1.5;
    }
    mp /= 400.0;
    CHECK(initial_tail_budget(e, spec) == doctest::Approx(mp).epsilon(1e-12));
    const double bound = std::pow(2.0, 7.0) * mp / std::pow(1.5, 8.0);
    const double tail = static_cast<double>(std::max(outside_x, outside_v)) / 400.0;
    CHECK(*traj.diagnostics[0].tail_mass_position == static_cast<double>(outside_x) / 400.0);
    const auto v = tail_bound_check(traj, spec);
    CHECK(v.passed == (tail <= bound));
    CHECK(v.checked_count == 1);
  }
  SUBCASE("huge radius") {
    auto spec = regime1(0.25, 2.0, 8.0);
    spec.C1 = 1e6;
    const auto traj = regime_run(spec, InitSpec::polynomial(2, 8.0), 100, TimeGrid{0.0, 1.0, 0.1, 2, 1});
    const auto v = tail_bound_check(traj, spec);
    CHECK(v.passed);
    CHECK(v.violation_count == 0);
  }
  SUBCASE("all mass at the origin") {
    auto spec = regime3(1.25);
    IntegrateOptions o;
    o.diagnostics.regime = spec;
    o.diagnostics.exp_rate = 1.0;
    const auto traj = integrate(Ensemble(2, 50), ModelParams(1.25, 1.0), TimeGrid{0.0, 2.0, 0.1, 1, 1}, o);
    for (const auto& r : traj.diagnostics) CHECK(*r.tail_mass_position == 0.0);
    CHECK(tail_bound_check(traj, spec).passed);
  }
  SUBCASE("a forced violation is counted") {
    auto spec = regime1(0.25, 2.0, 8.0);
    spec.C1 = 1.0;
    const auto traj = regime_run(spec, InitSpec::polynomial(2, 8.0), 100, TimeGrid{0.0, 1.0, 0.1, 2, 1});
    CHECK_FALSE(tail_bound_check(traj, spec, 1e-30).passed);
  }
  SUBCASE("regime mismatch") {
    auto spec = regime1(0.25, 2.0, 8.0);
    spec.C1 = 1.0;
    const auto traj = regime_run(spec, InitSpec::polynomial(2, 8.0), 20, TimeGrid{0.0, 0.2, 0.1, 1, 1});
    CHECK_THROWS_AS(tail_bound_check(traj, regime3(1.25)), DomainError);
  }
}

TEST_CASE("dissipation identity residual shrinks with the snapshot spacing") {
  const auto e = sample(InitSpec::polynomial(2, 6.0), 100, 5);
  auto residual = [&](double dt) {
    return dissipation_identity_residual(integrate(e, ModelParams(1.0, 0.5), TimeGrid{0.0, 2.0, dt, 1, 1}));
  };
  const double coarse = residual(0.1), fine = residual(0.05);
  CHECK(fine < coarse);
  CHECK(fine < 1e-2);
  CHECK(coarse / fine > 3.0);
}

TEST_CASE("monotone_check") {
  CHECK(monotone_check("x", {3.0, 2.0, 2.0, 1.0}, 0.0).passed);
  const auto r = monotone_check("x", {3.0, 2.0, 2.2, 1.0}, 0.05);
  CHECK(r.violations == 1);
  CHECK(r.residual == doctest::Approx(0.1));
  CHECK(monotone_check("x", {1.0, 1.0 + 1e-12}, 1e-10).passed);
}

TEST_CASE("gronwall_report") {
  auto spec = regime3(1.25);
  const auto traj = regime_run(spec, InitSpec::compact_velocity(2, 1.0, 1.0), 200, TimeGrid{0.0, 6.0, 0.05, 2, 1});
  const auto ok = gronwall_report(traj, spec);
  CHECK(ok.theoretical_exponent == -2.5);
  CHECK(ok.conservation_passed);
  CHECK(ok.dissipation_passed);
  CHECK(ok.tail_bound.passed);

  Trajectory drift = traj;
  drift.diagnostics.back().momentum[0] += 1e-3;
  const auto bad = gronwall_report(drift, spec);
  CHECK_FALSE(bad.conservation_passed);
  CHECK_FALSE(bad.passed);
  CHECK(bad.momentum_drift == doctest::Approx(1e-3).epsilon(1e-6));

  Trajectory empty = traj;
  empty.diagnostics.clear();
  CHECK_THROWS_AS(gronwall_report(empty, spec), DomainError);
}
