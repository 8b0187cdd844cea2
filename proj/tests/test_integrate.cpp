#include <doctest.h>

#include <cmath>

#include "cskin/analysis.hpp"
#include "cskin/integrate.hpp"
#include "cskin/sampler.hpp"
#include "oracles.hpp"

using namespace cskin;

namespace {

IntegrateOptions no_diagnostics() {
  IntegrateOptions o;
  o.record_diagnostics = false;
  return o;
}

}  // namespace

TEST_CASE("TimeGrid bookkeeping") {
  TimeGrid g{0.0, 1.0, 0.1, 1, 1};
  CHECK(g.steps() == 10);
  CHECK(g.time_at(10) == 1.0);
  CHECK(g.time_at(3) == 0.1 * 3);
  TimeGrid ragged{0.0, 1.05, 0.1, 1, 1};
  CHECK(ragged.steps() == 11);
  CHECK(ragged.time_at(11) == 1.05);
  CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 0.0, 1, 1}.validate()), DomainError);
  CHECK_THROWS_AS((TimeGrid{1.0, 0.0, 0.1, 1, 1}.validate()), DomainError);
  CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 2.0, 1, 1}.validate()), DomainError);
  CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 0.1, 0, 1}.validate()), DomainError);
  CHECK(default_time_step(1.0) == 1e-2);
  CHECK(default_time_step(4.0) == 1e-2 / 4.0);
  CHECK(default_time_step(0.5) == 1e-2);
}

TEST_CASE("step_rk4 keeps a resting ensemble fixed") {
  Ensemble e(2, oracle::uniform_cloud(20, 2, 1), std::vector<double>(40, 0.0));
  CHECK(step_rk4(e, ModelParams(3.0, 0.5), 0.1) == e);
  CHECK_THROWS_AS(step_rk4(e, ModelParams(), 0.0), DomainError);
}

TEST_CASE("two-particle closed form") {
  const Ensemble e(1, {0.0, 0.0}, {1.0, -1.0});
  const auto traj = integrate(e, ModelParams(1.0, 0.0), TimeGrid{0.0, 1.0, 1e-3, 1000, 1});
  const Ensemble& end = *traj.final_state;
  const double gap = end.velocity(0)[0] - end.velocity(1)[0];
  CHECK(std::abs(gap - oracle::two_particle_gap(2.0, 1.0, 1.0)) < 1e-10);
}

TEST_CASE("RK4 global error falls about 16x per halving") {
  const auto e = sample(InitSpec::polynomial(2, 6.0), 24, 3);
  const ModelParams p(1.0, 0.5);
  auto run = [&](double dt) { return *integrate(e, p, TimeGrid{0.0, 2.0, dt, 1, 1}, no_diagnostics()).final_state; };
  const auto ref = run(0.1 / 32.0);
  auto err = [&](const Ensemble& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.positions().size(); ++i) {
      m = std::max(m, std::abs(a.positions()[i] - ref.positions()[i]));
      m = std::max(m, std::abs(a.velocities()[i] - ref.velocities()[i]));
    }
    return m;
  };
  const double ratio = err(run(0.1)) / err(run(0.05));
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("integrate snapshots") {
  const auto e = sample(InitSpec::exponential(2, 1.0), 64, 4);
  const ModelParams p(1.0, 0.25);
  SUBCASE("t_end = t0 gives the input back") {
    const auto traj = integrate(e, p, TimeGrid{2.0, 2.0, 0.1, 1, 1});
    REQUIRE(traj.snapshots.size() == 1);
    CHECK(traj.snapshots[0].ensemble == e);
    CHECK(traj.snapshots[0].t == 2.0);
    CHECK(traj.diagnostics.size() == 1);
  }
  SUBCASE("count is floor(steps / stride) + 1") {
    for (std::size_t stride : {1u, 3u, 7u, 20u}) {
      const TimeGrid g{0.0, 1.0, 0.05, stride, 1};
      const auto traj = integrate(e, p, g);
      CHECK(traj.snapshots.size() == 20 / stride + 1);
      CHECK(traj.diagnostics.size() == traj.snapshots.size());
      CHECK(traj.snapshots.front().ensemble == e);
      for (std::size_t k = 1; k < traj.snapshots.size(); ++k) CHECK(traj.snapshots[k].t > traj.snapshots[k - 1].t);
    }
  }
}

TEST_CASE("momentum and center of mass over a long run") {
  const auto e = sample(InitSpec::polynomial(2, 6.0, 1.0, false), 1024, 12);
  const auto traj = integrate(e, ModelParams(1.0, 0.5), TimeGrid{0.0, 10.0, 0.01, 50, 1});
  const auto& m0 = traj.diagnostics.front().momentum;
  for (const auto& rec : traj.diagnostics) {
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(rec.momentum[k] - m0[k]) <= 1e-11);
  }
  CHECK(center_of_mass_error(traj) <= 1e-9);
}

TEST_CASE("monotone energy, D-moment and max speed") {
  for (double beta : {0.0, 0.5, 1.0}) {
    const auto e = sample(InitSpec::polynomial(2, 6.0), 200, 30);
    IntegrateOptions o;
    o.diagnostics.moment_order = 6.0;
    const auto traj = integrate(e, ModelParams(2.0, beta), TimeGrid{0.0, 3.0, 0.005, 5, 1}, o);
    for (const auto& c : invariant_suite(traj, std::nullopt)) CHECK_MESSAGE(c.passed, c.name);
  }
}

TEST_CASE("overflow guard names the step") {
  // x grows by 4e99 per unit step and first exceeds 1e100 at step 3
  Ensemble e(1, {0.0, 1.0}, {4e99, 4e99});
  try {
    integrate(e, ModelParams(0.0, 0.0), TimeGrid{0.0, 100.0, 1.0, 1, 1});
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& err) {
    CHECK(err.step() == 3);
    CHECK(err.time() == 3.0);
  }
}

TEST_CASE("paired_integrate") {
  const auto e = sample(InitSpec::polynomial(2, 5.0), 40, 2);
  const ModelParams p(1.0, 0.5);
  const TimeGrid g{0.0, 1.0, 0.1, 2, 1};
  CHECK_THROWS_AS(paired_integrate(e, p, g, 1), DomainError);
  const auto [a, b] = paired_integrate(e, p, g, 3);
  CHECK(a.init_digest == b.init_digest);
  CHECK(a.init_digest == content_digest(e));
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(a.snapshots[k].t == b.snapshots[k].t);
    CHECK(a.snapshots[k].step == b.snapshots[k].step);
    // integer step bookkeeping: snapshot k sits at coarse step 2k
    CHECK(a.snapshots[k].t == (k == a.snapshots.size() - 1 ? 1.0 : 0.1 * static_cast<double>(2 * k)));
  }
  CHECK(b.grid.substeps == 3);
}

TEST_CASE("content digest sees every bit") {
  Ensemble a(2, 3);
  Ensemble b = a;
  CHECK(content_digest(a) == content_digest(b));
  b.velocities()[5] = 0x1.0p-1074;
  CHECK(content_digest(a) != content_digest(b));
  CHECK(content_digest(Ensemble(1, 6)) != content_digest(Ensemble(2, 3)));
}

TEST_CASE("reference and parallel kernels give matching trajectories") {
  const auto e = sample(InitSpec::polynomial(2, 6.0), 300, 77);
  const ModelParams p(1.0, 0.25);
  IntegrateOptions ref = no_diagnostics();
  ref.kernel = KernelMode::Reference;
  const auto a = *integrate(e, p, TimeGrid{0.0, 1.0, 0.01, 100, 1}, ref).final_state;
  const auto b = *integrate(e, p, TimeGrid{0.0, 1.0, 0.01, 100, 1}, no_diagnostics()).final_state;
  for (std::size_t i = 0; i < a.velocities().size(); ++i) {
    CHECK(std::abs(a.velocities()[i] - b.velocities()[i]) < 1e-12);
    CHECK(std::abs(a.positions()[i] - b.positions()[i]) < 1e-12);
  }
}
