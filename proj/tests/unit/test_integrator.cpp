// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "atomsplit/integrator.hpp"

using namespace atomsplit;

namespace {

constexpr double kTau = std::numbers::pi / (2.0 * std::numbers::sqrt2);

ModelParams model(double chi, InitialStateKind kind = InitialStateKind::fock, std::int64_t n = 200) {
  ModelParams p;
  p.tunnelling = Schedule(1.0);
  p.nonlinearity = Schedule(chi);
  p.n_atoms = n;
  p.initial_state = kind;
  return p;
}

IntegratorConfig config(double dt, double sample, double t_final, Scheme scheme = Scheme::semi_implicit_midpoint) {
  IntegratorConfig c;
  c.dt = dt;
  c.sample_interval = sample;
  c.t_final = t_final;
  c.scheme = scheme;
  return c;
}

double population(const PhasePoint& p, int w) { return (p.alpha_plus[w] * p.alpha[w]).real(); }

cplx total(const PhasePoint& p) {
  cplx s = 0.0;
  for (int w = 0; w < kWells; ++w) s += p.alpha_plus[w] * p.alpha[w];
  return s;
}

}  // namespace

TEST_CASE("one Euler step without nonlinearity", "[integrator][step]") {
  PhasePoint p;
  const double a = std::sqrt(200.0);
  p.alpha = {0.0, a, 0.0};
  p.alpha_plus = {0.0, a, 0.0};
  const IntegratorConfig cfg = config(1e-3, 1e-3, 1e-3, Scheme::euler_maruyama);
  const PhasePoint q = step(p, model(0.0), cfg, NoiseDraws{0.3, -1.2, 2.0, 0.1, -0.7, 1.5});
  CHECK(q.alpha[0] == cplx(0.0, a * 1e-3));
  CHECK(q.alpha[2] == cplx(0.0, a * 1e-3));
  CHECK(q.alpha[1] == cplx(a, 0.0));
  CHECK(q.t == 1e-3);
}

TEST_CASE("zero noise draws give the deterministic scheme", "[integrator][step]") {
  PhasePoint p;
  p.alpha = {cplx(1.0, 0.5), cplx(3.0, -1.0), cplx(0.2, 0.1)};
  p.alpha_plus = {cplx(0.9, -0.4), cplx(3.1, 1.2), cplx(0.3, -0.1)};
  const ModelParams params = model(0.05);
  const double dt = 1e-3;

  SECTION("Euler-Maruyama") {
    const IntegratorConfig cfg = config(dt, dt, dt, Scheme::euler_maruyama);
    const PhasePoint q = step(p, params, cfg, NoiseDraws{});
    const PhaseVector a = drift(p, params, 0.0);
    for (int w = 0; w < kWells; ++w) {
      CHECK(std::abs(q.alpha[w] - (p.alpha[w] + dt * a.alpha[w])) < 1e-15);
      CHECK(std::abs(q.alpha_plus[w] - (p.alpha_plus[w] + dt * a.alpha_plus[w])) < 1e-15);
    }
  }
  SECTION("semi-implicit midpoint solves the implicit midpoint rule to O(dt^4)") {
    const IntegratorConfig cfg = config(dt, dt, dt);
    const PhasePoint q = step(p, params, cfg, NoiseDraws{});
    // Reference: implicit midpoint converged by many fixed-point sweeps.
    PhaseVector mid = p;
    for (int it = 0; it < 50; ++it) {
      const PhaseVector a = drift(mid, params, 0.5 * dt);
      for (int w = 0; w < kWells; ++w) {
        mid.alpha[w] = p.alpha[w] + 0.5 * dt * a.alpha[w];
        mid.alpha_plus[w] = p.alpha_plus[w] + 0.5 * dt * a.alpha_plus[w];
      }
    }
    for (int w = 0; w < kWells; ++w) {
      CHECK(std::abs(q.alpha[w] - (2.0 * mid.alpha[w] - p.alpha[w])) < 1e-11);
      CHECK(std::abs(q.alpha_plus[w] - (2.0 * mid.alpha_plus[w] - p.alpha_plus[w])) < 1e-11);
    }
  }
  SECTION("noise draws are irrelevant when chi = 0") {
    const IntegratorConfig cfg = config(dt, dt, dt);
    CHECK(step(p, model(0.0), cfg, NoiseDraws{}) == step(p, model(0.0), cfg, NoiseDraws{1, 2, 3, 4, 5, 6}));
  }
}

TEST_CASE("noise enters with the start-of-step amplitudes", "[integrator][step]") {
  PhasePoint p;
  p.alpha[0] = 2.0;
  p.alpha_plus[0] = 2.0;
  ModelParams params = model(1e-2);
  params.tunnelling = Schedule(0.0);
  const double dt = 1e-4;
  const IntegratorConfig cfg = config(dt, dt, dt, Scheme::euler_maruyama);
  const NoiseDraws w{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  const PhasePoint q = step(p, params, cfg, w);
  const PhasePoint q0 = step(p, params, cfg, NoiseDraws{});
  // b = (1 - i) sqrt(chi) alpha = 0.2 (1 - i); increment b w sqrt(dt).
  const cplx inc = q.alpha[0] - q0.alpha[0];
  CHECK(inc.real() == Catch::Approx(0.2 * std::sqrt(dt)).epsilon(1e-12));
  CHECK(inc.imag() == Catch::Approx(-0.2 * std::sqrt(dt)).epsilon(1e-12));
  CHECK(q.alpha_plus[0] == q0.alpha_plus[0]);
}

TEST_CASE("linear beamsplitter matches the analytic solution", "[integrator][analytic]") {
  SECTION("full transfer at pi / (2 sqrt 2)") {
    const IntegratorConfig cfg = config(kTau / 1000.0, kTau / 10.0, kTau);
    const TrajectoryRecord rec = integrate_trajectory({1, 0}, model(0.0, InitialStateKind::coherent), cfg);
    REQUIRE(rec.snapshots.size() == 11);
    CHECK(std::abs(rec.snapshots.back().t - kTau) < 1e-15);
    CHECK(population(rec.snapshots.back(), 1) < cfg.dt * cfg.dt * 200.0);
  }
  SECTION("populations over t in [0, 10]") {
    const IntegratorConfig cfg = config(1e-3, 0.01, 10.0);
    const TrajectoryRecord rec = integrate_trajectory({1, 0}, model(0.0, InitialStateKind::coherent), cfg);
    REQUIRE(rec.snapshots.size() == 1001);
    double worst = 0.0;
    for (const auto& p : rec.snapshots) {
      const double c = std::cos(std::numbers::sqrt2 * p.t);
      const double s = std::sin(std::numbers::sqrt2 * p.t);
      worst = std::max(worst, std::abs(population(p, 1) - 200.0 * c * c));
      worst = std::max(worst, std::abs(population(p, 0) - 100.0 * s * s));
      worst = std::max(worst, std::abs(population(p, 2) - 100.0 * s * s));
    }
    CHECK(worst < 1e-5 * 200.0);
  }
}

TEST_CASE("linear dynamics conserve alpha+ alpha per trajectory", "[integrator][property]") {
  const IntegratorConfig cfg = config(1e-3, 0.01, 10.0);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const TrajectoryRecord rec = integrate_trajectory({17, i}, model(0.0), cfg);
    const cplx n0 = total(rec.snapshots.front());
    for (const auto& p : rec.snapshots) REQUIRE(std::abs(total(p) - n0) < 1e-8 * 200.0);
  }
}

TEST_CASE("linear dynamics keep wells 1 and 3 identical", "[integrator][property]") {
  const IntegratorConfig cfg = config(1e-3, 0.05, 5.0);
  const TrajectoryRecord rec = integrate_trajectory({23, 4}, model(0.0), cfg);
  for (const auto& p : rec.snapshots) {
    REQUIRE(p.alpha[0] == p.alpha[2]);
    REQUIRE(p.alpha_plus[0] == p.alpha_plus[2]);
  }
}

TEST_CASE("integration is deterministic in the key", "[integrator][rng]") {
  const IntegratorConfig cfg = config(1e-3, 0.1, 1.0);
  const auto a = integrate_trajectory({5, 9}, model(1e-3), cfg);
  const auto b = integrate_trajectory({5, 9}, model(1e-3), cfg);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) REQUIRE(a.snapshots[i] == b.snapshots[i]);
  const auto c = integrate_trajectory({5, 10}, model(1e-3), cfg);
  CHECK_FALSE(a.snapshots.back() == c.snapshots.back());
}

TEST_CASE("t_final = 0 returns the initial sample", "[integrator]") {
  const IntegratorConfig cfg = config(1e-3, 0.01, 0.0);
  const auto rec = integrate_trajectory({3, 3}, model(1e-3), cfg);
  REQUIRE(rec.snapshots.size() == 1);
  CHECK(rec.snapshots[0] == sample_initial(model(1e-3), SubstreamKey{3, 3}));
  CHECK_FALSE(rec.diverged);
}

TEST_CASE("production parameters do not diverge", "[integrator][divergence]") {
  const IntegratorConfig cfg = config(1e-3, 0.1, 10.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto rec = integrate_trajectory({2024, i}, model(1e-3), cfg);
    REQUIRE_FALSE(rec.diverged);
    REQUIRE(rec.snapshots.size() == 101);
  }
}

TEST_CASE("divergence truncates the record", "[integrator][divergence]") {
  IntegratorConfig cfg = config(1e-2, 0.1, 5.0, Scheme::euler_maruyama);
  cfg.divergence_cap = 30.0;
  ModelParams params = model(0.5, InitialStateKind::fock, 200);
  const auto rec = integrate_trajectory({1, 1}, params, cfg);
  REQUIRE(rec.diverged);
  REQUIRE(rec.divergence_time.has_value());
  CHECK(*rec.divergence_time <= 5.0);
  CHECK(rec.snapshots.size() < 51);
  for (const auto& p : rec.snapshots) CHECK(p.t <= *rec.divergence_time);

  PhasePoint big;
  big.alpha[0] = 31.0;
  CHECK_THROWS_AS(step(big, model(0.0), cfg, NoiseDraws{}), DivergenceError);
}

TEST_CASE("integrator configuration validation", "[integrator][errors]") {
  CHECK_NOTHROW(config(1e-3, 0.01, 10.0).validate());
  CHECK_NOTHROW(config(kTau / 1000.0, kTau / 10.0, kTau).validate());
  CHECK_THROWS_AS(config(0.0, 0.01, 10.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(config(3e-3, 0.01, 10.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(config(1e-3, 0.03, 10.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(config(1e-3, 0.01, -1.0).validate(), std::invalid_argument);
  CHECK(config(1e-3, 0.01, 10.0).steps_per_sample() == 10);
  CHECK(config(1e-3, 0.01, 10.0).sample_count() == 1000);
  CHECK(scheme_from_string("euler_maruyama") == Scheme::euler_maruyama);
  CHECK_THROWS_AS(scheme_from_string("rk4"), std::invalid_argument);
}

TEST_CASE("refinement pair shares the Brownian path", "[integrator][convergence]") {
  const IntegratorConfig cfg = config(2e-3, 0.1, 2.0);
  const auto [coarse, fine] = integrate_refinement_pair({77, 1}, model(1e-3), cfg);
  REQUIRE(coarse.snapshots.size() == fine.snapshots.size());
  CHECK(coarse.snapshots.front() == fine.snapshots.front());
  // Strong error is small compared with the O(sqrt N) per-trajectory spread.
  for (std::size_t i = 0; i < coarse.snapshots.size(); ++i) {
    for (int w = 0; w < kWells; ++w) {
      REQUIRE(std::abs(population(coarse.snapshots[i], w) - population(fine.snapshots[i], w)) < 0.5);
    }
  }
  // Without noise the fine path is the deterministic half-step solution.
  const auto [c0, f0] = integrate_refinement_pair({77, 1}, model(0.0), cfg);
  IntegratorConfig half = cfg;
  half.dt = cfg.dt / 2;
  const auto direct = integrate_trajectory({77, 1}, model(0.0), half);
  for (std::size_t i = 0; i < f0.snapshots.size(); ++i) {
    for (int w = 0; w < kWells; ++w) {
      REQUIRE(std::abs(f0.snapshots[i].alpha[w] - direct.snapshots[i].alpha[w]) < 1e-12);
    }
  }
}
