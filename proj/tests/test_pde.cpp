#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pde.hpp"

using namespace pfront;

namespace {

ProblemInstance pure_diffusion() {
  ProblemInstance inst;
  inst.coeff = constant_coefficient(1.0);
  inst.reaction.f = [](double, double) { return 0.0; };
  inst.reaction.dfdu = [](double, double) { return 0.0; };
  inst.reaction.theta = [](double) { return 0.5; };
  inst.reaction.lip_K = 0.0;
  inst.period = 1.0;
  return inst;
}

double stationary_residual_at(int npp) {
  const ProblemInstance inst = testing::cubic_instance(0.5);
  const Grid1D g = make_grid(inst, -10.0, 10.0, npp);
  Field f;
  f.u.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) f.u[i] = testing::exact_front(g.x(i));
  return residual_stationary(f, g, inst);
}

}  // namespace

TEST_CASE("grid invariants") {
  const ProblemInstance inst = testing::cubic_instance(0.3, 1.0, 0.5);
  const Grid1D g = make_grid(inst, -2.2, 3.1, 16);
  CHECK(g.h == doctest::Approx(0.5 / 16));
  CHECK(g.n >= 3);
  const double span = g.x_max() - g.x_min();
  CHECK(std::abs(span / 0.5 - std::round(span / 0.5)) < 1e-9);
  CHECK(g.x_min() <= -2.2);
  CHECK(g.x_max() >= 3.1);
}

TEST_CASE("constants 0 and 1 are fixed points") {
  const ProblemInstance inst = testing::cosine_cubic(0.3, 1.0);
  const Grid1D g = make_grid(inst, -5, 5, 32);
  for (double c : {0.0, 1.0}) {
    SolverConfig cfg;
    cfg.u_left = cfg.u_right = c;
    for (Scheme s : {Scheme::Imex, Scheme::CrankNicolson}) {
      cfg.scheme = s;
      Field f;
      f.u.assign(g.n, c);
      f = evolve(f, g, inst, cfg, 5.0);
      double worst = 0.0;
      for (double v : f.u) worst = std::max(worst, std::abs(v - c));
      CHECK(worst < 1e-12);  // round-off over 250 steps
    }
  }
}

TEST_CASE("pure diffusion conserves discrete mass") {
  const ProblemInstance inst = pure_diffusion();
  const Grid1D g = make_grid(inst, -20, 20, 50);
  SolverConfig cfg;
  cfg.u_left = cfg.u_right = 0.0;
  Field f;
  f.u.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) f.u[i] = std::exp(-g.x(i) * g.x(i));
  auto mass = [&](const Field& fl) {
    double m = 0;
    for (double v : fl.u) m += v * g.h;
    return m;
  };
  const double m0 = mass(f);
  f = evolve(f, g, inst, cfg, 100 * cfg.dt);
  CHECK(std::abs(mass(f) - m0) < 1e-10);
}

TEST_CASE("evolve is deterministic and splits bitwise") {
  const ProblemInstance inst = testing::cosine_cubic(0.3, 1.0);
  const Grid1D g = make_grid(inst, -10, 10, 32);
  SolverConfig cfg;
  const Field f0 = front_initial_datum(g, DatumStyle::Tanh, 0.0, 1.0);
  const Field once = evolve(f0, g, inst, cfg, 4.0);
  const Field twice = evolve(evolve(f0, g, inst, cfg, 1.5), g, inst, cfg, 4.0);
  CHECK(once.u == twice.u);
  CHECK(once.t == doctest::Approx(twice.t));
}

TEST_CASE("front datum stays in [0,1] and steady states stay steady") {
  const ProblemInstance inst = testing::cubic_instance(0.3);
  const Grid1D g = make_grid(inst, -15, 15, 32);
  SolverConfig cfg;
  bool inside = true;
  evolve(front_initial_datum(g, DatumStyle::Step, 0.0), g, inst, cfg, 10.0, [&](const Field& f, long long) {
    for (double v : f.u) inside &= v >= -1e-14 && v <= 1 + 1e-14;
    return true;
  });
  CHECK(inside);

  // u = theta is a steady state of the x-independent cubic.
  Field th;
  th.u.assign(g.n, 0.3);
  CHECK(residual_stationary(th, g, inst) < 1e-15);
  cfg.u_left = cfg.u_right = 0.3;
  CHECK(residual_stationary(evolve(th, g, inst, cfg, 3.0), g, inst) < 1e-12);
  Field zero;
  zero.u.assign(g.n, 0.0);
  CHECK(residual_stationary(zero, g, inst) == 0.0);
}

TEST_CASE("stationary residual of the exact symmetric front is second order") {
  const double r1 = stationary_residual_at(100);  // h = 0.01
  const double r2 = stationary_residual_at(200);
  CHECK(r1 < 1e-3);
  const double ratio = r1 / r2;
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("initial data") {
  const ProblemInstance inst = testing::cubic_instance(0.3);
  const Grid1D g = make_grid(inst, -5, 5, 20);
  for (DatumStyle s : {DatumStyle::Step, DatumStyle::Ramp, DatumStyle::Tanh}) {
    const Field f = front_initial_datum(g, s, 0.3, 1.0);
    CHECK(f.u.front() == 1.0);
    CHECK(f.u.back() == 0.0);
    for (std::size_t i = 0; i + 1 < g.n; ++i) CHECK(f.u[i + 1] <= f.u[i]);
  }
  const Field t = front_initial_datum(g, DatumStyle::Tanh, 0.0, 2.0);
  CHECK(level_position(g, t.u, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(front_initial_datum(g, DatumStyle::Step, 10.0), PreconditionError);
  CHECK_THROWS_AS(parse_datum_style("zigzag"), ConfigError);
}

TEST_CASE("discrete comparison principle on random ordered pairs") {
  const ProblemInstance inst = testing::cosine_cubic(0.3, 1.0);
  const Grid1D g = make_grid(inst, -8, 8, 32);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  SolverConfig cfg;
  double worst = 0.0;
  for (int pair = 0; pair < 10; ++pair) {
    Field a, b;
    a.u.resize(g.n);
    b.u.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      a.u[i] = U(rng);
      b.u[i] = std::min(1.0, a.u[i] + 0.3 * U(rng));
    }
    a.u.front() = b.u.front() = 1.0;
    a.u.back() = b.u.back() = 0.0;
    Stepper sa(g, inst, cfg), sb(g, inst, cfg);
    for (int k = 0; k < 200; ++k) {
      sa.step(a);
      sb.step(b);
      for (std::size_t i = 0; i < g.n; ++i) worst = std::min(worst, b.u[i] - a.u[i]);
    }
  }
  CHECK(worst >= -1e-10);
}

TEST_CASE("reaction time step restriction and non-finite abort") {
  const ProblemInstance inst = testing::cubic_instance(0.3);
  const Grid1D g = make_grid(inst, -2, 2, 8);
  SolverConfig cfg;
  cfg.dt = 1.0;
  CHECK_THROWS_AS(Stepper(g, inst, cfg), PreconditionError);
  cfg.dt = 0.01;
  Stepper s(g, inst, cfg);
  Field f;
  f.u.assign(g.n, 0.5);
  f.u[3] = std::nan("");
  CHECK_THROWS_AS(s.step(f), NumericalError);
}

TEST_CASE("snapshot round trip") {
  const ProblemInstance inst = testing::cubic_instance(0.3, 1.0, 2.0);
  const Grid1D g = make_grid(inst, -4, 4, 8);
  Field f = front_initial_datum(g, DatumStyle::Tanh, 0.0, 1.0);
  f.t = 1.25;
  const std::string path = testing::temp_dir("pde_snap") + "/s.dat";
  write_snapshot(path, g, f, "config_hash=abc");
  const Snapshot s = read_snapshot(path);
  CHECK(s.t == doctest::Approx(1.25));
  CHECK(s.period == doctest::Approx(2.0));
  REQUIRE(s.u.size() == g.n);
  for (std::size_t i = 0; i < g.n; ++i) CHECK(s.u[i] == doctest::Approx(f.u[i]).epsilon(1e-12));
}
