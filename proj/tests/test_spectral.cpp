#include <cmath>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "spectral.hpp"

using namespace pfront;

namespace {

// a = 1 and d_u f = q everywhere: f = q u is not bistable, so build the
// instance by hand.
ProblemInstance linear_instance(double q, double a = 1.0) {
  ProblemInstance inst;
  inst.coeff = constant_coefficient(a);
  inst.reaction.f = [q](double, double u) { return q * u; };
  inst.reaction.dfdu = [q](double, double) { return q; };
  inst.reaction.theta = [](double) { return 0.5; };
  inst.reaction.gamma = -q;
  inst.reaction.lip_K = std::abs(q);
  inst.reaction.x_independent = true;
  inst.period = 1.0;
  return inst;
}

double op_residual(const ProblemInstance& inst, const EigenPair& ep, const StateFn& ubar) {
  // Interior residual of the Dirichlet discretisation on the returned nodes.
  const std::size_t n = ep.x.size();
  const double h = ep.x[1] - ep.x[0];
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double x = ep.x[i];
    const double aw = inst.a_L(x - 0.5 * h), ae = inst.a_L(x + 0.5 * h);
    const double lap = (ae * (ep.psi[i + 1] - ep.psi[i]) - aw * (ep.psi[i] - ep.psi[i - 1])) / (h * h);
    worst = std::max(worst, std::abs(lap + inst.dfdu_L(x, ubar(x)) * ep.psi[i] - ep.lambda * ep.psi[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("Dirichlet eigenvalue of a constant potential") {
  const ProblemInstance inst = linear_instance(-1.0);
  const StateFn zero = [](double) { return 0.0; };
  const double R = kPi / 2;
  const EigenPair ep = dirichlet_principal_eigen(inst, zero, R, 2048);
  CHECK(std::abs(ep.lambda - (-2.0)) < 1e-6);
  const EigenPair wide = dirichlet_principal_eigen(inst, zero, 2 * R, 2048);
  CHECK(wide.lambda > ep.lambda);
  CHECK(wide.lambda < -1.0);

  // Eigenfunction is cos(pi x / 2R), positive inside, sup = 1.
  double l2 = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < ep.x.size(); ++i) {
    const double d = ep.psi[i] - std::cos(kPi * ep.x[i] / (2 * R));
    l2 += d * d * (ep.x[1] - ep.x[0]);
    mx = std::max(mx, ep.psi[i]);
    if (i > 0 && i + 1 < ep.x.size()) CHECK(ep.psi[i] > 0.0);
  }
  CHECK(std::sqrt(l2) < 1e-6);
  CHECK(mx == doctest::Approx(1.0));
  CHECK(op_residual(inst, ep, zero) <= 1e-8);
  CHECK_THROWS_AS(dirichlet_principal_eigen(inst, zero, R, 10), PreconditionError);
}

TEST_CASE("periodic eigenvalue of constant potentials") {
  const ProblemInstance lin = linear_instance(-0.7);
  std::vector<double> u(64, 0.0);
  const EigenPair ep = periodic_principal_eigen(lin, u);
  CHECK(std::abs(ep.lambda - (-0.7)) < 1e-10);
  for (double v : ep.psi) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));

  const ProblemInstance cubic = testing::cubic_instance(0.3);
  std::vector<double> th(64, 0.3), zero(64, 0.0);
  CHECK(periodic_principal_eigen(cubic, th).lambda == doctest::Approx(0.21).epsilon(1e-10));
  CHECK(periodic_principal_eigen(cubic, zero).lambda == doctest::Approx(-0.3).epsilon(1e-10));
  CHECK(classify_lambda(0.21) == StabilityClass::Unstable);
  CHECK(classify_lambda(-0.3) == StabilityClass::Stable);
  CHECK(classify_lambda(1e-8) == StabilityClass::SemistableBoundary);
}

TEST_CASE("comparison bounds and grid convergence for a varying potential") {
  const ProblemInstance inst = testing::cosine_cubic(0.3, 1.0);
  auto state = [](double x) { return 0.3 + 0.2 * std::sin(kTwoPi * x); };
  auto sample = [&](int n) {
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) u[i] = state(double(i) / n);
    return periodic_principal_eigen(inst, u).lambda;
  };
  const double l64 = sample(64), l128 = sample(128), l256 = sample(256);
  double qmin = 1e300, qmax = -1e300;
  for (int i = 0; i < 256; ++i) {
    const double x = i / 256.0;
    qmin = std::min(qmin, inst.dfdu_L(x, state(x)));
    qmax = std::max(qmax, inst.dfdu_L(x, state(x)));
  }
  CHECK(l256 >= qmin);
  CHECK(l256 <= qmax);
  const double ratio = (l64 - l128) / (l128 - l256);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("stability trace increases to the periodic eigenvalue") {
  const ProblemInstance lin = linear_instance(-1.0);
  const StateFn zero = [](double) { return 0.0; };
  const StabilityTrace tr = stability_limit(lin, zero, {1, 2, 4, 8, 16}, 0.01, 64);
  CHECK(tr.monotone);
  for (std::size_t i = 0; i < tr.R.size(); ++i)
    CHECK(tr.lambda[i] == doctest::Approx(-1.0 - std::pow(kPi / (2 * tr.R[i]), 2)).epsilon(1e-4));
  for (std::size_t i = 1; i < tr.R.size(); ++i) CHECK(tr.lambda[i] > tr.lambda[i - 1] - 1e-10);
  CHECK(tr.periodic_lambda == doctest::Approx(-1.0).epsilon(1e-10));

  const StateFn th = [](double) { return 0.3; };
  const StabilityTrace t2 = stability_limit(testing::cubic_instance(0.3), th, {2, 8, 32}, 0.01, 64);
  CHECK(t2.monotone);
  CHECK(t2.lambda.back() < 0.21);
  CHECK(t2.lambda.back() > 0.2);
  CHECK(t2.cls == StabilityClass::Unstable);
}

TEST_CASE("steady states of the homogeneous cubic") {
  const ProblemInstance inst = testing::cubic_instance(0.3);
  const SteadyStateSearch s = find_periodic_steady_states(inst, default_seeds(inst));
  REQUIRE(s.states.size() == 1);
  for (double v : s.states[0].u) CHECK(v == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(s.states[0].cls == StabilityClass::Unstable);
  CHECK(s.states[0].lambda1 == doctest::Approx(0.21).epsilon(1e-8));

  const std::vector<Seed> bad{{"above one", [](double) { return 1.5; }}};
  const SteadyStateSearch r = find_periodic_steady_states(inst, bad);
  CHECK(r.states.empty());
  REQUIRE(r.seeds.size() == 1);
  CHECK(r.seeds[0].rejected);
}

TEST_CASE("oscillating theta at small period has an unstable state near 1/2") {
  auto r = make_cubic([](double y) { return 0.5 + 0.1 * std::cos(kTwoPi * y); }, 0.05, 0.05);
  const ProblemInstance inst = make_instance(constant_coefficient(1.0), r, 0.1);
  const SteadyStateSearch s = find_periodic_steady_states(inst, default_seeds(inst));
  REQUIRE_FALSE(s.states.empty());
  for (const auto& st : s.states) {
    CHECK(st.lambda1 > 0.0);
    CHECK(st.residual < 1e-6);
    for (double v : st.u) CHECK(std::abs(v - 0.5) < 0.1);
  }
}

TEST_CASE("decay roots of T_mu") {
  // Margin potential -gamma, a = d constant, c = 0: mu = sqrt(gamma / d).
  const ProblemInstance inst = linear_instance(-0.3, 2.0);
  const DecayRoot r = decay_root_mu(inst, 0.0, DecayDirection::Right, DecayPotential::Margin);
  CHECK(std::abs(r.mu - std::sqrt(0.3 / 2.0)) < 1e-6);
  CHECK(r.lambda_at_zero == doctest::Approx(-0.3));

  // Homogeneous cubic, linearised potential at 0 is -theta.
  const ProblemInstance cubic = testing::cubic_instance(0.3);
  const double c = 0.28284271247;
  const DecayRoot right = decay_root_mu(cubic, c, DecayDirection::Right, DecayPotential::Linearized);
  const DecayRoot left0 = decay_root_mu(cubic, c, DecayDirection::Left, DecayPotential::Linearized);
  CHECK(right.mu == doctest::Approx((c + std::sqrt(c * c + 1.2)) / 2).epsilon(1e-6));
  CHECK(right.mu == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-6));
  // Left branch linearises at 1, where d_u f = -(1 - theta).
  CHECK(left0.mu == doctest::Approx((-c + std::sqrt(c * c + 2.8)) / 2).epsilon(1e-6));

  // Coercive growth of lambda_1(mu) at large mu: lambda >= alpha mu^2 - beta.
  const DecayRoot het = decay_root_mu(testing::cosine_cubic(0.3, 1.0), 0.37, DecayDirection::Right,
                                      DecayPotential::Margin);
  for (double mu : {5.0, 10.0, 20.0}) {
    const double lam = decay_operator_eigen(testing::cosine_cubic(0.3, 1.0), 0.37, mu, DecayDirection::Right,
                                            DecayPotential::Margin, 512);
    CHECK(lam >= 1.0 * mu * mu - 0.37 * mu - 1.0);
  }
  for (std::size_t i = 1; i < het.lambda_grid.size(); ++i) CHECK(std::isfinite(het.lambda_grid[i]));
}

TEST_CASE("steady-state dump header") {
  const ProblemInstance inst = testing::cubic_instance(0.3);
  const SteadyStateSearch s = find_periodic_steady_states(inst, default_seeds(inst));
  const std::string path = testing::temp_dir("spectral_dump") + "/s.dat";
  write_steady_state(path, s.states.at(0), "config_hash=1");
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("# L=1 lambda1=", 0) == 0);
  CHECK(first.find("class=unstable") != std::string::npos);
}
