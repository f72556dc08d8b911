#include <cmath>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "model.hpp"

using namespace pfront;

namespace {

ReactionProfile cubic(double theta, double gamma = 0.05, double delta = 0.05) {
  return make_cubic([theta](double) { return theta; }, gamma, delta, 0.0, 1.0, true);
}

}  // namespace

TEST_CASE("validate_hypotheses accepts the admissible cubic") {
  const ValidationReport rep = validate_hypotheses(cubic(0.3), 64);
  CHECK(rep.pass());
  CHECK(rep.checked_points >= 64 * 64);
}

TEST_CASE("validate_hypotheses flags delta above theta") {
  ReactionProfile r = cubic(0.3);
  r.delta = 0.4;
  const ValidationReport rep = validate_hypotheses(r, 64);
  REQUIRE_FALSE(rep.pass());
  bool inside = false;
  for (const auto& v : rep.violations) inside |= v.u > 0.3 && v.u < 0.4;
  CHECK(inside);
}

TEST_CASE("validate_hypotheses rejects f identically zero") {
  ReactionProfile r = cubic(0.3);
  r.f = [](double, double) { return 0.0; };
  r.dfdu = [](double, double) { return 0.0; };
  CHECK_FALSE(validate_hypotheses(r, 32).pass());
}

TEST_CASE("validate_hypotheses rejects non-finite samplers") {
  ReactionProfile r = cubic(0.3);
  r.f = [](double, double u) { return u > 0.5 ? std::nan("") : 0.0; };
  CHECK_THROWS_AS(validate_hypotheses(r, 32), PreconditionError);
}

TEST_CASE("extension is linear outside [0,1]") {
  const ReactionProfile r = extend_reaction(cubic(0.3));
  CHECK(r.f(0.2, -0.1) == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(r.f(0.7, 0.0) == 0.0);
  CHECK(r.f(0.4, 1.1) == doctest::Approx(-0.07).epsilon(1e-12));
  // Lipschitz with constant <= lip_K at sampled pairs.
  double worst = 0.0;
  for (double u = -0.5; u < 1.5; u += 0.01) {
    const double q = std::abs(r.f(0.0, u + 0.01) - r.f(0.0, u)) / 0.01;
    worst = std::max(worst, q);
  }
  CHECK(worst <= r.lip_K);
}

TEST_CASE("harmonic mean closed forms") {
  CHECK(harmonic_mean(constant_coefficient(2.5)).value == doctest::Approx(2.5).epsilon(1e-12));
  const HarmonicMean h = harmonic_mean(cosine_coefficient(2.0, 1.0));
  CHECK(h.value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK(h.rel_error < 1e-8);
  CHECK(harmonic_mean(reciprocal_cosine_coefficient(2.0, 1.0)).value == doctest::Approx(0.5).epsilon(1e-12));
  // AM-HM, strict for non-constant a.
  const auto a = cosine_coefficient(2.0, 1.0);
  CHECK(harmonic_mean(a).value < arithmetic_mean(a));
}

TEST_CASE("averaged reaction and its integral") {
  CHECK(std::abs(fbar_and_integral(cubic(0.5)).integral) < 1e-14);
  CHECK(fbar_and_integral(cubic(0.3)).integral == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
  const auto r = make_cubic([](double y) { return 0.5 + 0.2 * std::cos(kTwoPi * y); }, 0.05, 0.05);
  const AveragedReaction av = fbar_and_integral(r);
  CHECK(std::abs(av.integral) < 1e-12);
  for (double u : {0.1, 0.35, 0.8})
    CHECK(av.fbar(u) == doctest::Approx(u * (1 - u) * (u - 0.5)).epsilon(1e-10));
}

TEST_CASE("corrector cell problem") {
  const Corrector flat = corrector_chi(constant_coefficient(3.0), 3.0);
  CHECK(std::abs(flat.chi(0.37)) < 1e-14);

  const auto a = cosine_coefficient(2.0, 1.0);
  const double aH = harmonic_mean(a).value;
  const Corrector c = corrector_chi(a, aH);
  CHECK(c.chi_prime(0.0) == doctest::Approx(std::sqrt(3.0) / 3.0 - 1.0).epsilon(1e-9));
  CHECK(c.periodicity_defect < 1e-9);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double y = i / 100.0;
    worst = std::max(worst, std::abs(a(y) * (c.chi_prime(y) + 1.0) - aH));
  }
  CHECK(worst < 1e-9);
  CHECK(std::abs(c.chi(1.0) - c.chi(0.0)) < 1e-9);
}

TEST_CASE("cubic family values") {
  const ReactionProfile r = cubic(0.3);
  for (double y : {0.0, 0.3, 0.9}) {
    CHECK(r.f(y, 0.3) == 0.0);
    CHECK(r.dfdu(y, 0.3) == doctest::Approx(0.21).epsilon(1e-14));
  }
  const auto osc = make_cubic([](double y) { return 0.5 + 0.2 * std::cos(kTwoPi * y); }, 0.05, 0.05);
  CHECK(osc.theta(0.25) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(make_cubic([](double) { return 0.3; }, 0.05, 0.4), PreconditionError);

  const CubicMargins m = cubic_margins(0.3, 0.3);
  CHECK(m.delta == doctest::Approx(0.075));
  CHECK(validate_hypotheses(make_cubic([](double) { return 0.3; }, m.gamma, m.delta), 64).pass());
}

TEST_CASE("Xin example") {
  const ProblemInstance flat = make_xin_example(0.1, 0.0, 1.0);
  CHECK(flat.coeff.constant);
  CHECK(flat.reaction.theta(0.2) == doctest::Approx(0.4));
  const ProblemInstance x = make_xin_example(0.2, 2.0, 0.3);
  CHECK(x.coeff(0.25) == doctest::Approx(1.4).epsilon(1e-14));
  CHECK(x.reaction.f(0.1, 0.6) == doctest::Approx(0.09 * 0.6 * 0.4 * (0.6 - 0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(make_xin_example(0.2, 5.0, 0.3), PreconditionError);
}

TEST_CASE("scaled samplers are L-periodic") {
  const auto r = make_cubic([](double y) { return 0.4 + 0.1 * std::sin(kTwoPi * y); }, 0.05, 0.05);
  const ProblemInstance inst = make_instance(cosine_coefficient(2.0, 1.0), r, 0.7);
  for (double x : {-3.1, 0.0, 0.25, 5.3}) {
    CHECK(std::abs(inst.a_L(x + 0.7) - inst.a_L(x)) < 1e-12);
    CHECK(std::abs(inst.f_L(x + 0.7, 0.45) - inst.f_L(x, 0.45)) < 1e-12);
  }
  CHECK(inst.coeff.a_min > 0.0);
}

TEST_CASE("homogenized data") {
  const ProblemInstance inst = testing::cosine_cubic(0.3, 1.0);
  const HomogenizedData h = homogenized_data(inst);
  CHECK(h.a_H == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK(std::abs(h.fbar(0.0)) < 1e-14);
  CHECK(std::abs(h.fbar(1.0)) < 1e-14);
  CHECK(h.fbar_prime(0.0) < 0.0);
  CHECK(h.fbar_prime(1.0) < 0.0);
  REQUIRE(h.theta_bar.size() == 1);
  CHECK(h.theta_bar[0] == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("tabulated profiles") {
  const std::string dir = testing::temp_dir("model_tab");
  const std::string path = dir + "/a.txt";
  {
    std::ofstream out(path);
    out << "# period=1\n";
    for (int i = 0; i < 64; ++i) out << i / 64.0 << ' ' << 2.0 + std::cos(kTwoPi * i / 64.0) << '\n';
  }
  const auto samples = read_tabulated(path);
  REQUIRE(samples.size() == 64);
  const CoefficientProfile c = tabulated_coefficient(samples);
  CHECK(c(0.3) == doctest::Approx(2.0 + std::cos(kTwoPi * 0.3)).epsilon(1e-5));
  CHECK(harmonic_mean(c).value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-5));
  {
    std::ofstream out(dir + "/bad.txt");
    out << "0 1\n0.5 1\n";
  }
  CHECK_THROWS_AS(read_tabulated(dir + "/bad.txt"), ConfigError);
}
