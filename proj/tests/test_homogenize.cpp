#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "homogenize.hpp"

using namespace pfront;

namespace {

FrontSolution lattice_from(const HomogenizedFront& h, double offset, int ny) {
  FrontSolution f;
  f.ny = ny;
  f.h = 0.05;
  for (int j = -300; j <= 300; ++j) {
    const double xi = j * f.h;
    f.xi.push_back(xi);
    for (int k = 0; k < ny; ++k) f.phi.push_back(h.phi0(xi - offset));
  }
  return f;
}

}  // namespace

TEST_CASE("shooting reproduces the closed-form speeds") {
  const HomogenizedData flat = homogenized_data(testing::cubic_instance(0.3));
  const HomogenizedFront f = solve_homogenized_front(flat);
  CHECK(std::abs(f.c0 - 0.4 / std::sqrt(2.0)) < 1e-8);
  CHECK(f.phi0(0.0) == doctest::Approx(0.5).epsilon(1e-6));
  for (std::size_t i = 1; i < f.phi.size(); ++i) CHECK(f.phi[i] < f.phi[i - 1]);

  const HomogenizedData het = homogenized_data(testing::cosine_cubic(0.3, 1.0));
  const HomogenizedFront g = solve_homogenized_front(het);
  CHECK(std::abs(g.c0 - std::sqrt(2.0 * std::sqrt(3.0)) * 0.2) < 1e-8);

  const HomogenizedFront z = solve_homogenized_front(homogenized_data(testing::cubic_instance(0.5)));
  CHECK(z.symmetric);
  CHECK(z.c0 == 0.0);
}

TEST_CASE("shooting is deterministic") {
  const HomogenizedData het = homogenized_data(testing::cosine_cubic(0.3, 1.0));
  CHECK(solve_homogenized_front(het).c0 == solve_homogenized_front(het).c0);
}

TEST_CASE("speed sign and monotone dependence on theta") {
  double prev = 1e300;
  for (double th : {0.2, 0.3, 0.4, 0.6, 0.7}) {
    const HomogenizedData d = homogenized_data(testing::cubic_instance(th));
    const double c = solve_homogenized_front(d).c0;
    CHECK(c < prev);
    CHECK((c > 0) == (d.I_fbar > 0));
    prev = c;
  }
}

TEST_CASE("decay exponents") {
  CHECK(decay_root_right(1.0, 0.0, -0.3) == doctest::Approx(std::sqrt(0.3)).epsilon(1e-14));
  CHECK(decay_root_right(1.0, 0.28284271247, -0.3) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(decay_root_left(1.0, 0.28284271247, -0.7) ==
        doctest::Approx((-0.28284271247 + std::sqrt(0.08 + 2.8)) / 2).epsilon(1e-9));

  const HomogenizedData d = homogenized_data(testing::cosine_cubic(0.3, 1.0));
  const HomogenizedFront f = solve_homogenized_front(d);
  const DecayExponents e = homogenized_decay_rates(f, d);
  CHECK(e.gap1 < 0.02);
  CHECK(e.gap2 < 0.02);
}

TEST_CASE("profile alignment") {
  const HomogenizedFront f = solve_homogenized_front(homogenized_data(testing::cubic_instance(0.3)));
  const Alignment same = align_profiles(lattice_from(f, 0.0, 3), f);
  CHECK(std::abs(same.shift) < 1e-6);
  CHECK(same.gap < 1e-6);
  const Alignment moved = align_profiles(lattice_from(f, 1.0, 3), f);
  CHECK(std::abs(moved.shift - 1.0) < 0.05);
  CHECK(moved.gap < 1e-6);
}

TEST_CASE("sweep refuses a zero homogenized speed") {
  CHECK_THROWS_AS(homogenization_sweep(testing::cubic_instance(0.5), {0.4, 0.2}, FrontConfig{}),
                  PreconditionError);
  CHECK_THROWS_AS(homogenization_sweep(testing::cubic_instance(0.3), {0.2, 0.4}, FrontConfig{}),
                  PreconditionError);
}

TEST_CASE("homogeneous sweep sits at the solver noise") {
  const HomogenizationSweep s = homogenization_sweep(testing::cubic_instance(0.3), {0.5, 0.25}, FrontConfig{}, 2);
  REQUIRE(s.records.size() == 2);
  for (const auto& r : s.records) {
    CHECK(r.status == FrontStatus::Propagating);
    CHECK(r.c_gap_rel < 5e-3);  // first-order time stepping bias at dt = 0.02
    CHECK(r.profile_gap_L2 < 1e-2);
  }
  // The gap is the O(dt) bias of the scheme: it shrinks with dt.
  FrontConfig fine;
  fine.dt = 0.005;
  const HomogenizationSweep t = homogenization_sweep(testing::cubic_instance(0.3), {0.5}, fine);
  CHECK(t.records[0].c_gap_rel < s.records[0].c_gap_rel / 3.0);
  const std::string csv = homogenization_csv(s.records);
  CHECK(csv.rfind("L,c_L,c0,c_gap_rel,profile_gap_L2,shift", 0) == 0);
}
