#include <cmath>
#include <vector>

#include "common.hpp"
#include "doctest.h"

using namespace pfront;

TEST_CASE("simpson integrates cubics exactly") {
  const double v = simpson([](double x) { return x * x * x - 2 * x + 1; }, 0.0, 2.0, 8);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-14));
  const auto r = simpson_with_error([](double x) { return std::sin(x); }, 0.0, kPi, 256);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.error_estimate < 1e-6);
}

TEST_CASE("tridiagonal solve matches a direct product") {
  const std::size_t n = 7;
  std::vector<double> sub(n, -1.0), diag(n, 3.0), sup(n, -0.5), x(n), b(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(double(i));
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = diag[i] * x[i];
    if (i > 0) b[i] += sub[i] * x[i - 1];
    if (i + 1 < n) b[i] += sup[i] * x[i + 1];
  }
  std::vector<double> d = diag;
  solve_tridiagonal(sub, d, sup, b);
  for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(x[i]).epsilon(1e-13));
}

TEST_CASE("cyclic tridiagonal solve handles the corner couplings") {
  const std::size_t n = 6;
  std::vector<double> sub(n, -1.0), diag(n, 4.0), sup(n, -1.0), x(n), b(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * double(i * i);
  for (std::size_t i = 0; i < n; ++i)
    b[i] = diag[i] * x[i] + sub[i] * x[(i + n - 1) % n] + sup[i] * x[(i + 1) % n];
  solve_cyclic_tridiagonal(sub, diag, sup, b);
  for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(x[i]).epsilon(1e-13));
}

TEST_CASE("line fit, golden section and cubic interpolation") {
  std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.max_abs_residual < 1e-12);

  const GoldenResult g = golden_section([](double t) { return (t - 0.7) * (t - 0.7); }, -2, 3, 1e-10);
  CHECK(g.argmin == doctest::Approx(0.7).epsilon(1e-8));

  std::vector<double> v;
  for (int i = 0; i < 10; ++i) v.push_back(double(i * i * i));
  CHECK(interp_cubic(v, 4.5) == doctest::Approx(4.5 * 4.5 * 4.5).epsilon(1e-12));
  CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
  CHECK(wrap_unit(3.0) == 0.0);
}
