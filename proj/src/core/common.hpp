#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfront {

// Error hierarchy. The C API maps each class onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Reduce y to [0,1).
inline double wrap_unit(double y) {
  double r = y - std::floor(y);
  return r >= 1.0 ? 0.0 : r;
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // Richardson estimate |S_n - S_{n/2}| / 15
};

// Composite Simpson on [lo, hi] with n (rounded up to even) panels.
double simpson(const std::function<double(double)>& g, double lo, double hi, int n);

// Simpson with the Richardson error estimate from the half-resolution rule.
QuadratureResult simpson_with_error(const std::function<double(double)>& g, double lo,
                                    double hi, int n);

// Trapezoid rule on equally spaced samples.
double trapezoid(std::span<const double> values, double step);

// Thomas algorithm. sub[0] and sup[n-1] are ignored. rhs is overwritten with
// the solution; diag is used as scratch.
void solve_tridiagonal(std::span<const double> sub, std::span<double> diag,
                       std::span<const double> sup, std::span<double> rhs);

// Cyclic tridiagonal system: sub[0] couples row 0 to column n-1, sup[n-1]
// couples row n-1 to column 0. Sherman-Morrison on top of the Thomas solve.
void solve_cyclic_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> sup, std::span<double> rhs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double max_abs_residual = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Golden-section minimisation of a unimodal function on [lo, hi].
struct GoldenResult {
  double argmin = 0.0;
  double value = 0.0;
};
GoldenResult golden_section(const std::function<double(double)>& g, double lo, double hi,
                            double tol, int max_iter = 200);

// 4-point Lagrange interpolation of equally spaced data at fractional index s.
// Falls back to linear weights at the ends of the array.
double interp_cubic(std::span<const double> v, double s);

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace pfront
