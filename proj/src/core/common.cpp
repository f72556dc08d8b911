#include "common.hpp"

#include <algorithm>

namespace pfront {

double simpson(const std::function<double(double)>& g, double lo, double hi, int n) {
  if (n < 2) n = 2;
  if (n % 2) ++n;
  const double h = (hi - lo) / n;
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < n; ++i) {
    const double v = g(lo + i * h);
    (i % 2 ? odd : even) += v;
  }
  return h / 3.0 * (g(lo) + g(hi) + 4.0 * odd + 2.0 * even);
}

QuadratureResult simpson_with_error(const std::function<double(double)>& g, double lo,
                                    double hi, int n) {
  if (n < 4) n = 4;
  n += n % 4 ? 4 - n % 4 : 0;
  const double fine = simpson(g, lo, hi, n);
  const double coarse = simpson(g, lo, hi, n / 2);
  return {fine, std::abs(fine - coarse) / 15.0};
}

double trapezoid(std::span<const double> values, double step) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * step;
}

void solve_tridiagonal(std::span<const double> sub, std::span<double> diag,
                       std::span<const double> sup, std::span<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

void solve_cyclic_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> sup, std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (n < 3) throw NumericalError("cyclic tridiagonal system needs at least 3 unknowns");
  const double alpha = sup[n - 1];  // row n-1, column 0
  const double beta = sub[0];       // row 0, column n-1
  const double g = -diag[0];
  std::vector<double> d(diag.begin(), diag.end());
  d[0] -= g;
  d[n - 1] -= alpha * beta / g;
  std::vector<double> d2 = d;
  std::vector<double> u(n, 0.0);
  u[0] = g;
  u[n - 1] = alpha;
  solve_tridiagonal(sub, d, sup, rhs);
  solve_tridiagonal(sub, d2, sup, u);
  // v = (1, 0, ..., 0, beta/g)
  const double vx = rhs[0] + beta / g * rhs[n - 1];
  const double vz = u[0] + beta / g * u[n - 1];
  const double factor = vx / (1.0 + vz);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= factor * u[i];
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  LineFit out;
  if (n < 2) return out;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (out.intercept + out.slope * x[i]);
    ssr += r * r;
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r));
  }
  if (n > 2) out.slope_stderr = std::sqrt(ssr / double(n - 2) / sxx);
  return out;
}

GoldenResult golden_section(const std::function<double(double)>& g, double lo, double hi,
                            double tol, int max_iter) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = g(x2);
    }
  }
  return f1 <= f2 ? GoldenResult{x1, f1} : GoldenResult{x2, f2};
}

double interp_cubic(std::span<const double> v, double s) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
  if (n == 0) return 0.0;
  if (n == 1 || s <= 0.0) return v.front();
  if (s >= double(n - 1)) return v.back();
  std::ptrdiff_t i = static_cast<std::ptrdiff_t>(std::floor(s));
  const double t = s - double(i);
  if (i < 1 || i + 2 >= n) return v[i] + t * (v[i + 1] - v[i]);
  const double p0 = v[i - 1], p1 = v[i], p2 = v[i + 1], p3 = v[i + 2];
  // Lagrange weights on nodes -1, 0, 1, 2.
  const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3;
}

}  // namespace pfront
