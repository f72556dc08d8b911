#include "model.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

namespace pfront {
namespace {

constexpr int kBoundSamples = 4096;

void fill_bounds(CoefficientProfile& c) {
  c.a_min = c.a(0.0);
  c.a_max = c.a_min;
  c.da_max = 0.0;
  c.lip_a = 0.0;
  double prev = c.da(0.0);
  for (int i = 0; i <= kBoundSamples; ++i) {
    const double y = double(i) / kBoundSamples;
    const double v = c.a(y);
    const double dv = c.da(y);
    if (!std::isfinite(v) || !std::isfinite(dv))
      throw PreconditionError("diffusivity sampler returned a non-finite value");
    c.a_min = std::min(c.a_min, v);
    c.a_max = std::max(c.a_max, v);
    c.da_max = std::max(c.da_max, std::abs(dv));
    if (i > 0) c.lip_a = std::max(c.lip_a, std::abs(dv - prev) * kBoundSamples);
    prev = dv;
  }
  if (c.a_min <= 0.0) throw PreconditionError("diffusivity must be positive, min a = " +
                                              std::to_string(c.a_min));
}

// Periodic cubic spline through uniform samples on [0,1).
struct PeriodicSpline {
  std::vector<double> v, m;  // values and second derivatives
  double h = 0.0;

  explicit PeriodicSpline(std::vector<double> samples) : v(std::move(samples)) {
    const std::size_t n = v.size();
    if (n < 4) throw PreconditionError("tabulated profile needs at least 4 samples");
    h = 1.0 / double(n);
    std::vector<double> sub(n, 1.0), diag(n, 4.0), sup(n, 1.0);
    m.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double prev = v[(i + n - 1) % n], next = v[(i + 1) % n];
      m[i] = 6.0 * (next - 2.0 * v[i] + prev) / (h * h);
    }
    solve_cyclic_tridiagonal(sub, diag, sup, m);
  }

  std::pair<std::size_t, double> locate(double y) const {
    const double s = wrap_unit(y) / h;
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s), v.size() - 1);
    return {i, s - double(i)};
  }

  double value(double y) const {
    auto [i, t] = locate(y);
    const std::size_t j = (i + 1) % v.size();
    const double a = 1.0 - t;
    return a * v[i] + t * v[j] + h * h / 6.0 * ((a * a * a - a) * m[i] + (t * t * t - t) * m[j]);
  }

  double derivative(double y) const {
    auto [i, t] = locate(y);
    const std::size_t j = (i + 1) % v.size();
    const double a = 1.0 - t;
    return (v[j] - v[i]) / h + h / 6.0 * (-(3.0 * a * a - 1.0) * m[i] + (3.0 * t * t - 1.0) * m[j]);
  }
};

// Tabulated function of u on [0,1] with value and slope, cubic Hermite.
struct HermiteTable {
  std::vector<double> val, der;
  double du = 0.0;

  double value(double u) const {
    const std::size_t n = val.size() - 1;
    if (u <= 0.0) return val[0] + der[0] * u;
    if (u >= 1.0) return val[n] + der[n] * (u - 1.0);
    const double s = u / du;
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s), n - 1);
    const double t = s - double(i);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * val[i] + h10 * du * der[i] + h01 * val[i + 1] + h11 * du * der[i + 1];
  }
  double slope(double u) const {
    const std::size_t n = val.size() - 1;
    if (u <= 0.0) return der[0];
    if (u >= 1.0) return der[n];
    const double s = u / du;
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s), n - 1);
    const double t = s - double(i);
    const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
    const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
    return (d00 * val[i] + d01 * val[i + 1]) / du + d10 * der[i] + d11 * der[i + 1];
  }
};

}  // namespace

CoefficientProfile constant_coefficient(double d) {
  if (!(d > 0.0)) throw PreconditionError("constant diffusivity must be positive");
  CoefficientProfile c;
  c.a = [d](double) { return d; };
  c.da = [](double) { return 0.0; };
  c.constant = true;
  c.description = "a=" + std::to_string(d);
  fill_bounds(c);
  return c;
}

CoefficientProfile cosine_coefficient(double a0, double a1) {
  if (a1 == 0.0) return constant_coefficient(a0);
  CoefficientProfile c;
  c.a = [a0, a1](double y) { return a0 + a1 * std::cos(kTwoPi * y); };
  c.da = [a1](double y) { return -kTwoPi * a1 * std::sin(kTwoPi * y); };
  c.description = "a=" + std::to_string(a0) + "+" + std::to_string(a1) + "cos(2pi y)";
  fill_bounds(c);
  return c;
}

CoefficientProfile sine_coefficient(double a0, double a1) {
  if (a1 == 0.0) return constant_coefficient(a0);
  CoefficientProfile c;
  c.a = [a0, a1](double y) { return a0 + a1 * std::sin(kTwoPi * y); };
  c.da = [a1](double y) { return kTwoPi * a1 * std::cos(kTwoPi * y); };
  c.description = "a=" + std::to_string(a0) + "+" + std::to_string(a1) + "sin(2pi y)";
  fill_bounds(c);
  return c;
}

CoefficientProfile reciprocal_cosine_coefficient(double b0, double b1) {
  if (b1 == 0.0) return constant_coefficient(1.0 / b0);
  CoefficientProfile c;
  c.a = [b0, b1](double y) { return 1.0 / (b0 - b1 * std::cos(kTwoPi * y)); };
  c.da = [b0, b1](double y) {
    const double d = b0 - b1 * std::cos(kTwoPi * y);
    return -kTwoPi * b1 * std::sin(kTwoPi * y) / (d * d);
  };
  c.description = "a=1/(" + std::to_string(b0) + "-" + std::to_string(b1) + "cos(2pi y))";
  fill_bounds(c);
  return c;
}

CoefficientProfile tabulated_coefficient(std::vector<double> samples) {
  auto spline = std::make_shared<const PeriodicSpline>(std::move(samples));
  CoefficientProfile c;
  c.a = [spline](double y) { return spline->value(y); };
  c.da = [spline](double y) { return spline->derivative(y); };
  c.constant = std::all_of(spline->v.begin(), spline->v.end(),
                           [&](double x) { return x == spline->v.front(); });
  c.description = "a=tabulated(" + std::to_string(spline->v.size()) + ")";
  fill_bounds(c);
  return c;
}

std::string ValidationReport::summary(std::size_t max_items) const {
  if (pass()) return "PASS (" + std::to_string(checked_points) + " points)";
  std::ostringstream os;
  os << "FAIL: " << violations.size() << " violation(s)";
  for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
    const auto& v = violations[i];
    os << "; " << v.kind << " at y=" << v.y << " u=" << v.u << " value=" << v.value;
  }
  return os.str();
}

ValidationReport validate_hypotheses(const ReactionProfile& r, int n_samples) {
  if (n_samples < 16) throw PreconditionError("validation needs at least 16 samples per unit");
  ValidationReport rep;
  const double zero_tol = 1e-12;
  auto eval = [&](double y, double u) {
    const double v = r.f(y, u);
    if (!std::isfinite(v)) throw PreconditionError("reaction sampler returned a non-finite value");
    return v;
  };
  auto add = [&](const char* kind, double y, double u, double v) {
    rep.violations.push_back({kind, y, u, v});
  };
  if (!(r.gamma > 0.0)) add("gamma-nonpositive", 0.0, 0.0, r.gamma);
  if (!(r.delta > 0.0 && r.delta < 0.5)) add("delta-range", 0.0, 0.0, r.delta);

  const int nu = 4 * n_samples;
  for (int i = 0; i < n_samples; ++i) {
    const double y = double(i) / n_samples;
    const double f0 = eval(y, 0.0), f1 = eval(y, 1.0);
    if (std::abs(f0) > zero_tol) add("f(y,0)!=0", y, 0.0, f0);
    if (std::abs(f1) > zero_tol) add("f(y,1)!=0", y, 1.0, f1);
    const double th = r.theta ? r.theta(y) : std::nan("");
    if (!std::isfinite(th)) {
      add("theta-missing", y, 0.0, th);
      continue;
    }
    const double fth = eval(y, th);
    if (std::abs(fth) > 1e-10) add("f(y,theta)!=0", y, th, fth);
    if (!(th > r.delta && th < 1.0 - r.delta)) add("theta-outside-(delta,1-delta)", y, th, th);
    double prev_u = 0.0, prev_f = f0, prev_d = r.dfdu(y, 0.0);
    for (int j = 1; j <= nu; ++j) {
      const double u = double(j) / nu;
      const double v = eval(y, u);
      const double d = r.dfdu(y, u);
      if (!std::isfinite(d)) throw PreconditionError("reaction derivative is non-finite");
      ++rep.checked_points;
      if (u < th && j < nu && !(v < 0.0)) add("sign(0,theta)", y, u, v);
      if (u > th && j < nu && !(v > 0.0)) add("sign(theta,1)", y, u, v);
      if (u <= r.delta && v > -r.gamma * u) add("margin-near-0", y, u, v);
      if (u >= 1.0 - r.delta && v < r.gamma * (1.0 - u) - zero_tol) add("margin-near-1", y, u, v);
      const double du = u - prev_u;
      if (r.lip_K > 0.0 &&
          std::abs(v - prev_f) + std::abs(d - prev_d) > r.lip_K * du * (1.0 + 1e-9) + 1e-14)
        add("lipschitz-K", y, u, (std::abs(v - prev_f) + std::abs(d - prev_d)) / du);
      prev_u = u;
      prev_f = v;
      prev_d = d;
    }
  }
  return rep;
}

ReactionProfile extend_reaction(const ReactionProfile& r) {
  if (r.extended) return r;
  ReactionProfile e = r;
  auto f = r.f;
  auto d = r.dfdu;
  e.f = [f, d](double y, double u) {
    if (u < 0.0) return d(y, 0.0) * u;
    if (u > 1.0) return d(y, 1.0) * (u - 1.0);
    return f(y, u);
  };
  e.dfdu = [d](double y, double u) { return d(y, std::clamp(u, 0.0, 1.0)); };
  e.extended = true;
  return e;
}

CubicMargins cubic_margins(double theta_min, double theta_max, double scale) {
  CubicMargins m;
  m.delta = 0.25 * std::min(theta_min, 1.0 - theta_max);
  const double d = m.delta;
  const double low = (1.0 - d) * (theta_min - d);
  const double high = (1.0 - d) * (1.0 - d - theta_max);
  m.gamma = 0.99 * scale * std::min(low, high);
  return m;
}

double cubic_lipschitz(double theta_min, double theta_max, double scale) {
  double best = 0.0;
  for (int k = 0; k <= 16; ++k) {
    const double th = theta_min + (theta_max - theta_min) * k / 16.0;
    const double vertex = (1.0 + th) / 3.0;
    const double d1 = std::max({th, 1.0 - th, std::abs(-3 * vertex * vertex + 2 * (1 + th) * vertex - th)});
    const double d2 = std::max(2.0 * (1.0 + th), std::abs(-6.0 + 2.0 * (1.0 + th)));
    best = std::max(best, d1 + d2);
  }
  return scale * best;
}

ReactionProfile make_cubic(std::function<double(double)> theta, double gamma, double delta,
                           double K, double scale, bool x_independent) {
  double tmin = 1.0, tmax = 0.0;
  for (int i = 0; i < 1024; ++i) {
    const double t = theta(i / 1024.0);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (!(tmin > delta && tmax < 1.0 - delta))
    throw PreconditionError("cubic theta must range in (delta, 1-delta)");
  ReactionProfile r;
  r.theta = [theta](double y) { return theta(wrap_unit(y)); };
  r.f = [theta, scale](double y, double u) {
    return scale * u * (1.0 - u) * (u - theta(wrap_unit(y)));
  };
  r.dfdu = [theta, scale](double y, double u) {
    const double t = theta(wrap_unit(y));
    return scale * (-3.0 * u * u + 2.0 * (1.0 + t) * u - t);
  };
  r.gamma = gamma;
  r.delta = delta;
  r.lip_K = K > 0.0 ? K : cubic_lipschitz(tmin, tmax, scale);
  r.x_independent = x_independent;
  r.description = "cubic";
  return r;
}

std::function<double(double)> bisect_theta(const std::function<double(double, double)>& f,
                                           double delta) {
  return [f, delta](double y) {
    double lo = delta, hi = 1.0 - delta;
    double flo = f(y, lo), fhi = f(y, hi);
    if (!(flo < 0.0 && fhi > 0.0)) return std::nan("");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(y, mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
}

ProblemInstance make_instance(CoefficientProfile coeff, const ReactionProfile& reaction,
                              double period, int n_validation) {
  if (!(period > 0.0)) throw PreconditionError("period L must be positive");
  const auto rep = validate_hypotheses(reaction, n_validation);
  if (!rep.pass()) throw PreconditionError("reaction fails hypotheses: " + rep.summary());
  ProblemInstance inst;
  inst.coeff = std::move(coeff);
  inst.reaction = extend_reaction(reaction);
  inst.period = period;
  return inst;
}

ProblemInstance with_period(const ProblemInstance& inst, double period) {
  if (!(period > 0.0)) throw PreconditionError("period L must be positive");
  ProblemInstance out = inst;
  out.period = period;
  return out;
}

ProblemInstance make_xin_example(double delta, double lambda, double mu) {
  if (!(delta > 0.0 && delta < 0.5)) throw PreconditionError("Xin example needs delta in (0,1/2)");
  if (!(std::abs(delta * lambda) < 1.0))
    throw PreconditionError("Xin example needs |delta*lambda| < 1");
  if (mu == 0.0) throw PreconditionError("Xin example needs mu != 0");
  const double th = 0.5 - delta;
  const double scale = mu * mu;
  const auto m = cubic_margins(th, th, scale);
  auto reaction = make_cubic([th](double) { return th; }, m.gamma, m.delta, 0.0, scale, true);
  reaction.description = "xin";
  return make_instance(sine_coefficient(1.0, delta * lambda), reaction, 1.0);
}

HarmonicMean harmonic_mean(const CoefficientProfile& coeff, int quad_n) {
  auto inv = [&](double y) {
    const double v = coeff.a(y);
    if (!(v > 0.0)) throw PreconditionError("diffusivity not positive at y=" + std::to_string(y));
    return 1.0 / v;
  };
  const auto q = simpson_with_error(inv, 0.0, 1.0, quad_n);
  return {1.0 / q.value, q.error_estimate / q.value};
}

double arithmetic_mean(const CoefficientProfile& coeff, int quad_n) {
  return simpson(coeff.a, 0.0, 1.0, quad_n);
}

AveragedReaction fbar_and_integral(const ReactionProfile& r, int quad_n) {
  constexpr int kTable = 4096;
  auto table = std::make_shared<HermiteTable>();
  table->du = 1.0 / kTable;
  table->val.resize(kTable + 1);
  table->der.resize(kTable + 1);
  const int ny = r.x_independent ? 2 : quad_n;
  for (int j = 0; j <= kTable; ++j) {
    const double u = double(j) / kTable;
    table->val[j] = simpson([&](double y) { return r.f(y, u); }, 0.0, 1.0, ny);
    table->der[j] = simpson([&](double y) { return r.dfdu(y, u); }, 0.0, 1.0, ny);
  }
  AveragedReaction out;
  out.fbar = [table](double u) { return table->value(u); };
  out.fbar_prime = [table](double u) { return table->slope(u); };
  // Integral over u with direct nested quadrature (independent of the table).
  auto col = [&](double u) { return simpson([&](double y) { return r.f(y, u); }, 0.0, 1.0, ny); };
  const auto q = simpson_with_error(col, 0.0, 1.0, quad_n);
  out.integral = q.value;
  out.integral_error = q.error_estimate;
  return out;
}

Corrector corrector_chi(const CoefficientProfile& coeff, double a_H, int quad_n) {
  if (quad_n < 8) quad_n = 8;
  quad_n += quad_n % 2;
  const int n = quad_n;
  const double h = 1.0 / n;
  auto deriv = [a_H, a = coeff.a](double y) { return a_H / a(y) - 1.0; };
  auto nodes = std::make_shared<std::vector<double>>(n + 1, 0.0);
  auto slopes = std::make_shared<std::vector<double>>(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) (*slopes)[i] = deriv(i * h);
  // Panel-wise Simpson with midpoint evaluations.
  for (int i = 0; i < n; ++i) {
    const double mid = deriv((i + 0.5) * h);
    (*nodes)[i + 1] = (*nodes)[i] + h / 6.0 * ((*slopes)[i] + 4.0 * mid + (*slopes)[i + 1]);
  }
  Corrector c;
  c.periodicity_defect = std::abs((*nodes)[n]);
  // Remove the residual linear drift so chi is exactly periodic on the table.
  const double drift = (*nodes)[n];
  for (int i = 0; i <= n; ++i) (*nodes)[i] -= drift * i * h;
  c.chi_prime = deriv;
  c.chi = [nodes, slopes, h, n, drift](double y) {
    const double s = wrap_unit(y) / h;
    int i = std::min(static_cast<int>(s), n - 1);
    const double t = s - i;
    const double d0 = ((*slopes)[i] - drift) * h, d1 = ((*slopes)[i + 1] - drift) * h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * (*nodes)[i] + h10 * d0 + h01 * (*nodes)[i + 1] + h11 * d1;
  };
  return c;
}

HomogenizedData homogenized_data(const ProblemInstance& inst, int quad_n) {
  HomogenizedData hd;
  const auto hm = harmonic_mean(inst.coeff, quad_n);
  hd.a_H = hm.value;
  hd.a_H_rel_error = hm.rel_error;
  auto avg = fbar_and_integral(inst.reaction, quad_n);
  hd.fbar = avg.fbar;
  hd.fbar_prime = avg.fbar_prime;
  hd.I_fbar = avg.integral;
  constexpr int kScan = 2000;
  double prev = hd.fbar(1e-9);
  for (int j = 1; j < kScan; ++j) {
    const double u = double(j) / kScan;
    const double v = hd.fbar(u);
    if (v == 0.0) {
      hd.theta_bar.push_back(u);
    } else if ((prev < 0.0 && v > 0.0) || (prev > 0.0 && v < 0.0)) {
      double lo = double(j - 1) / kScan, hi = u;
      const bool rising = prev < 0.0;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool below = hd.fbar(mid) < 0.0;
        ((below == rising) ? lo : hi) = mid;
      }
      hd.theta_bar.push_back(0.5 * (lo + hi));
    }
    prev = v;
  }
  const auto chi = corrector_chi(inst.coeff, hd.a_H, quad_n);
  hd.chi = chi.chi;
  hd.chi_prime = chi.chi_prime;
  return hd;
}

std::vector<double> read_tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open tabulated profile");
  std::string line;
  bool header = false;
  std::vector<double> ys, vs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("period=1") != std::string::npos) header = true;
      continue;
    }
    std::istringstream ls(line);
    double y, v;
    if (!(ls >> y >> v)) throw ConfigError(path, "malformed line '" + line + "'");
    ys.push_back(y);
    vs.push_back(v);
  }
  if (!header) throw ConfigError(path, "missing '# period=1' header");
  if (vs.size() < 4) throw ConfigError(path, "need at least 4 samples");
  const double h = 1.0 / double(vs.size());
  for (std::size_t i = 0; i < ys.size(); ++i)
    if (std::abs(ys[i] - double(i) * h) > 1e-9)
      throw ConfigError(path, "samples must lie on the uniform grid i/n of [0,1)");
  return vs;
}

}  // namespace pfront
