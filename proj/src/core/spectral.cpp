#include "spectral.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

namespace pfront {

void TriOperator::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += sub[i] * x[i - 1];
    else if (periodic) v += sub[0] * x[n - 1];
    if (i + 1 < n) v += sup[i] * x[i + 1];
    else if (periodic) v += sup[n - 1] * x[0];
    y[i] = v;
  }
}

PrincipalResult principal_metzler(const TriOperator& A, int max_iter, double tol) {
  const std::size_t n = A.size();
  if (n < (A.periodic ? 3u : 1u)) throw PreconditionError("operator too small");
  double scale = 0.0, rowmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (i > 0 || A.periodic ? A.sub[i] : 0.0) + (i + 1 < n || A.periodic ? A.sup[i] : 0.0);
    rowmax = std::max(rowmax, A.diag[i] + s);
    scale = std::max(scale, std::abs(A.diag[i]) + std::abs(s));
  }
  const double floor_tol = 256.0 * std::numeric_limits<double>::epsilon() * scale;
  PrincipalResult r;
  std::vector<double> psi(n, 1.0), next(n), Apsi(n), sub(n), diag(n), sup(n);
  double sigma = rowmax + 1.0;
  double best_width = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      sub[i] = -A.sub[i];
      sup[i] = -A.sup[i];
      diag[i] = sigma - A.diag[i];
      next[i] = psi[i];
    }
    if (A.periodic) solve_cyclic_tridiagonal(sub, diag, sup, next);
    else solve_tridiagonal(sub, diag, sup, next);
    double mx = 0.0;
    for (double v : next) mx = std::max(mx, v);
    if (!(mx > 0.0) || !std::isfinite(mx)) throw NumericalError("inverse iteration lost positivity");
    for (std::size_t i = 0; i < n; ++i) psi[i] = next[i] / mx;
    A.apply(psi, Apsi);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    bool positive = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(psi[i] > 0.0)) {
        positive = false;
        break;
      }
      const double q = Apsi[i] / psi[i];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    if (!positive) {
      // Shift crept too close; back off.
      sigma += 1e-6 * std::max(1.0, scale);
      continue;
    }
    r.iterations = it;
    r.lower = lo;
    r.upper = hi;
    const double width = hi - lo;
    const double target = std::max(tol * std::max(1.0, std::abs(hi)), floor_tol);
    if (width < 0.5 * best_width) {
      best_width = width;
      stall = 0;
    } else if (++stall > 30 && width < 1e3 * target) {
      break;  // round-off floor
    }
    if (width <= target) break;
    if (it == max_iter) throw NumericalError("inverse iteration did not converge");
    sigma = hi + std::max(width, 1e-9 * std::max(1.0, scale));
  }
  r.lambda = 0.5 * (r.lower + r.upper);
  r.psi = psi;
  A.apply(psi, Apsi);
  for (std::size_t i = 0; i < n; ++i) r.residual = std::max(r.residual, std::abs(Apsi[i] - r.lambda * psi[i]));
  return r;
}

namespace {

EigenPair to_pair(PrincipalResult&& r, BoundaryKind b, double extent, std::vector<double> x,
                  const std::string& label) {
  EigenPair p;
  p.lambda = r.lambda;
  p.lower = r.lower;
  p.upper = r.upper;
  p.psi = std::move(r.psi);
  p.residual = r.residual;
  p.iterations = r.iterations;
  p.boundary = b;
  p.extent = extent;
  p.x = std::move(x);
  p.potential = label;
  return p;
}

}  // namespace

EigenPair dirichlet_principal_eigen(const ProblemInstance& inst, const StateFn& ubar, double R,
                                    int n_nodes, const std::string& label) {
  if (n_nodes < 64) throw PreconditionError("need at least 64 nodes");
  if (!(R > 0)) throw PreconditionError("R must be positive");
  const double h = 2.0 * R / (n_nodes - 1);
  const std::size_t m = std::size_t(n_nodes - 2);
  TriOperator A;
  A.sub.resize(m);
  A.diag.resize(m);
  A.sup.resize(m);
  std::vector<double> x(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double xi = -R + double(k + 1) * h;
    x[k] = xi;
    const double aw = inst.a_L(xi - 0.5 * h), ae = inst.a_L(xi + 0.5 * h);
    A.sub[k] = aw / (h * h);
    A.sup[k] = ae / (h * h);
    A.diag[k] = -(aw + ae) / (h * h) + inst.dfdu_L(xi, ubar(xi));
  }
  return to_pair(principal_metzler(A), BoundaryKind::Dirichlet, R, std::move(x), label);
}

EigenPair periodic_principal_eigen(const ProblemInstance& inst, std::span<const double> ubar,
                                   const std::string& label) {
  const std::size_t N = ubar.size();
  if (N < 3) throw PreconditionError("need at least 3 nodes per period");
  const double L = inst.period, h = L / double(N);
  TriOperator A;
  A.periodic = true;
  A.sub.resize(N);
  A.diag.resize(N);
  A.sup.resize(N);
  std::vector<double> x(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double xi = double(i) * h;
    x[i] = xi;
    const double aw = inst.a_L(xi - 0.5 * h), ae = inst.a_L(xi + 0.5 * h);
    A.sub[i] = aw / (h * h);
    A.sup[i] = ae / (h * h);
    A.diag[i] = -(aw + ae) / (h * h) + inst.dfdu_L(xi, ubar[i]);
  }
  return to_pair(principal_metzler(A), BoundaryKind::Periodic, L, std::move(x), label);
}

const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::Stable: return "stable";
    case StabilityClass::Unstable: return "unstable";
    default: return "semistable-boundary";
  }
}

StabilityClass classify_lambda(double lambda1, double band) {
  if (lambda1 > band) return StabilityClass::Unstable;
  if (lambda1 < -band) return StabilityClass::Stable;
  return StabilityClass::SemistableBoundary;
}

StabilityTrace stability_limit(const ProblemInstance& inst, const StateFn& ubar,
                               const std::vector<double>& R_list, double h, int periodic_nodes) {
  if (!(h > 0)) throw PreconditionError("mesh width must be positive");
  StabilityTrace tr;
  double prev_R = 0.0;
  for (double R0 : R_list) {
    // Nested meshes: R is a whole number of cells.
    const long long cells = std::max<long long>(2, std::llround(R0 / h));
    const double R = double(cells) * h;
    if (R <= prev_R) throw PreconditionError("R list must be increasing");
    prev_R = R;
    const EigenPair p = dirichlet_principal_eigen(inst, ubar, R, int(2 * cells + 1));
    tr.R.push_back(R);
    tr.lambda.push_back(p.lambda);
  }
  for (std::size_t i = 1; i < tr.lambda.size(); ++i)
    if (tr.lambda[i] <= tr.lambda[i - 1] - 1e-10) tr.monotone = false;
  if (!tr.monotone) throw NumericalError("lambda_{1,R} trace is not increasing in R");
  double final_lambda = tr.lambda.empty() ? std::nan("") : tr.lambda.back();
  if (periodic_nodes > 0) {
    const double L = inst.period;
    std::vector<double> u(periodic_nodes);
    for (int i = 0; i < periodic_nodes; ++i) u[i] = ubar(L * i / periodic_nodes);
    tr.periodic_lambda = periodic_principal_eigen(inst, u).lambda;
    tr.terminal_gap = std::abs(tr.periodic_lambda - final_lambda);
    final_lambda = tr.periodic_lambda;
  }
  tr.cls = classify_lambda(final_lambda);
  return tr;
}

int steady_nodes(const ProblemInstance& inst, const NewtonConfig& cfg) {
  int N = std::max(cfg.nodes_per_period, 8);
  if (cfg.h_max > 0) N = std::max(N, int(std::ceil(inst.period / cfg.h_max - 1e-9)));
  return N;
}

std::vector<Seed> default_seeds(const ProblemInstance& inst) {
  std::vector<Seed> seeds;
  const double L = inst.period;
  const HomogenizedData hd = homogenized_data(inst, 512);
  std::vector<Seed> base;
  for (double tb : hd.theta_bar) {
    std::ostringstream name;
    name << "const " << tb;
    base.push_back({name.str(), [tb](double) { return tb; }});
  }
  if (inst.reaction.theta) {
    const auto th = inst.reaction.theta;
    base.push_back({"theta(x/L)", [th, L](double x) { return th(x / L); }});
  }
  for (const auto& b : base) {
    seeds.push_back(b);
    const auto u = b.u;
    seeds.push_back({b.name + " +cos", [u, L](double x) { return u(x) + 0.05 * std::cos(kTwoPi * x / L); }});
    seeds.push_back({b.name + " -cos", [u, L](double x) { return u(x) - 0.05 * std::cos(kTwoPi * x / L); }});
    seeds.push_back({b.name + " +sin", [u, L](double x) { return u(x) + 0.05 * std::sin(kTwoPi * x / L); }});
  }
  return seeds;
}

namespace {

struct PeriodicSystem {
  const ProblemInstance* inst;
  std::size_t N;
  double h;
  std::vector<double> faces;  // a at x_{i+1/2}
  std::vector<double> y;

  PeriodicSystem(const ProblemInstance& in, std::size_t n) : inst(&in), N(n), h(in.period / double(n)) {
    faces.resize(N);
    y.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      faces[i] = in.coeff.a((double(i) + 0.5) / double(N));
      y[i] = double(i) / double(N);
    }
  }
  double residual(std::span<const double> u, std::span<double> F) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t l = (i + N - 1) % N, r = (i + 1) % N;
      F[i] = (faces[i] * (u[r] - u[i]) - faces[l] * (u[i] - u[l])) / (h * h) +
             inst->reaction.f(y[i], u[i]);
      worst = std::max(worst, std::abs(F[i]));
    }
    return worst;
  }
};

}  // namespace

SteadyStateSearch find_periodic_steady_states(const ProblemInstance& inst,
                                              const std::vector<Seed>& seeds,
                                              const NewtonConfig& cfg) {
  const std::size_t N = std::size_t(steady_nodes(inst, cfg));
  const PeriodicSystem sys(inst, N);
  const double h = sys.h;
  const double tol = std::max(cfg.tol, 1e3 * std::numeric_limits<double>::epsilon() *
                                           inst.coeff.a_max / (h * h));
  SteadyStateSearch out;
  std::vector<double> u(N), F(N), trial(N), Ft(N), sub(N), diag(N), sup(N), delta(N);
  for (const auto& seed : seeds) {
    SeedOutcome so;
    so.seed = seed.name;
    bool inside = true;
    for (std::size_t i = 0; i < N; ++i) {
      u[i] = seed.u(double(i) * h);
      inside = inside && u[i] > 0.0 && u[i] < 1.0;
    }
    if (!inside) {
      so.rejected = true;
      so.note = "seed leaves (0,1)";
      out.seeds.push_back(so);
      continue;
    }
    double res = sys.residual(u, F);
    bool converged = res < tol;
    for (int it = 0; it < cfg.max_iter && !converged; ++it) {
      for (std::size_t i = 0; i < N; ++i) {
        const std::size_t l = (i + N - 1) % N;
        sub[i] = sys.faces[l] / (h * h);
        sup[i] = sys.faces[i] / (h * h);
        diag[i] = -(sys.faces[l] + sys.faces[i]) / (h * h) + inst.reaction.dfdu(sys.y[i], u[i]);
        delta[i] = -F[i];
      }
      solve_cyclic_tridiagonal(sub, diag, sup, delta);
      if (!all_finite(delta)) {
        so.note = "singular Jacobian";
        break;
      }
      double step = 1.0;
      double res_t = 0.0;
      int halvings = 0;
      for (; halvings <= cfg.max_halvings; ++halvings, step *= 0.5) {
        for (std::size_t i = 0; i < N; ++i) trial[i] = u[i] + step * delta[i];
        res_t = sys.residual(trial, Ft);
        if (res_t < res) break;
      }
      if (halvings > cfg.max_halvings) {
        so.note = "damping failed";
        break;
      }
      u.swap(trial);
      F.swap(Ft);
      res = res_t;
      converged = res < tol;
    }
    if (!converged) {
      if (so.note.empty()) so.note = "no convergence";
      out.seeds.push_back(so);
      continue;
    }
    so.converged = true;
    const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
    if (*mn <= cfg.touch_tol || *mx >= 1.0 - cfg.touch_tol) {
      so.note = "trivial state";
      out.seeds.push_back(so);
      continue;
    }
    // Deduplicate; node shifts are symmetries only for homogeneous instances.
    bool duplicate = false;
    const std::size_t shifts = inst.homogeneous() ? N : 1;
    for (const auto& s : out.states) {
      for (std::size_t sh = 0; sh < shifts && !duplicate; ++sh) {
        double d = 0.0;
        for (std::size_t i = 0; i < N; ++i) d = std::max(d, std::abs(s.u[(i + sh) % N] - u[i]));
        duplicate = d <= 10.0 * std::max(tol, 1e-8);
      }
      if (duplicate) break;
    }
    if (duplicate) {
      so.note = "duplicate";
      out.seeds.push_back(so);
      continue;
    }
    SteadyState st;
    st.period = inst.period;
    st.u = u;
    st.x.resize(N);
    for (std::size_t i = 0; i < N; ++i) st.x[i] = double(i) * h;
    st.residual = res;
    st.lambda1 = periodic_principal_eigen(inst, u).lambda;
    st.cls = classify_lambda(st.lambda1);
    st.seed = seed.name;
    out.states.push_back(std::move(st));
    so.note = "new state";
    out.seeds.push_back(so);
  }
  return out;
}

double decay_operator_eigen(const ProblemInstance& inst, double c, double mu, DecayDirection dir,
                            DecayPotential pot, int nodes) {
  const std::size_t N = std::size_t(std::max(nodes, 3));
  const double L = inst.period, hy = 1.0 / double(N);
  const double m = dir == DecayDirection::Right ? mu : -mu;
  const double state = dir == DecayDirection::Right ? 0.0 : 1.0;
  TriOperator T;
  T.periodic = true;
  T.sub.resize(N);
  T.diag.resize(N);
  T.sup.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double y = double(i) * hy;
    const double aw = inst.coeff.a(y - 0.5 * hy), ae = inst.coeff.a(y + 0.5 * hy);
    const double a = inst.coeff.a(y), da = inst.coeff.da(y);
    const double q = pot == DecayPotential::Margin ? -inst.reaction.gamma : inst.reaction.dfdu(y, state);
    const double diff = 1.0 / (L * L * hy * hy);
    const double adv = m * a / (L * hy);
    T.sub[i] = aw * diff + adv;
    T.sup[i] = ae * diff - adv;
    T.diag[i] = -(aw + ae) * diff - m * da / L - c * m + a * m * m + q;
  }
  return principal_metzler(T).lambda;
}

DecayRoot decay_root_mu(const ProblemInstance& inst, double c, DecayDirection dir,
                        DecayPotential pot, double mu_max, int min_nodes) {
  const double L = inst.period;
  const double ratio = inst.coeff.a_max / inst.coeff.a_min;
  auto nodes_for = [&](double mu) {
    return std::max(min_nodes, int(std::ceil(2.0 * mu * L * ratio)) + 8);
  };
  DecayRoot out;
  out.lambda_at_zero = decay_operator_eigen(inst, c, 0.0, dir, pot, min_nodes);
  if (!(out.lambda_at_zero < 0)) throw PreconditionError("lambda_1(0) must be negative");
  // Grid step from the constant-coefficient root estimate.
  const double g = -out.lambda_at_zero;
  const double cc = dir == DecayDirection::Right ? c : -c;
  const double est = (cc + std::sqrt(cc * cc + 4.0 * inst.coeff.a_max * g)) / (2.0 * inst.coeff.a_min);
  const double step = std::max(est / 20.0, 1e-4);
  double prev_mu = 0.0;
  out.mu_grid.push_back(0.0);
  out.lambda_grid.push_back(out.lambda_at_zero);
  double lo = -1, hi = -1;
  for (double mu = step; mu <= mu_max + 1e-12; mu += step) {
    const double lam = decay_operator_eigen(inst, c, mu, dir, pot, nodes_for(mu));
    out.mu_grid.push_back(mu);
    out.lambda_grid.push_back(lam);
    if (lam >= 0.0) {
      lo = prev_mu;
      hi = mu;
      break;
    }
    prev_mu = mu;
  }
  if (hi < 0) throw NumericalError("no sign change of lambda_1(mu) below mu_max");
  const int N = nodes_for(hi);
  out.nodes = N;
  auto fn = [&](double mu) { return decay_operator_eigen(inst, c, mu, dir, pot, N); };
  double flo = fn(lo), fhi = fn(hi);
  while (flo > 0 && lo > 0) {
    lo = std::max(0.0, lo - step);
    flo = fn(lo);
  }
  while (fhi < 0 && hi < mu_max) {
    hi += step;
    fhi = fn(hi);
  }
  if (flo == 0) {
    out.mu = lo;
    return out;
  }
  if (fhi == 0) {
    out.mu = hi;
    return out;
  }
  boost::uintmax_t iters = 200;
  const auto tolf = boost::math::tools::eps_tolerance<double>(48);
  const auto r = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, tolf, iters);
  out.mu = 0.5 * (r.first + r.second);
  return out;
}

void write_steady_state(const std::string& path, const SteadyState& s, const std::string& extra_header) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write steady state " + path);
  out << std::setprecision(15);
  out << "# L=" << s.period << " lambda1=" << s.lambda1 << " class=" << to_string(s.cls) << "\n";
  if (!extra_header.empty()) out << "# " << extra_header << "\n";
  for (std::size_t i = 0; i < s.u.size(); ++i) out << s.x[i] << ' ' << s.u[i] << '\n';
  if (!out) throw Error("I/O error writing " + path);
}

}  // namespace pfront
