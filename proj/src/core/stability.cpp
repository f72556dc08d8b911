#include "stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "json.hpp"

namespace pfront {

namespace {

long long floor_mod(long long a, long long m) { return ((a % m) + m) % m; }

}  // namespace

ComovingFrame make_frame(const ProblemInstance& inst, double c, double half_width, double h,
                         double dt_target) {
  if (c == 0.0 || !std::isfinite(c)) throw PreconditionError("co-moving frame needs a nonzero speed");
  if (!(h > 0.0)) throw ConfigError("h", "frame mesh width must be positive");
  if (!(half_width > 4.0 * h)) throw ConfigError("half_width", "frame domain too small");
  const double K = std::max(inst.reaction.lip_K, 1e-12);
  double dt = dt_target > 0.0 ? dt_target
                              : std::min({0.02, 0.45 * h / std::abs(c), 0.45 / K});
  if (std::abs(c) * dt / h > 0.9) {
    std::ostringstream msg;
    msg << "transport CFL |c| dt / h = " << std::abs(c) * dt / h << " exceeds 0.9";
    throw ConfigError("dt", msg.str());
  }
  ComovingFrame fr;
  fr.c = c;
  fr.period = inst.period;
  fr.T = inst.period / std::abs(c);
  fr.steps_per_period = std::max(1, int(std::ceil(fr.T / dt - 1e-9)));
  fr.dt = fr.T / fr.steps_per_period;
  const long long m = std::llround(half_width / h);
  fr.n = std::size_t(2 * m + 1);
  fr.h = h;
  fr.xi0 = -double(m) * h;
  return fr;
}

ComovingFrame front_frame(const ProblemInstance& inst, const FrontSolution& front,
                          double half_width, double h, double dt_target) {
  if (front.n_xi() < 8) throw PreconditionError("front has no profile lattice");
  if (half_width <= 0.0) half_width = 0.8 * std::min(-front.xi.front(), front.xi.back());
  if (h <= 0.0) h = front.h;
  return make_frame(inst, front.speed, half_width, h, dt_target);
}

double front_translate(const FrontSolution& front, double tau, double t, double xi) {
  return front(xi + tau, (xi + front.speed * t) / front.period);
}

std::vector<double> sample_translate(const ComovingFrame& frame, const FrontSolution& front,
                                     double tau, double t) {
  std::vector<double> v(frame.n);
  for (std::size_t i = 0; i < frame.n; ++i) v[i] = front_translate(front, tau, t, frame.xi(i));
  return v;
}

// ---------------------------------------------------------------------------
// Frame stepper

FrameStepper::FrameStepper(const ComovingFrame& frame, const ProblemInstance& inst)
    : fr_(&frame), inst_(&inst) {
  if (frame.n < 4) throw PreconditionError("frame grid too small");
  const std::size_t m = frame.n - 2;
  face_.resize(frame.n - 1);
  cp_.resize(m);
  den_.resize(m);
  sub_.resize(m);
  rhs_.resize(m);
}

void FrameStepper::factor(double t) {
  const ComovingFrame& F = *fr_;
  const std::size_t m = F.n - 2;
  const double tm = t + 0.5 * F.dt;
  for (std::size_t i = 0; i + 1 < F.n; ++i)
    face_[i] = inst_->a_L(F.xi(i) + 0.5 * F.h + F.c * tm);
  const double r = F.dt / (F.h * F.h);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double lo = -r * face_[i - 1];
    const double up = -r * face_[i];
    const double d = 1.0 + r * (face_[i - 1] + face_[i]);
    sub_[k] = lo;
    den_[k] = k == 0 ? d : d - lo * cp_[k - 1];
    cp_[k] = up / den_[k];
  }
}

void FrameStepper::solve(double* x) const {
  const std::size_t m = cp_.size();
  x[0] /= den_[0];
  for (std::size_t k = 1; k < m; ++k) x[k] = (x[k] - sub_[k] * x[k - 1]) / den_[k];
  for (std::size_t k = m - 1; k-- > 0;) x[k] -= cp_[k] * x[k + 1];
}

void FrameStepper::step(std::vector<double>& v, double t) {
  const ComovingFrame& F = *fr_;
  const std::size_t n = F.n, m = n - 2;
  v[0] = F.u_left;
  v[n - 1] = F.u_right;
  factor(t);
  const double dt = F.dt, h = F.h, c = F.c;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double adv = c > 0 ? c * (v[i + 1] - v[i]) / h : c * (v[i] - v[i - 1]) / h;
    rhs_[k] = v[i] + dt * (adv + inst_->f_L(F.xi(i) + c * t, v[i]));
  }
  const double r = dt / (h * h);
  rhs_[0] += r * face_[0] * v[0];
  rhs_[m - 1] += r * face_[n - 2] * v[n - 1];
  solve(rhs_.data());
  for (std::size_t k = 0; k < m; ++k) v[k + 1] = rhs_[k];
}

void FrameStepper::linear_explicit(const double* w, const std::vector<double>& dfdu,
                                   double* out) const {
  const ComovingFrame& F = *fr_;
  const std::size_t m = F.n - 2;
  const double dt = F.dt, h = F.h, c = F.c;
  for (std::size_t k = 0; k < m; ++k) {
    const double wl = k > 0 ? w[k - 1] : 0.0;
    const double wr = k + 1 < m ? w[k + 1] : 0.0;
    const double adv = c > 0 ? c * (wr - w[k]) / h : c * (w[k] - wl) / h;
    out[k] = w[k] + dt * (adv + dfdu[k] * w[k]);
  }
}

namespace {

// Step index reduced to one frame period: keeps the discrete map exactly
// T-periodic so that composing period maps is bitwise reproducible.
double phase_time(const ComovingFrame& F, long long k) {
  return double(floor_mod(k, F.steps_per_period)) * F.dt;
}

long long step_index(const ComovingFrame& F, double t) {
  const double s = t / F.dt;
  const long long k = std::llround(s);
  if (std::abs(s - double(k)) > 1e-6)
    throw PreconditionError("frame start time must be a multiple of the frame step");
  return k;
}

}  // namespace

std::vector<double> comoving_evolve(const ComovingFrame& frame, const ProblemInstance& inst,
                                    std::vector<double> g, double t0, double duration,
                                    const FrameCallback& cb) {
  if (g.size() != frame.n) throw PreconditionError("initial datum size does not match the frame");
  FrameStepper st(frame, inst);
  const long long k0 = step_index(frame, t0);
  const long long steps = std::llround(duration / frame.dt);
  g.front() = frame.u_left;
  g.back() = frame.u_right;
  for (long long k = 0; k < steps; ++k) {
    st.step(g, phase_time(frame, k0 + k));
    if (!all_finite(g)) throw NumericalError("frame evolution produced non-finite values");
    if (cb) cb(double(k0 + k + 1) * frame.dt, g);
  }
  return g;
}

std::vector<double> poincare_map(const ComovingFrame& frame, const ProblemInstance& inst,
                                 std::vector<double> g, double t0) {
  return comoving_evolve(frame, inst, std::move(g), t0, frame.T);
}

// ---------------------------------------------------------------------------
// Lab-frame convergence experiments

namespace {

class LabRun {
 public:
  LabRun(const ProblemInstance& inst, const FrontSolution& front, const StateFn& g)
      : inst_(&inst), L_(inst.period), npp_(front.ny) {
    const double W = front.half_width;
    grid_ = make_grid(inst, -W, W, npp_);
    if (std::abs(grid_.h - front.h) > 1e-12 * front.h)
      throw PreconditionError("front lattice does not match the evolution grid");
    field_.u.resize(grid_.n);
    for (std::size_t i = 0; i < grid_.n; ++i) field_.u[i] = g(grid_.x(i));
    if (!all_finite(field_.u)) throw PreconditionError("initial datum is not finite");
    SolverConfig sc;
    sc.dt = front.dt;
    sc.scheme = front.scheme;
    stepper_ = std::make_unique<Stepper>(grid_, inst, sc);
    width_ = grid_.x_max() - grid_.x_min();
  }

  void step() { stepper_->step(field_); }
  double t() const { return field_.t; }
  double dt() const { return stepper_->config().dt; }
  const Grid1D& grid() const { return grid_; }
  const Field& field() const { return field_; }

  void recentre() {
    const double pos = level_position(grid_, field_.u, 0.5);
    if (!std::isfinite(pos)) return;
    const double centre = 0.5 * (grid_.x_min() + grid_.x_max());
    if (std::abs(pos - centre) <= 0.15 * width_) return;
    const long long k = std::llround((pos - centre) / L_);
    if (k == 0) return;
    const long long shift = k * npp_;
    std::vector<double> u(grid_.n);
    for (std::size_t i = 0; i < grid_.n; ++i) {
      const long long src = static_cast<long long>(i) + shift;
      u[i] = src < 0 ? 1.0 : (src >= static_cast<long long>(grid_.n) ? 0.0 : field_.u[src]);
    }
    field_.u.swap(u);
    shift_grid(grid_, k);
    stepper_->rebind(grid_);
  }

  // Zone extremes: min over the left zone, max over the right zone.
  std::pair<double, double> zones(double frac) const {
    const std::size_t nz = std::max<std::size_t>(1, std::size_t(frac * double(grid_.n)));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nz; ++i) {
      lo = std::min(lo, field_.u[i]);
      hi = std::max(hi, field_.u[grid_.n - 1 - i]);
    }
    return {lo, hi};
  }

 private:
  const ProblemInstance* inst_;
  double L_;
  int npp_;
  Grid1D grid_;
  Field field_;
  std::unique_ptr<Stepper> stepper_;
  double width_ = 0.0;
};

// sup_x |u(x) - phi(x - c (t + tau), x/L)| on the current grid.
double shift_error(const FrontSolution& front, long long origin, std::span<const double> u,
                   double t, double tau) {
  const double c = front.speed, h = front.h;
  const int ny = front.ny;
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const long long J = origin + static_cast<long long>(i);
    const double x = double(J) * h;
    const double ref = front.column(x - c * (t + tau), int(floor_mod(J, ny)));
    e = std::max(e, std::abs(u[i] - ref));
  }
  return e;
}

struct TauFit {
  double tau = 0.0;
  double error = 0.0;
};

TauFit fit_tau(const FrontSolution& front, long long origin, std::span<const double> u, double t,
               double centre, double half) {
  auto E = [&](double tau) { return shift_error(front, origin, u, t, tau); };
  const int ns = 33;
  double best = centre, best_e = std::numeric_limits<double>::infinity();
  const double stepw = 2.0 * half / (ns - 1);
  for (int s = 0; s < ns; ++s) {
    const double tau = centre - half + s * stepw;
    const double e = E(tau);
    if (e < best_e) best_e = e, best = tau;
  }
  const GoldenResult gr =
      golden_section(E, best - stepw, best + stepw, 1e-10 * std::max(1.0, std::abs(best)), 120);
  if (gr.value < best_e) return {gr.argmin, gr.value};
  return {best, best_e};
}

StabilityReport run_convergence(LabRun& run, const FrontSolution& front,
                                const StabilityConfig& cfg, double t_entry) {
  StabilityReport rep;
  rep.t_entry = t_entry;
  const double c = front.speed, L = front.period, h = front.h;
  const double t_start = run.t();
  struct Probe {
    double t;
    long long origin;
    std::vector<double> u;
  };
  std::vector<Probe> probes;
  double next = t_start;
  double prev_tau = std::nan(""), prev_err = std::nan("");
  const long long max_steps = std::llround((cfg.t_max + 1.0) / run.dt()) + 10;
  long long steps = 0;
  while (true) {
    if (run.t() + 1e-9 >= next) {
      run.recentre();
      const double tl = run.t() - t_start;
      const Grid1D& g = run.grid();
      double centre, half;
      if (std::isfinite(prev_tau) && prev_err < 0.05) {
        centre = prev_tau;
        half = std::max(0.25 * L, 8.0 * h) / std::abs(c);
      } else {
        const double pos = level_position(g, run.field().u, 0.5);
        centre = std::isfinite(pos) ? pos / c - tl : 0.0;
        half = (2.0 * L + 4.0 * h) / std::abs(c);
      }
      const TauFit tf = fit_tau(front, g.origin, run.field().u, tl, centre, half);
      prev_tau = tf.tau;
      prev_err = tf.error;
      rep.t.push_back(tl);
      rep.tau.push_back(tf.tau);
      probes.push_back({tl, g.origin, run.field().u});
      next += cfg.probe_dt;
      if (tl >= cfg.t_max - 1e-9) break;
    }
    if (steps++ > max_steps) break;
    run.step();
    if (!all_finite(run.field().u)) throw NumericalError("stability run produced non-finite values");
  }

  const std::size_t np = rep.tau.size();
  rep.tau_g = rep.tau.back();
  const std::size_t w = std::min<std::size_t>(np, std::size_t(std::max(2, cfg.tau_window)));
  double tmin = rep.tau_g, tmax = rep.tau_g;
  for (std::size_t k = np - w; k < np; ++k) {
    tmin = std::min(tmin, rep.tau[k]);
    tmax = std::max(tmax, rep.tau[k]);
  }
  rep.tau_stable = np >= std::size_t(cfg.tau_window) && (tmax - tmin) < h / std::abs(c);

  rep.sup_error.resize(np);
  for (std::size_t k = 0; k < np; ++k)
    rep.sup_error[k] = shift_error(front, probes[k].origin, probes[k].u, probes[k].t, rep.tau_g);
  rep.final_error = rep.sup_error.back();
  rep.noise_floor = *std::min_element(rep.sup_error.begin(), rep.sup_error.end());
  rep.at_floor = *std::max_element(rep.sup_error.begin(), rep.sup_error.end()) <= 1e-6;

  // Log-linear segment between fit_upper and floor_factor * floor.
  std::size_t ka = np, kb = 0;
  for (std::size_t k = 0; k < np; ++k)
    if (rep.sup_error[k] <= cfg.fit_upper) {
      ka = k;
      break;
    }
  const double lo = cfg.floor_factor * std::max(rep.noise_floor, 1e-300);
  for (std::size_t k = np; k-- > 0;)
    if (rep.sup_error[k] >= lo) {
      kb = k;
      break;
    }
  if (ka < np && kb > ka && int(kb - ka + 1) >= cfg.min_fit_points &&
      std::log(rep.sup_error[ka] / rep.sup_error[kb]) >= 2.0) {
    std::vector<double> tt, le;
    for (std::size_t k = ka; k <= kb; ++k) {
      tt.push_back(rep.t[k]);
      le.push_back(std::log(std::max(rep.sup_error[k], 1e-300)));
    }
    const LineFit lf = fit_line(tt, le);
    rep.mu_fit = -lf.slope;
    rep.fit_t0 = tt.front();
    rep.fit_t1 = tt.back();
    rep.fit_points = int(tt.size());
  }
  const bool rate_ok = (std::isfinite(rep.mu_fit) && rep.mu_fit > 0.0) || rep.at_floor;
  rep.accepted = rep.tau_stable && rep.final_error < cfg.final_tol && rate_ok;
  std::ostringstream msg;
  msg << "tau_g=" << rep.tau_g << " spread=" << (tmax - tmin) << " final_error=" << rep.final_error
      << " mu_fit=" << rep.mu_fit << " fit_points=" << rep.fit_points;
  if (!rep.tau_stable) msg << " (phase shift not stabilised within budget)";
  rep.message = msg.str();
  return rep;
}

void require_front(const FrontSolution& front) {
  if (front.status != FrontStatus::Propagating || front.speed == 0.0)
    throw PreconditionError("stability experiments need a non-stationary pulsating front");
  if (front.n_xi() < 8 || front.ny < 1) throw PreconditionError("front has no profile lattice");
}

}  // namespace

StabilityReport global_stability_experiment(const ProblemInstance& inst, const FrontSolution& front,
                                            const StateFn& g, const StabilityConfig& cfg) {
  require_front(front);
  LabRun run(inst, front, g);
  const double delta = inst.reaction.delta;
  for (double v : run.field().u)
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw PreconditionError("initial datum must take values in [0,1]");
  const auto [lo, hi] = run.zones(cfg.zone);
  if (!(lo > 1.0 - delta) || !(hi < delta)) {
    std::ostringstream msg;
    msg << "initial datum violates the front-like end conditions: left min " << lo
        << " must exceed " << 1.0 - delta << ", right max " << hi << " must stay below " << delta;
    throw PreconditionError(msg.str());
  }
  return run_convergence(run, front, cfg, 0.0);
}

double steady_value(const SteadyState& s, double x) {
  const std::size_t N = s.u.size();
  if (N == 0) throw PreconditionError("empty steady state");
  const double p = wrap_unit(x / s.period) * double(N);
  const std::size_t i = std::size_t(p) % N;
  const double w = p - std::floor(p);
  return (1.0 - w) * s.u[i] + w * s.u[(i + 1) % N];
}

StabilityReport initialv2_experiment(const ProblemInstance& inst, const FrontSolution& front,
                                     const std::vector<SteadyState>& states,
                                     const SteadyState& u_minus, const SteadyState& u_plus,
                                     const StateFn& g, const StabilityConfig& cfg) {
  require_front(front);
  if (states.empty()) throw PreconditionError("no intermediate steady states supplied");
  for (const SteadyState& s : states)
    if (s.cls != StabilityClass::Unstable)
      throw PreconditionError("intermediate steady state '" + s.seed + "' is not unstable");
  LabRun run(inst, front, g);
  const Grid1D& grid = run.grid();
  for (double v : run.field().u)
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw PreconditionError("initial datum must take values in [0,1]");
  const std::size_t nz = std::max<std::size_t>(1, std::size_t(cfg.zone * double(grid.n)));
  double left_gap = std::numeric_limits<double>::infinity();
  double right_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nz; ++i) {
    left_gap = std::min(left_gap, run.field().u[i] - steady_value(u_minus, grid.x(i)));
    const std::size_t j = grid.n - 1 - i;
    right_gap = std::max(right_gap, run.field().u[j] - steady_value(u_plus, grid.x(j)));
  }
  if (!(left_gap > 0.0) || !(right_gap < 0.0)) {
    std::ostringstream msg;
    msg << "initial datum violates the steady-state end conditions: left margin " << left_gap
        << " must be positive, right margin " << right_gap << " must be negative";
    throw PreconditionError(msg.str());
  }
  const double delta = inst.reaction.delta;
  const long long check = std::max<long long>(1, std::llround(0.5 / run.dt()));
  long long k = 0;
  while (true) {
    const auto [lo, hi] = run.zones(cfg.zone);
    if (lo > 1.0 - delta && hi < delta) break;
    if (run.t() >= cfg.t_max) {
      StabilityReport rep;
      rep.t_entry = run.t();
      rep.message = "front-like end conditions not reached within budget";
      return rep;
    }
    for (long long s = 0; s < check; ++s, ++k) run.step();
    run.recentre();
    if (!all_finite(run.field().u)) throw NumericalError("stability run produced non-finite values");
  }
  return run_convergence(run, front, cfg, run.t());
}

// ---------------------------------------------------------------------------
// Super- and subsolutions

double SuperSubSolution::eta(double s) { return 0.5 * (1.0 + std::tanh(-0.5 * s)); }

double SuperSubSolution::w1(double t) const {
  const double e = std::exp(-gamma * t);
  return kind == SupersubKind::Super ? 1.0 + (1.0 - delta) * e : 1.0 - delta * e;
}

double SuperSubSolution::w2(double t) const {
  const double e = std::exp(-gamma * t);
  return kind == SupersubKind::Super ? delta * e : -(1.0 + delta) * e;
}

double SuperSubSolution::w(double t, double x) const {
  const double e = eta(x + c_drift * t);
  return w1(t) * e + w2(t) * (1.0 - e);
}

SuperSubSolution build_supersub(const ProblemInstance& inst, SupersubKind kind, double K, double c,
                                double tol, int nt, int nxi, double xi_max) {
  if (K < inst.reaction.lip_K * (1.0 - 1e-12))
    throw PreconditionError("K must be at least the Lipschitz constant of the reaction");
  if (nt < 2 || nxi < 2) throw ConfigError("lattice", "need at least 2 points per direction");
  SuperSubSolution s;
  s.kind = kind;
  s.c = c;
  s.gamma = inst.reaction.gamma;
  s.delta = inst.reaction.delta;
  s.K = K;
  s.period = inst.period;
  s.a_norm = inst.coeff.a_max;
  s.da_norm = inst.coeff.da_max / inst.period;
  const double spread = s.a_norm + s.da_norm + 2.0 * K;
  s.c_drift = kind == SupersubKind::Super ? c - spread : c + spread;
  const double t_end = 10.0 / s.gamma;
  s.t.resize(nt);
  s.xi.resize(nxi);
  for (int i = 0; i < nt; ++i) s.t[i] = t_end * i / (nt - 1);
  for (int j = 0; j < nxi; ++j) s.xi[j] = -xi_max + 2.0 * xi_max * j / (nxi - 1);
  s.defect.resize(std::size_t(nt) * nxi);
  s.defect_min = std::numeric_limits<double>::infinity();
  s.defect_max = -std::numeric_limits<double>::infinity();
  const double g = s.gamma, d = s.delta;
  for (int i = 0; i < nt; ++i) {
    const double t = s.t[i];
    const double e = std::exp(-g * t);
    const double w1 = s.w1(t), w2 = s.w2(t);
    const double w1p = kind == SupersubKind::Super ? -g * (1.0 - d) * e : g * d * e;
    const double w2p = kind == SupersubKind::Super ? -g * d * e : g * (1.0 + d) * e;
    for (int j = 0; j < nxi; ++j) {
      const double xi = s.xi[j];
      const double x = xi + c * t;
      const double sarg = xi + s.c_drift * t;
      const double et = SuperSubSolution::eta(sarg);
      const double ch = std::cosh(0.5 * sarg);
      const double q = std::isfinite(ch) ? 0.25 / (ch * ch) : 0.0;  // eta (1 - eta)
      const double ep = -q;
      const double epp = q * std::tanh(0.5 * sarg);  // eta(1-eta)(1-2 eta)
      const double dw = w1 - w2;
      const double wv = w1 * et + w2 * (1.0 - et);
      const double wt = w1p * et + w2p * (1.0 - et) + dw * s.c_drift * ep;
      const double wx = dw * ep, wxx = dw * epp;
      const double val = wt - c * wx - inst.a_L(x) * wxx - inst.da_L(x) * wx - inst.f_L(x, wv);
      s.defect[std::size_t(i) * nxi + j] = val;
      s.defect_min = std::min(s.defect_min, val);
      s.defect_max = std::max(s.defect_max, val);
    }
  }
  s.verified = kind == SupersubKind::Super ? s.defect_min >= -tol : s.defect_max <= tol;
  return s;
}

void squeeze_check(SuperSubSolution& s, const FrontSolution& front) {
  const double L = front.period, h = front.h, d = s.delta;
  auto g = [&](double x) { return front(x, x / L); };
  const double lo = front.xi.front(), hi = front.xi.back();
  const std::size_t n = front.n_xi();
  double gap = std::numeric_limits<double>::infinity();
  if (s.kind == SupersubKind::Super) {
    // Smallest period multiple xi0 with g(xi + xi0) <= delta for xi >= 0.
    double last = lo;
    for (std::size_t j = 0; j < n; ++j)
      if (g(lo + double(j) * h) > d) last = lo + double(j) * h;
    s.squeeze_shift = L * std::ceil(last / L + 1e-12);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = lo + double(j) * h - s.squeeze_shift;
      gap = std::min(gap, s.w(0.0, x) - g(x + s.squeeze_shift));
    }
  } else {
    double first = hi;
    for (std::size_t j = n; j-- > 0;)
      if (g(lo + double(j) * h) < 1.0 - d) first = lo + double(j) * h;
    s.squeeze_shift = L * std::floor(first / L - 1e-12);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = lo + double(j) * h - s.squeeze_shift;
      gap = std::min(gap, g(x + s.squeeze_shift) - s.w(0.0, x));
    }
  }
  s.squeeze_gap = gap;
  s.squeeze_ok = gap >= -1e-12;
}

// ---------------------------------------------------------------------------
// Linearised period map

SpectrumSummary poincare_spectrum(const ComovingFrame& frame, const ProblemInstance& inst,
                                  const std::vector<double>& v0, int n_modes, int workers,
                                  double unit_tol, double margin) {
  if (frame.n > 402) throw PreconditionError("linearised period map needs a coarse grid (<= 400 unknowns)");
  if (v0.size() != frame.n) throw PreconditionError("orbit datum size does not match the frame");
  const std::size_t n = frame.n, m = n - 2;
  const int N = frame.steps_per_period;

  // Orbit, reaction derivative and implicit factors per step.
  FrameStepper st(frame, inst);
  struct StepData {
    std::vector<double> dfdu, cp, den, sub;
  };
  std::vector<StepData> data(N);
  std::vector<double> v = v0;
  v.front() = frame.u_left;
  v.back() = frame.u_right;
  for (int k = 0; k < N; ++k) {
    const double t = double(k) * frame.dt;
    StepData& sd = data[k];
    sd.dfdu.resize(m);
    for (std::size_t q = 0; q < m; ++q)
      sd.dfdu[q] = inst.dfdu_L(frame.xi(q + 1) + frame.c * t, v[q + 1]);
    st.step(v, t);
  }
  // Implicit factors per step for the column sweeps.
  const double r = frame.dt / (frame.h * frame.h);
  for (int k = 0; k < N; ++k) {
    StepData& sd = data[k];
    sd.cp.resize(m);
    sd.den.resize(m);
    sd.sub.resize(m);
    const double tm = (double(k) + 0.5) * frame.dt;
    std::vector<double> face(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      face[i] = inst.a_L(frame.xi(i) + 0.5 * frame.h + frame.c * tm);
    for (std::size_t q = 0; q < m; ++q) {
      const std::size_t i = q + 1;
      const double lo = -r * face[i - 1], up = -r * face[i];
      const double d = 1.0 + r * (face[i - 1] + face[i]);
      sd.sub[q] = lo;
      sd.den[q] = q == 0 ? d : d - lo * sd.cp[q - 1];
      sd.cp[q] = up / sd.den[q];
    }
  }

  Eigen::MatrixXd M(m, m);
  auto sweep = [&](std::size_t col_begin, std::size_t col_end) {
    std::vector<double> w(m), tmp(m);
    const double dt = frame.dt, h = frame.h, c = frame.c;
    for (std::size_t col = col_begin; col < col_end; ++col) {
      std::fill(w.begin(), w.end(), 0.0);
      w[col] = 1.0;
      for (int k = 0; k < N; ++k) {
        const StepData& sd = data[k];
        for (std::size_t q = 0; q < m; ++q) {
          const double wl = q > 0 ? w[q - 1] : 0.0;
          const double wr = q + 1 < m ? w[q + 1] : 0.0;
          const double adv = c > 0 ? c * (wr - w[q]) / h : c * (w[q] - wl) / h;
          tmp[q] = w[q] + dt * (adv + sd.dfdu[q] * w[q]);
        }
        tmp[0] /= sd.den[0];
        for (std::size_t q = 1; q < m; ++q) tmp[q] = (tmp[q] - sd.sub[q] * tmp[q - 1]) / sd.den[q];
        for (std::size_t q = m - 1; q-- > 0;) tmp[q] -= sd.cp[q] * tmp[q + 1];
        w.swap(tmp);
      }
      for (std::size_t q = 0; q < m; ++q) M(q, col) = w[q];
    }
  };
  const int nw = std::max(1, std::min<int>(workers, int(m)));
  if (nw == 1) {
    sweep(0, m);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nw; ++t)
      pool.emplace_back(sweep, m * t / nw, m * (t + 1) / nw);
    for (auto& th : pool) th.join();
  }
  if (!M.allFinite()) throw NumericalError("linearised period map is not finite");

  Eigen::EigenSolver<Eigen::MatrixXd> es(M, true);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  std::vector<int> order(m);
  for (std::size_t q = 0; q < m; ++q) order[q] = int(q);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(ev[a]), mb = std::abs(ev[b]);
    return ma != mb ? ma > mb : a < b;
  });

  SpectrumSummary out;
  out.T = frame.T;
  out.nodes = int(n);
  out.ess_radius = std::exp(-inst.reaction.gamma * frame.T / 2.0);
  for (int q = 0; q < std::min<int>(n_modes, int(m)); ++q) out.eigenvalues.push_back(ev[order[q]]);

  int unit = -1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < m; ++q) {
    const double gap = std::abs(ev[q] - std::complex<double>(1.0, 0.0));
    if (gap < best) best = gap, unit = int(q);
  }
  out.unit_gap = best;
  // Discrete d_xi of the orbit datum on interior nodes.
  Eigen::VectorXcd dir(m);
  for (std::size_t q = 0; q < m; ++q)
    dir[q] = (v0[q + 2] - v0[q]) / (2.0 * frame.h);
  const Eigen::VectorXcd evec = es.eigenvectors().col(unit);
  const double nd = dir.norm(), ne = evec.norm();
  out.cosine = (nd > 0 && ne > 0) ? std::abs(evec.dot(dir)) / (nd * ne) : 0.0;
  out.second_modulus = 0.0;
  for (std::size_t q = 0; q < m; ++q) {
    if (int(q) == unit) continue;
    const double mod = std::abs(ev[q]);
    out.second_modulus = std::max(out.second_modulus, mod);
    if (mod > out.ess_radius + margin) ++out.flagged;
  }
  out.unit_ok = out.unit_gap < unit_tol && out.cosine > 0.99;
  out.second_ok = out.second_modulus < 1.0;
  return out;
}

SpectrumSummary front_poincare_spectrum(const ProblemInstance& inst, const FrontSolution& front,
                                        int n_nodes, double half_width, int n_modes, int workers) {
  require_front(front);
  if (n_nodes < 16 || n_nodes > 402) throw ConfigError("nodes", "coarse grid must have 16..402 nodes");
  const double h = 2.0 * half_width / double(n_nodes - 1);
  const ComovingFrame fr = make_frame(inst, front.speed, half_width, h);
  const std::vector<double> v0 = sample_translate(fr, front, 0.0, 0.0);
  return poincare_spectrum(fr, inst, v0, n_modes, workers);
}

std::string stability_report_json(const StabilityReport& r) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["tau_g"] = num(r.tau_g);
  j["mu_fit"] = num(r.mu_fit);
  j["accepted"] = r.accepted;
  j["tau_stable"] = r.tau_stable;
  j["final_error"] = num(r.final_error);
  j["noise_floor"] = num(r.noise_floor);
  j["t_entry"] = r.t_entry;
  j["fit_window"] = {r.fit_t0, r.fit_t1};
  json se = json::array();
  for (std::size_t k = 0; k < r.t.size(); ++k) se.push_back({r.t[k], num(r.sup_error[k])});
  j["sup_errors"] = se;
  json sp = json::array();
  for (const auto& z : r.spectrum) sp.push_back({z.real(), z.imag()});
  j["spectrum"] = sp;
  j["message"] = r.message;
  return j.dump(2);
}

}  // namespace pfront
