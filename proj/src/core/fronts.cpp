#include "fronts.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace pfront {

const char* to_string(FrontStatus s) {
  switch (s) {
    case FrontStatus::Propagating: return "propagating";
    case FrontStatus::Stationary: return "stationary";
    default: return "inconclusive";
  }
}

namespace {

long long floor_mod(long long a, long long m) { return ((a % m) + m) % m; }

}  // namespace

double default_dt(const ProblemInstance& inst) {
  const double K = inst.reaction.lip_K;
  return K > 0 ? std::min(0.02, 0.4 / K) : 0.02;
}

double default_half_width(const ProblemInstance& inst) {
  double worst = std::numeric_limits<double>::infinity();
  for (double s : {0.0, 1.0}) {
    double mean = 0.0;
    const int n = 256;
    for (int i = 0; i < n; ++i) mean += inst.reaction.dfdu(double(i) / n, s);
    mean /= n;
    if (!(mean < 0.0)) throw PreconditionError("limit states must be linearly stable");
    worst = std::min(worst, std::sqrt(-mean / inst.coeff.a_max));
  }
  return std::max(20.0 / worst, 4.0 * inst.period);
}

int default_nodes_per_period(const ProblemInstance& inst, const FrontConfig& cfg) {
  int npp = std::max(cfg.nodes_per_period, 8);
  if (cfg.h_max > 0) npp = std::max(npp, int(std::ceil(inst.period / cfg.h_max - 1e-9)));
  return npp;
}

SpeedEstimate measure_speed(std::span<const double> t, std::span<const double> x,
                            double t_discard) {
  SpeedEstimate est;
  std::vector<double> tt, xx;
  for (std::size_t i = 0; i < t.size() && i < x.size(); ++i)
    if (t[i] >= t_discard && std::isfinite(x[i])) {
      tt.push_back(t[i]);
      xx.push_back(x[i]);
    }
  est.samples = int(tt.size());
  if (tt.size() < 2) return est;
  const LineFit fit = fit_line(tt, xx);
  est.c_level = fit.slope;
  est.t_begin = tt.front();
  est.t_end = tt.back();
  const double span = est.t_end - est.t_begin;
  est.uncertainty = 2.0 * fit.slope_stderr + (span > 0 ? 2.0 * fit.max_abs_residual / span : 0.0);
  return est;
}

void SnapshotRing::push(double t, long long origin, std::span<const double> u) {
  if (!snaps_.empty() && t <= snaps_.back().t) throw PreconditionError("snapshot times must increase");
  if (snaps_.size() >= capacity_) {
    Snap s = std::move(snaps_.front());
    snaps_.pop_front();
    s.t = t;
    s.origin = origin;
    s.u.assign(u.begin(), u.end());
    snaps_.push_back(std::move(s));
  } else {
    snaps_.push_back({t, origin, std::vector<double>(u.begin(), u.end())});
  }
}

void SnapshotRing::trim() {
  while (snaps_.size() > capacity_) snaps_.pop_front();
}

double SnapshotRing::at(std::size_t s, long long j) const {
  const Snap& sn = snaps_[s];
  const long long i = j - sn.origin;
  if (i < 0) return u_left_;
  if (i >= static_cast<long long>(sn.u.size())) return u_right_;
  return sn.u[i];
}

SnapshotRing::Stencil SnapshotRing::stencil(double t) const {
  Stencil st;
  const std::size_t n = snaps_.size();
  if (n == 0) throw PreconditionError("empty snapshot ring");
  if (n == 1) {
    st.first = 0;
    st.count = 1;
    st.w[0] = 1.0;
    return st;
  }
  auto it = std::upper_bound(snaps_.begin(), snaps_.end(), t,
                             [](double v, const Snap& s) { return v < s.t; });
  std::ptrdiff_t i = std::distance(snaps_.begin(), it) - 1;  // t_i <= t
  i = std::clamp<std::ptrdiff_t>(i, 0, std::ptrdiff_t(n) - 2);
  std::ptrdiff_t lo = i - 1;
  lo = std::clamp<std::ptrdiff_t>(lo, 0, std::max<std::ptrdiff_t>(0, std::ptrdiff_t(n) - 4));
  const int m = int(std::min<std::size_t>(4, n));
  st.first = std::size_t(lo);
  st.count = m;
  for (int a = 0; a < m; ++a) {
    double w = 1.0;
    const double ta = snaps_[lo + a].t;
    for (int b = 0; b < m; ++b)
      if (b != a) w *= (t - snaps_[lo + b].t) / (ta - snaps_[lo + b].t);
    st.w[a] = w;
  }
  return st;
}

double SnapshotRing::value(const Stencil& st, long long j) const {
  double v = 0.0;
  for (int a = 0; a < st.count; ++a) v += st.w[a] * at(st.first + a, j);
  return v;
}

PeriodMatch match_period(const SnapshotRing& ring, int nodes_per_period, double period,
                         int direction, double T_lo, double T_hi) {
  PeriodMatch pm;
  pm.defect = std::nan("");
  const std::size_t n = ring.size();
  if (n < 8 || !(T_hi > T_lo) || T_lo <= 0) return pm;
  const double spacing = (ring.t_back() - ring.t_front()) / double(n - 1);
  std::size_t base = n;
  for (std::size_t s = n; s-- > 0;) {
    if (ring.time(s) + T_hi + 1.5 * spacing <= ring.t_back()) {
      base = s;
      break;
    }
  }
  if (base == n) return pm;
  const double t0 = ring.time(base);
  if (t0 + T_lo < ring.t_front()) return pm;
  const long long shift = static_cast<long long>(direction) * nodes_per_period;
  const long long j0 = ring.origin(base);
  const long long j1 = j0 + static_cast<long long>(ring.nodes(base));
  auto defect = [&](double T) {
    const auto st = ring.stencil(t0 + T);
    double worst = 0.0;
    for (long long j = j0; j < j1; ++j)
      worst = std::max(worst, std::abs(ring.value(st, j + shift) - ring.at(base, j)));
    return worst;
  };
  const int scan = 48;
  std::vector<double> Ts(scan + 1), Ds(scan + 1);
  int best = 0;
  for (int i = 0; i <= scan; ++i) {
    Ts[i] = T_lo + (T_hi - T_lo) * i / scan;
    Ds[i] = defect(Ts[i]);
    if (Ds[i] < Ds[best]) best = i;
  }
  pm.interior = best > 0 && best < scan;
  const double lo = Ts[std::max(best - 1, 0)], hi = Ts[std::min(best + 1, scan)];
  const double tolT = 1e-11 * T_hi;
  const GoldenResult g = golden_section(defect, lo, hi, tolT, 300);
  pm.T = g.argmin;
  pm.defect = g.value;
  pm.t0 = t0;
  pm.c_period = direction * period / pm.T;
  // Slope of the defect away from the minimiser gives the timing resolution.
  const double probe = std::max(1e-4 * pm.T, 10 * tolT);
  const double slope =
      0.5 * (std::abs(defect(pm.T + probe) - pm.defect) + std::abs(defect(pm.T - probe) - pm.defect)) /
      probe;
  const double dT = (slope > 0 ? pm.defect / slope : probe) + tolT;
  pm.uncertainty = std::abs(pm.c_period) * dT / pm.T;
  return pm;
}

ProfileLattice extract_profile(const SnapshotRing& ring, const Grid1D& grid, double c,
                               int replicas, double margin) {
  if (c == 0.0) throw PreconditionError("profile extraction needs a nonzero speed");
  if (replicas < 1) replicas = 1;
  const std::size_t n = ring.size();
  if (n < 4) throw PreconditionError("too few snapshots for profile extraction");
  const int npp = grid.nodes_per_period;
  const double h = grid.h, L = grid.period;
  const double T = L / std::abs(c);
  const double spacing = (ring.t_back() - ring.t_front()) / double(n - 1);
  if (spacing > T / 8.0) {
    std::ostringstream msg;
    msg << "snapshot spacing " << spacing << " too coarse for period " << T
        << "; need stride <= " << T / 8.0;
    throw PreconditionError(msg.str());
  }
  const double t_ref = ring.time(n - 2);
  const double t_min = t_ref - replicas * T;
  if (t_min < ring.time(1)) {
    std::ostringstream msg;
    msg << "snapshots span " << (ring.t_back() - ring.t_front()) << " but " << replicas
        << " periods need " << replicas * T + 3 * spacing;
    throw PreconditionError(msg.str());
  }
  long long jlo = std::numeric_limits<long long>::min(), jhi = std::numeric_limits<long long>::max();
  for (std::size_t s = 0; s < n; ++s) {
    jlo = std::max(jlo, ring.origin(s));
    jhi = std::min(jhi, ring.origin(s) + static_cast<long long>(ring.nodes(s)) - 1);
  }
  const double xlo = jlo * h + margin, xhi = jhi * h - margin;
  const double ct_a = c * t_min, ct_b = c * t_ref;
  const double xi_min = xlo - std::min(ct_a, ct_b) + L;
  const double xi_max = xhi - std::max(ct_a, ct_b) - L;
  if (!(xi_max > xi_min)) throw PreconditionError("domain too small for profile extraction");

  const int dir = c > 0 ? 1 : -1;
  auto sample = [&](double xi, int k, double* spread) {
    const double X = xi + c * t_ref;
    long long j;
    if (dir > 0) {
      const long long j0 = static_cast<long long>(std::floor(X / h));
      j = j0 - floor_mod(j0 - k, npp);
    } else {
      const long long j0 = static_cast<long long>(std::ceil(X / h));
      j = j0 + floor_mod(k - j0, npp);
    }
    const double t0 = (double(j) * h - xi) / c;
    double sum = 0.0, lo = 1e300, hi = -1e300;
    for (int r = 0; r < replicas; ++r) {
      const double v = ring.value(t0 - r * T, j - static_cast<long long>(r) * dir * npp);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (spread) *spread = hi - lo;
    return sum / replicas;
  };
  auto mean_minus_half = [&](double xi) {
    double s = 0.0;
    for (int k = 0; k < npp; ++k) s += sample(xi, k, nullptr);
    return s / npp - 0.5;
  };
  // The y-mean decreases in xi; bracket its 1/2 crossing.
  double a = xi_min, b = xi_max;
  double fa = mean_minus_half(a), fb = mean_minus_half(b);
  if (!(fa > 0 && fb < 0)) throw NumericalError("profile does not connect 1 to 0 inside the domain");
  for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = mean_minus_half(m);
    if (fm > 0) a = m; else b = m;
  }
  const double xi_star = 0.5 * (a + b);
  ProfileLattice out;
  out.ny = npp;
  const long long jmin = static_cast<long long>(std::ceil((xi_min - xi_star) / h));
  const long long jmax = static_cast<long long>(std::floor((xi_max - xi_star) / h));
  out.xi.reserve(jmax - jmin + 1);
  out.phi.reserve((jmax - jmin + 1) * npp);
  for (long long j = jmin; j <= jmax; ++j) {
    const double xi = double(j) * h;
    out.xi.push_back(xi);
    for (int k = 0; k < npp; ++k) {
      double sp = 0.0;
      out.phi.push_back(sample(xi_star + xi, k, &sp));
      out.spread = std::max(out.spread, sp);
    }
  }
  return out;
}

double FrontSolution::operator()(double x, double y) const {
  const std::size_t m = xi.size();
  if (m < 2 || ny < 1) return std::nan("");
  const double s = (x - xi.front()) / h;
  const double yy = wrap_unit(y) * ny;
  const int k1 = int(std::floor(yy)) % ny;
  const double t = yy - std::floor(yy);
  auto edge = [&](std::size_t j) { return (1 - t) * at(j, k1) + t * at(j, (k1 + 1) % ny); };
  if (s <= 0.0) return s < -1.0 ? 1.0 : edge(0);
  if (s >= double(m - 1)) return s > double(m) ? 0.0 : edge(m - 1);
  // Cubic in xi on four y-columns, then periodic cubic in y.
  const std::ptrdiff_t i = std::ptrdiff_t(std::floor(s));
  const double u = s - double(i);
  double col[4];
  for (int q = -1; q <= 2; ++q) {
    const int k = int(floor_mod(k1 + q, ny));
    auto P = [&](std::ptrdiff_t r) {
      r = std::clamp<std::ptrdiff_t>(r, 0, std::ptrdiff_t(m) - 1);
      return at(std::size_t(r), k);
    };
    if (i < 1 || i + 2 >= std::ptrdiff_t(m)) {
      col[q + 1] = P(i) + u * (P(i + 1) - P(i));
    } else {
      const double w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
      const double w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
      const double w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
      const double w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
      col[q + 1] = w0 * P(i - 1) + w1 * P(i) + w2 * P(i + 1) + w3 * P(i + 2);
    }
  }
  if (ny < 4) return (1 - t) * col[1] + t * col[2];
  const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return w0 * col[0] + w1 * col[1] + w2 * col[2] + w3 * col[3];
}

double FrontSolution::column(double x, int k) const {
  const std::size_t m = xi.size();
  if (m < 2) return std::nan("");
  const double s = (x - xi.front()) / h;
  if (s <= 0.0) return s < -1.0 ? 1.0 : at(0, k);
  if (s >= double(m - 1)) return s > double(m) ? 0.0 : at(m - 1, k);
  const std::ptrdiff_t i = std::ptrdiff_t(std::floor(s));
  const double u = s - double(i);
  if (i < 1 || i + 2 >= std::ptrdiff_t(m)) return at(i, k) + u * (at(i + 1, k) - at(i, k));
  const double w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
  const double w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  const double w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
  const double w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
  return w0 * at(i - 1, k) + w1 * at(i, k) + w2 * at(i + 1, k) + w3 * at(i + 2, k);
}

FrontSolution compute_pulsating_front(const ProblemInstance& inst, const FrontConfig& cfg) {
  FrontSolution out;
  const double L = inst.period;
  const int npp = default_nodes_per_period(inst, cfg);
  const double dt = cfg.dt > 0 ? cfg.dt : default_dt(inst);
  const double W = cfg.half_width > 0 ? cfg.half_width : default_half_width(inst);
  if (!(cfg.t_max > 0)) throw ConfigError("t_max", "run budget must be positive");
  Grid1D grid = make_grid(inst, -W, W, npp);
  Field field = front_initial_datum(grid, cfg.datum, 0.0, cfg.datum_width);
  SolverConfig scfg;
  scfg.dt = dt;
  scfg.scheme = cfg.scheme;
  Stepper stepper(grid, inst, scfg);
  out.period = L;
  out.h = grid.h;
  out.ny = npp;
  out.dt = dt;
  out.scheme = cfg.scheme;
  out.half_width = W;

  const long long lstride = std::max<long long>(1, std::llround(0.1 / dt));
  const double width = grid.x_max() - grid.x_min();
  SnapshotRing ring;
  bool recording = false;
  long long snap_stride = 1;
  double c_hat = 0.0, T_hat = std::numeric_limits<double>::infinity();
  double t_disc = std::numeric_limits<double>::infinity();
  double next_probe = 5.0;
  int good = 0;
  double prev_defect = std::nan("");
  bool accepted = false, stationary = false;
  int max_crossings = 0;
  long long step = 0;

  auto record_level = [&]() {
    int crossings = 0;
    const double pos = level_position(grid, field.u, 0.5, &crossings);
    if (field.t > 10.0) max_crossings = std::max(max_crossings, crossings);
    out.level_t.push_back(field.t);
    out.level_x.push_back(pos);
    if (cfg.moving_window && std::isfinite(pos)) {
      const double centre = 0.5 * (grid.x_min() + grid.x_max());
      if (std::abs(pos - centre) > 0.15 * width) {
        const long long k = std::llround((pos - centre) / L);
        const long long shift = k * npp;
        std::vector<double> u(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) {
          const long long src = static_cast<long long>(i) + shift;
          u[i] = src < 0 ? 1.0 : (src >= static_cast<long long>(grid.n) ? 0.0 : field.u[src]);
        }
        field.u.swap(u);
        shift_grid(grid, k);
        stepper.rebind(grid);
      }
    }
  };
  auto level_at = [&](double t) {
    // Latest level sample at or before t.
    auto it = std::upper_bound(out.level_t.begin(), out.level_t.end(), t);
    if (it == out.level_t.begin()) return std::nan("");
    return out.level_x[std::distance(out.level_t.begin(), it) - 1];
  };

  record_level();
  while (true) {
    if (field.t >= cfg.t_max - 1e-9 || (cfg.max_steps > 0 && step >= cfg.max_steps)) break;
    stepper.step(field);
    ++step;
    if (step % lstride == 0) record_level();
    if (recording && step % snap_stride == 0) ring.push(field.t, grid.origin, field.u);
    if (field.t + 1e-9 < next_probe) continue;

    ProbeRecord pr;
    pr.t = field.t;
    const double t = field.t;
    const double w = std::min(t / 2.0, std::max(20.0, 3.0 * T_hat));
    const SpeedEstimate est = measure_speed(out.level_t, out.level_x, t - w);
    c_hat = est.c_level;
    pr.c_hat = c_hat;
    pr.residual = residual_stationary(field, grid, inst);
    pr.defect = std::nan("");
    if (t >= 100.0) pr.displacement = std::abs(level_at(t) - level_at(t - 100.0));
    else pr.displacement = std::nan("");
    if (t >= 100.0 && pr.displacement < grid.h / 10.0 && pr.residual < cfg.tol_stat) {
      stationary = true;
      out.probes.push_back(pr);
      break;
    }
    const double T_est = c_hat != 0.0 ? L / std::abs(c_hat) : std::numeric_limits<double>::infinity();
    const bool movable = T_est < cfg.t_max / 4.0;
    if (!recording) {
      if (movable) t_disc = std::max(20.0 * L / std::abs(c_hat), 50.0);
      if (movable && t >= t_disc) {
        T_hat = T_est;
        snap_stride = std::max<long long>(1, static_cast<long long>(std::floor(T_hat / (npp * dt))));
        const double spacing = snap_stride * dt;
        ring.set_capacity(static_cast<std::size_t>(
                              std::ceil(1.4 * (cfg.extract_periods + 0.6) * T_hat / spacing)) + 8);
        ring.clear();
        recording = true;
      }
    } else if (movable) {
      const double spacing = snap_stride * dt;
      const int dir = c_hat > 0 ? 1 : -1;
      const PeriodMatch pm =
          match_period(ring, npp, L, dir, 0.75 * T_hat, std::min(1.4 * T_hat, ring.t_back() - ring.t_front() - 2 * spacing));
      if (std::isfinite(pm.defect)) {
        pr.defect = pm.defect;
        if (pm.interior && pm.defect < cfg.tol_puls) ++good;
        else good = 0;
        const bool plateau = std::isfinite(prev_defect) && pm.defect > 0.5 * prev_defect;
        out.pulsating_error_prev = prev_defect;
        out.pulsating_error = pm.defect;
        prev_defect = pm.defect;
        if (pm.interior) {
          T_hat = pm.T;
          out.estimate.c_period = pm.c_period;
          out.estimate.period_uncertainty = pm.uncertainty;
        }
        if (good >= 2 && (plateau || pm.defect < 1e-9)) accepted = true;
      }
    }
    out.probes.push_back(pr);
    if (accepted) break;
    const double spacing = snap_stride * dt;
    next_probe = t + (recording ? std::max(5.0, std::max(T_hat, 4 * spacing)) : 5.0);
  }
  if (!accepted && !stationary && good >= 2) accepted = true;
  out.steps = stepper.diagnostics().steps;
  out.excursions = stepper.diagnostics().excursions;
  out.estimate.flagged = max_crossings > 1;

  if (stationary) {
    out.status = FrontStatus::Stationary;
    out.stationary = true;
    out.speed = 0.0;
    out.stationary_residual = out.probes.back().residual;
    out.x_stat.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) out.x_stat[i] = grid.x(i);
    out.u_stat = field.u;
    out.t_end = field.t;
    out.message = "stationary front";
    return out;
  }
  if (!accepted) {
    out.status = FrontStatus::Inconclusive;
    out.t_end = field.t;
    out.stationary_residual = out.probes.empty() ? std::nan("") : out.probes.back().residual;
    std::ostringstream msg;
    msg << "budget exhausted at t=" << field.t << " (c_hat=" << c_hat
        << ", last defect=" << out.pulsating_error << ")";
    out.message = msg.str();
    return out;
  }

  const double c = out.estimate.c_period;
  const double T = L / std::abs(c);
  // Make sure the ring covers the extraction window.
  const double spacing = snap_stride * dt;
  const double need = cfg.extract_periods * T + 4 * spacing;
  ring.set_capacity(std::max(ring.size(), static_cast<std::size_t>(std::ceil(need / spacing)) + 8));
  while (ring.size() < 4 || ring.t_back() - ring.t_front() < need) {
    stepper.step(field);
    ++step;
    if (step % lstride == 0) record_level();
    if (step % snap_stride == 0) ring.push(field.t, grid.origin, field.u);
  }
  out.t_end = field.t;
  out.steps = stepper.diagnostics().steps;

  // Level-set slope over a whole number of periods ending now.
  const double avail = field.t - t_disc;
  const int K = std::max(1, std::min(40, int(std::floor(avail / T))));
  out.estimate = [&] {
    SpeedEstimate e = measure_speed(out.level_t, out.level_x, field.t - K * T);
    e.c_period = out.estimate.c_period;
    e.period_uncertainty = out.estimate.period_uncertainty;
    e.flagged = out.estimate.flagged;
    return e;
  }();
  out.speed = c;
  out.status = FrontStatus::Propagating;
  out.stationary_residual = residual_stationary(field, grid, inst);

  const double margin = 2.0 * L;
  ProfileLattice lat = extract_profile(ring, grid, c, cfg.extract_periods, margin);
  out.xi = std::move(lat.xi);
  out.phi = std::move(lat.phi);
  out.ny = lat.ny;
  out.replica_spread = lat.spread;
  try {
    const DecayFit fit = fit_decay_rates(out, 4.0 * W / 20.0);
    out.mu1_fit = fit.mu1;
    out.mu2_fit = fit.mu2;
  } catch (const Error&) {
  }
  out.message = "pulsating front accepted";
  return out;
}

IdentityReport verify_speed_identity(const FrontSolution& front, double I_fbar) {
  if (front.status != FrontStatus::Propagating || front.speed == 0.0)
    throw PreconditionError("speed identity needs a propagating front");
  const std::size_t m = front.n_xi();
  const int ny = front.ny;
  if (m < 3) throw PreconditionError("profile lattice too short");
  const double h = front.h;
  double D = 0.0;
  std::vector<double> col(m);
  for (int k = 0; k < ny; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      double d;
      if (j == 0) d = (front.at(1, k) - front.at(0, k)) / h;
      else if (j + 1 == m) d = (front.at(m - 1, k) - front.at(m - 2, k)) / h;
      else d = (front.at(j + 1, k) - front.at(j - 1, k)) / (2 * h);
      col[j] = d * d;
    }
    D += trapezoid(col, h);
  }
  D /= ny;
  if (!(D > 1e-8)) throw NumericalError("Dirichlet integral below floor; profile not converged");
  IdentityReport r;
  r.dirichlet_integral = D;
  r.c_identity = I_fbar / D;
  r.c_front = front.speed;
  r.mismatch = std::abs(r.c_identity - front.speed) / std::abs(front.speed);
  return r;
}

DecayFit fit_decay_rates(const FrontSolution& front, double boundary_margin) {
  const std::size_t m = front.n_xi();
  const int ny = front.ny;
  if (m < 8 || ny < 1) throw PreconditionError("profile lattice too short for tail fits");
  const double lo_cut = front.xi.front() + boundary_margin;
  const double hi_cut = front.xi.back() - boundary_margin;
  DecayFit out;
  double sum1 = 0, sum2 = 0, span1 = 1e300, span2 = 1e300;
  for (int k = 0; k < ny; ++k) {
    std::vector<double> xr, yr, xl, yl;
    for (std::size_t j = 0; j < m; ++j) {
      const double xi = front.xi[j];
      if (xi < lo_cut || xi > hi_cut) continue;
      const double v = front.at(j, k);
      if (xi > 0 && v >= 1e-10 && v <= 1e-3) {
        xr.push_back(xi);
        yr.push_back(std::log(v));
      }
      const double w = 1.0 - v;
      if (xi < 0 && w >= 1e-10 && w <= 1e-3) {
        xl.push_back(xi);
        yl.push_back(std::log(w));
      }
    }
    auto efold = [](const std::vector<double>& y) {
      if (y.size() < 2) return 0.0;
      const auto [a, b] = std::minmax_element(y.begin(), y.end());
      return *b - *a;
    };
    const double e1 = efold(yr), e2 = efold(yl);
    if (e1 < 3.0 || e2 < 3.0) {
      std::ostringstream msg;
      msg << "tail spans " << e1 << " / " << e2
          << " e-foldings above 1e-10; enlarge the xi-window (half_width)";
      throw PreconditionError(msg.str());
    }
    span1 = std::min(span1, e1);
    span2 = std::min(span2, e2);
    sum1 += -fit_line(xr, yr).slope;
    sum2 += fit_line(xl, yl).slope;
  }
  out.mu1 = sum1 / ny;
  out.mu2 = sum2 / ny;
  out.span1 = span1;
  out.span2 = span2;
  if (!(out.mu1 > 0 && out.mu2 > 0)) throw NumericalError("non-positive fitted tail rate");
  return out;
}

QuenchingResult classify_quenching(const ProblemInstance& inst, const FrontConfig& cfg) {
  QuenchingResult r;
  r.front = compute_pulsating_front(inst, cfg);
  r.status = r.front.status;
  r.c = r.front.speed;
  return r;
}

std::vector<SweepRecord> scan_E(const ProblemInstance& base, const std::vector<double>& Ls,
                                const FrontConfig& cfg, int workers) {
  for (std::size_t i = 1; i < Ls.size(); ++i)
    if ((Ls[i] - Ls[i - 1]) * (Ls.size() > 1 ? (Ls[1] - Ls[0]) : 1.0) <= 0)
      throw PreconditionError("L-grid must be strictly monotone");
  std::vector<SweepRecord> out(Ls.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < Ls.size();) {
      SweepRecord& rec = out[i];
      rec.L = Ls[i];
      try {
        const FrontSolution f = compute_pulsating_front(with_period(base, Ls[i]), cfg);
        rec.status = f.status;
        rec.c_level = f.status == FrontStatus::Propagating ? f.estimate.c_level : 0.0;
        rec.c_period = f.status == FrontStatus::Propagating ? f.estimate.c_period : 0.0;
        rec.uncertainty = f.estimate.uncertainty + f.estimate.period_uncertainty;
        rec.pulsating_defect = f.pulsating_error;
        rec.stationary_residual = f.stationary_residual;
        if (f.status == FrontStatus::Inconclusive) rec.error = f.message;
      } catch (const std::exception& e) {
        rec.status = FrontStatus::Inconclusive;
        rec.error = e.what();
      }
    }
  };
  const int nw = std::max(1, std::min<int>(workers, int(Ls.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  const SweepRecord* prev = nullptr;
  for (auto& rec : out) {
    if (rec.status != FrontStatus::Propagating) continue;
    if (prev) {
      // Nearby periods should give nearby speeds.
      const double tol = 10.0 * (rec.uncertainty + prev->uncertainty) +
                         0.5 * std::abs(rec.L - prev->L) / std::max(rec.L, prev->L) *
                             std::max(std::abs(rec.c_period), std::abs(prev->c_period));
      rec.continuity_ok = std::abs(rec.c_period - prev->c_period) <= tol;
    }
    prev = &rec;
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "L,classification,c_level,c_period,uncertainty,pulsating_defect,stationary_residual\n";
  for (const auto& r : records)
    os << r.L << ',' << to_string(r.status) << ',' << r.c_level << ',' << r.c_period << ','
       << r.uncertainty << ',' << r.pulsating_defect << ',' << r.stationary_residual << '\n';
  return os.str();
}

void write_profile(const std::string& path, const FrontSolution& front, int xi_stride,
                   const std::string& extra_header) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write profile " + path);
  out << std::setprecision(12);
  out << "# c=" << front.speed << " L=" << front.period << "\n";
  if (!extra_header.empty()) out << "# " << extra_header << "\n";
  out << "# columns: xi y phi\n";
  if (front.stationary) {
    for (std::size_t i = 0; i < front.x_stat.size(); i += std::max(1, xi_stride))
      out << front.x_stat[i] << ' ' << wrap_unit(front.x_stat[i] / front.period) << ' '
          << front.u_stat[i] << '\n';
  } else {
    for (std::size_t j = 0; j < front.n_xi(); j += std::max(1, xi_stride))
      for (int k = 0; k < front.ny; ++k)
        out << front.xi[j] << ' ' << double(k) / front.ny << ' ' << front.at(j, k) << '\n';
  }
  if (!out) throw Error("I/O error writing " + path);
}

ProblemInstance mirror_instance(const ProblemInstance& inst) {
  ProblemInstance m = inst;
  const auto a = inst.coeff.a, da = inst.coeff.da;
  m.coeff.a = [a](double y) { return a(-y); };
  m.coeff.da = [da](double y) { return -da(-y); };
  const auto f = inst.reaction.f, g = inst.reaction.dfdu;
  const auto th = inst.reaction.theta;
  m.reaction.f = [f](double y, double u) { return f(-y, u); };
  m.reaction.dfdu = [g](double y, double u) { return g(-y, u); };
  if (th) m.reaction.theta = [th](double y) { return th(-y); };
  m.coeff.description = "mirror of " + inst.coeff.description;
  m.reaction.description = "mirror of " + inst.reaction.description;
  return m;
}

}  // namespace pfront
