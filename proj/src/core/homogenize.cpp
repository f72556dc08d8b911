#include "homogenize.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <iomanip>
#include <sstream>
#include <thread>

#include <boost/numeric/odeint.hpp>

namespace pfront {

namespace ode = boost::numeric::odeint;

double decay_root_right(double a, double c, double q) {
  return (c + std::sqrt(c * c - 4.0 * a * q)) / (2.0 * a);
}

double decay_root_left(double a, double c, double q) {
  return (-c + std::sqrt(c * c - 4.0 * a * q)) / (2.0 * a);
}

namespace {

using State = std::array<double, 2>;

enum class Outcome { Overshoot, TurnBack, Stall };

struct Shot {
  Outcome outcome = Outcome::Stall;
  double crossing_slope = 0.0;  // phi' where phi hits 0 (overshoot only)
  double max_slope = 0.0;
  std::vector<double> xi, phi, dphi;
};

Shot shoot(const HomogenizedData& h, double c, const ShootingConfig& cfg, bool record) {
  const double aH = h.a_H;
  const auto& fbar = h.fbar;
  auto rhs = [aH, c, &fbar](const State& s, State& d, double) {
    d[0] = s[1];
    d[1] = -(c * s[1] + fbar(s[0])) / aH;
  };
  const double lam2 = decay_root_left(aH, c, h.fbar_prime(1.0));
  State s{1.0 - cfg.eps, -cfg.eps * lam2};
  auto stepper = ode::make_dense_output(cfg.ode_tol, cfg.ode_tol, ode::runge_kutta_dopri5<State>());
  stepper.initialize(s, 0.0, 1e-3);
  Shot shot;
  double next_sample = 0.0;
  if (record) {
    shot.xi.push_back(0.0);
    shot.phi.push_back(s[0]);
    shot.dphi.push_back(s[1]);
    next_sample = cfg.dxi;
  }
  while (true) {
    stepper.do_step(std::ref(rhs));
    const double t1 = stepper.current_time();
    const State& cur = stepper.current_state();
    shot.max_slope = std::max(shot.max_slope, std::abs(cur[1]));
    const bool over = cur[0] < 0.0;
    const bool back = cur[1] >= 0.0;
    double t_stop = t1;
    if (over || back) {
      // Locate the event inside the last step.
      double lo = stepper.previous_time(), hi = t1;
      State tmp;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, tmp);
        const bool hit = over ? tmp[0] < 0.0 : tmp[1] >= 0.0;
        (hit ? hi : lo) = mid;
      }
      t_stop = hi;
      stepper.calc_state(hi, tmp);
      if (over) shot.crossing_slope = tmp[1];
    }
    if (record) {
      State tmp;
      while (next_sample <= t_stop) {
        stepper.calc_state(next_sample, tmp);
        shot.xi.push_back(next_sample);
        shot.phi.push_back(tmp[0]);
        shot.dphi.push_back(tmp[1]);
        next_sample += cfg.dxi;
      }
    }
    if (over) {
      shot.outcome = Outcome::Overshoot;
      return shot;
    }
    if (back) {
      shot.outcome = Outcome::TurnBack;
      return shot;
    }
    if (t1 > cfg.xi_cap) {
      shot.outcome = Outcome::Stall;
      return shot;
    }
  }
}

bool odd_symmetric(const HomogenizedData& h) {
  double scale = 0.0, worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double u = i / 200.0;
    scale = std::max(scale, std::abs(h.fbar(u)));
    worst = std::max(worst, std::abs(h.fbar(u) + h.fbar(1.0 - u)));
  }
  return worst <= 1e-12 * std::max(scale, 1e-300);
}

}  // namespace

double HomogenizedFront::phi0(double x) const {
  if (xi.empty()) return std::nan("");
  if (x <= xi.front()) return 1.0 - A2 * std::exp(lambda2 * x);
  if (x >= xi.back()) return A1 * std::exp(-lambda1 * x);
  return interp_cubic(phi, (x - xi.front()) / dxi);
}

double HomogenizedFront::dphi0(double x) const {
  if (xi.empty()) return std::nan("");
  if (x <= xi.front()) return -A2 * lambda2 * std::exp(lambda2 * x);
  if (x >= xi.back()) return -A1 * lambda1 * std::exp(-lambda1 * x);
  const double s = (x - xi.front()) / dxi;
  const double d = 1e-3;
  return (interp_cubic(phi, s + d) - interp_cubic(phi, s - d)) / (2 * d * dxi);
}

HomogenizedFront solve_homogenized_front(const HomogenizedData& homog, const ShootingConfig& cfg) {
  const double fp0 = homog.fbar_prime(0.0), fp1 = homog.fbar_prime(1.0);
  if (!(fp0 < 0.0 && fp1 < 0.0)) throw PreconditionError("need fbar'(0) < 0 and fbar'(1) < 0");
  if (homog.theta_bar.empty()) throw PreconditionError("fbar has no interior zero");
  if (!(homog.a_H > 0)) throw PreconditionError("a_H must be positive");
  HomogenizedFront out;
  out.a_H = homog.a_H;
  double c_final;
  double width = 0.0;
  if (odd_symmetric(homog)) {
    out.symmetric = true;
    c_final = 0.0;
  } else {
    double fmax = 0.0;
    for (int i = 0; i <= 1000; ++i) fmax = std::max(fmax, std::abs(homog.fbar(i / 1000.0)));
    double cmax = 2.0 * std::sqrt(fmax) * std::sqrt(homog.a_H);
    bool bracketed = false;
    for (int k = 0; k <= 3 && !bracketed; ++k) {
      bracketed = shoot(homog, -cmax, cfg, false).outcome == Outcome::Overshoot &&
                  shoot(homog, cmax, cfg, false).outcome != Outcome::Overshoot;
      if (!bracketed) cmax *= 2.0;
    }
    if (!bracketed) throw NoConnectionError("no sign change of the shooting functional on [-c_max, c_max]");
    double lo = -cmax, hi = cmax;
    while (hi - lo > cfg.tol_c) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (shoot(homog, mid, cfg, false).outcome == Outcome::Overshoot ? lo : hi) = mid;
    }
    const Shot under = shoot(homog, lo, cfg, false);
    if (std::abs(under.crossing_slope) > 1e-2 * under.max_slope)
      throw NoConnectionError("trajectory does not reach 0; fbar has no 1-to-0 connection");
    c_final = 0.5 * (lo + hi);
    width = hi - lo;
  }
  out.c0 = c_final;
  out.shoot_residual = width;
  out.lambda1 = decay_root_right(homog.a_H, c_final, fp0);
  out.lambda2 = decay_root_left(homog.a_H, c_final, fp1);

  const Shot shot = shoot(homog, c_final, cfg, true);
  // Keep the trajectory until it leaves the heteroclinic near 0.
  std::size_t cut = shot.phi.size();
  for (std::size_t i = 0; i < shot.phi.size(); ++i)
    if (shot.phi[i] < 1e-6 || shot.dphi[i] >= 0.0) {
      cut = i;
      break;
    }
  if (cut < 8) throw NumericalError("homogenized profile too short");
  std::size_t ih = 0;
  while (ih + 1 < cut && shot.phi[ih + 1] > 0.5) ++ih;
  const double s = (shot.phi[ih] - 0.5) / (shot.phi[ih] - shot.phi[ih + 1]);
  const double xi_half = shot.xi[ih] + s * cfg.dxi;
  out.dxi = cfg.dxi;
  out.xi.resize(cut);
  out.phi.assign(shot.phi.begin(), shot.phi.begin() + cut);
  for (std::size_t i = 0; i < cut; ++i) out.xi[i] = shot.xi[i] - xi_half;
  // Refine the half-level position with the cubic interpolant.
  {
    double a = double(ih), b = double(ih + 1);
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      (interp_cubic(out.phi, m) > 0.5 ? a : b) = m;
    }
    const double off = out.xi.front() + 0.5 * (a + b) * out.dxi;
    for (auto& x : out.xi) x -= off;
  }

  // Tail fits and amplitudes.
  std::vector<double> xr, yr, xl, yl;
  for (std::size_t i = 0; i < cut; ++i) {
    const double v = out.phi[i];
    if (v >= 1e-5 && v <= 1e-3) {
      xr.push_back(out.xi[i]);
      yr.push_back(std::log(v));
    }
    const double w = 1.0 - v;
    if (w >= 1.01 * cfg.eps && w <= 1e-3) {
      xl.push_back(out.xi[i]);
      yl.push_back(std::log(w));
    }
  }
  if (xr.size() > 2) out.lambda1_fit = -fit_line(xr, yr).slope;
  if (xl.size() > 2) out.lambda2_fit = fit_line(xl, yl).slope;
  auto amplitude = [](const std::vector<double>& x, const std::vector<double>& logv, double rate) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += logv[i] + rate * x[i];
    return x.empty() ? 0.0 : std::exp(acc / double(x.size()));
  };
  out.A1 = amplitude(xr, yr, out.lambda1);
  out.A2 = amplitude(xl, yl, -out.lambda2);
  return out;
}

DecayExponents homogenized_decay_rates(const HomogenizedFront& front, const HomogenizedData& homog) {
  DecayExponents d;
  const double fp0 = homog.fbar_prime(0.0), fp1 = homog.fbar_prime(1.0);
  if (!(fp0 < 0.0 && fp1 < 0.0)) throw PreconditionError("need fbar'(0) < 0 and fbar'(1) < 0");
  d.lambda1 = decay_root_right(homog.a_H, front.c0, fp0);
  d.lambda2 = decay_root_left(homog.a_H, front.c0, fp1);
  d.fit1 = front.lambda1_fit;
  d.fit2 = front.lambda2_fit;
  d.gap1 = std::abs(d.fit1 - d.lambda1) / d.lambda1;
  d.gap2 = std::abs(d.fit2 - d.lambda2) / d.lambda2;
  return d;
}

Alignment align_profiles(const FrontSolution& phiL, const HomogenizedFront& phi0, double search) {
  const std::size_t m = phiL.n_xi();
  const int ny = phiL.ny;
  if (m < 3 || ny < 1) throw PreconditionError("empty profile lattice");
  const double h = phiL.h;
  auto gap2 = [&](double s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double ref = phi0.phi0(phiL.xi[j] - s);
      double row = 0.0;
      for (int k = 0; k < ny; ++k) {
        const double d = phiL.at(j, k) - ref;
        row += d * d;
      }
      acc += row;
    }
    return acc * h / ny;
  };
  // Coarse scan, then golden section around the best cell.
  const int scan = 40;
  double best_s = -search, best_v = gap2(-search);
  for (int i = 1; i <= scan; ++i) {
    const double s = -search + 2 * search * i / scan;
    const double v = gap2(s);
    if (v < best_v) {
      best_v = v;
      best_s = s;
    }
  }
  const double cell = 2 * search / scan;
  const GoldenResult g = golden_section(gap2, best_s - cell, best_s + cell, 1e-9, 200);
  Alignment a;
  a.shift = g.argmin;
  a.gap = std::sqrt(std::max(g.value, 0.0));
  double acc = 0.0;
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const double ref = phi0.dphi0(phiL.xi[j] - a.shift);
    for (int k = 0; k < ny; ++k) {
      const double d = (phiL.at(j + 1, k) - phiL.at(j - 1, k)) / (2 * h) - ref;
      acc += d * d;
    }
  }
  a.grad_gap = std::sqrt(acc * h / ny);
  return a;
}

HomogenizationSweep homogenization_sweep(const ProblemInstance& base, const std::vector<double>& Ls,
                                         const FrontConfig& cfg, int workers) {
  for (std::size_t i = 1; i < Ls.size(); ++i)
    if (!(Ls[i] < Ls[i - 1])) throw PreconditionError("L list must be strictly decreasing");
  HomogenizationSweep out;
  const HomogenizedData hd = homogenized_data(base);
  out.front0 = solve_homogenized_front(hd);
  const double c0 = out.front0.c0;
  if (out.front0.symmetric || std::abs(c0) <= 1e-8)
    throw PreconditionError("homogenized speed is zero; use the scan-e stationary branch");
  out.records.resize(Ls.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < Ls.size();) {
      HomogenizationRecord& r = out.records[i];
      r.L = Ls[i];
      r.c0 = c0;
      try {
        const FrontSolution f = compute_pulsating_front(with_period(base, Ls[i]), cfg);
        r.status = f.status;
        if (f.status != FrontStatus::Propagating) {
          r.error = f.message;
          continue;
        }
        r.c_L = f.speed;
        r.c_gap_rel = std::abs(f.speed - c0) / std::abs(c0);
        const Alignment al = align_profiles(f, out.front0);
        r.profile_gap_L2 = al.gap;
        r.shift = al.shift;
      } catch (const std::exception& e) {
        r.status = FrontStatus::Inconclusive;
        r.error = e.what();
      }
    }
  };
  const int nw = std::max(1, std::min<int>(workers, int(Ls.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  bool cdec = !out.records.empty(), pdec = !out.records.empty();
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    if (out.records[i].status != FrontStatus::Propagating) cdec = pdec = false;
    if (i == 0) continue;
    cdec = cdec && out.records[i].c_gap_rel < out.records[i - 1].c_gap_rel;
    pdec = pdec && out.records[i].profile_gap_L2 < out.records[i - 1].profile_gap_L2;
  }
  out.c_gap_decreasing = cdec;
  out.profile_gap_decreasing = pdec;
  return out;
}

std::string homogenization_csv(const std::vector<HomogenizationRecord>& records) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "L,c_L,c0,c_gap_rel,profile_gap_L2,shift\n";
  for (const auto& r : records)
    os << r.L << ',' << r.c_L << ',' << r.c0 << ',' << r.c_gap_rel << ',' << r.profile_gap_L2 << ','
       << r.shift << '\n';
  return os.str();
}

}  // namespace pfront
