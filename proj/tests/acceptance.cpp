// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `acceptance 1 9`.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "driver.hpp"
#include "fronts.hpp"
#include "helpers.hpp"
#include "homogenize.hpp"
#include "spectral.hpp"
#include "stability.hpp"

using namespace pfront;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail: " << what << "] ";
    }
  }
};

using Criterion = std::function<void(Outcome&)>;

int workers() { return std::max(1, std::min(8, int(std::thread::hardware_concurrency()))); }

const double kC0 = 0.4 / std::sqrt(2.0);

const FrontSolution& cached_front(const std::string& key, const std::function<ProblemInstance()>& make) {
  static std::map<std::string, FrontSolution> cache;
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, compute_pulsating_front(make(), FrontConfig{})).first;
  return it->second;
}

const FrontSolution& homogeneous_front() {
  return cached_front("hom", [] { return testing::cubic_instance(0.3); });
}

ProblemInstance linear_instance(double q, double a) {
  ProblemInstance inst;
  inst.coeff = constant_coefficient(a);
  inst.reaction.f = [q](double, double u) { return q * u; };
  inst.reaction.dfdu = [q](double, double) { return q; };
  inst.reaction.theta = [](double) { return 0.5; };
  inst.reaction.gamma = -q;
  inst.reaction.lip_K = std::abs(q);
  inst.reaction.x_independent = true;
  inst.period = 1.0;
  return inst;
}

double bump(double x, double centre, double width) {
  const double s = (x - centre) / width;
  return s * s < 1.0 ? (1.0 - s * s) * (1.0 - s * s) : 0.0;
}

void c1_homogeneous_speed(Outcome& o) {
  const FrontSolution& f = homogeneous_front();
  o.require(f.status == FrontStatus::Propagating, "propagating");
  const double c0 = solve_homogenized_front(homogenized_data(testing::cubic_instance(0.3))).c0;
  o.detail << "c_level=" << f.estimate.c_level << " c_period=" << f.estimate.c_period << " c0=" << c0
           << " exact=" << kC0 << ' ';
  o.require(std::abs(f.estimate.c_level - kC0) <= 1e-2, "c_level within 1e-2");
  o.require(std::abs(f.estimate.c_period - kC0) <= 1e-2, "c_period within 1e-2");
  o.require(std::abs(c0 - kC0) <= 1e-3, "shooting c0 within 1e-3");
}

void c2_sign_law(Outcome& o) {
  for (double th : {0.3, 0.5, 0.7}) {
    for (int het = 0; het < 2; ++het) {
      const ProblemInstance inst = het ? testing::cosine_cubic(th, 1.0) : testing::cubic_instance(th);
      const double I = fbar_and_integral(inst.reaction).integral;
      const FrontSolution f = compute_pulsating_front(inst, FrontConfig{});
      o.detail << "theta=" << th << (het ? " a=2+cos" : " a=1") << ": " << to_string(f.status) << " c=" << f.speed
               << "; ";
      const std::string tag = "theta=" + std::to_string(th) + (het ? " het" : " hom");
      if (th == 0.5) {
        o.require(f.status == FrontStatus::Stationary, tag + " stationary");
      } else {
        o.require(f.status == FrontStatus::Propagating, tag + " propagating");
        o.require((f.speed > 0) == (I > 0) && f.speed != 0.0, tag + " sign");
      }
    }
  }
}

void c3_homogenization(Outcome& o) {
  const ProblemInstance inst = testing::cosine_cubic(0.3, 1.0);
  const HomogenizationSweep s = homogenization_sweep(inst, {0.8, 0.4, 0.2, 0.1}, FrontConfig{}, workers());
  const double c0 = std::sqrt(2.0 * std::sqrt(3.0)) * 0.2;
  o.detail << "c0=" << s.front0.c0 << " (closed form " << c0 << ") ";
  o.require(std::abs(s.front0.c0 - c0) < 1e-6, "c0 closed form");
  double prev_c = 1e300, prev_p = 1e300;
  for (const auto& r : s.records) {
    const double gap = std::abs(r.c_L - r.c0);
    o.detail << "L=" << r.L << " |c_L-c0|=" << gap << " profile_gap=" << r.profile_gap_L2 << "; ";
    o.require(r.status == FrontStatus::Propagating && r.error.empty(), "L=" + std::to_string(r.L) + " propagating");
    o.require(gap < prev_c, "speed gap strictly decreasing");
    o.require(r.profile_gap_L2 < prev_p, "profile gap decreasing");
    prev_c = gap;
    prev_p = r.profile_gap_L2;
  }
  o.require(!s.records.empty() && s.records.back().c_gap_rel < 0.05, "gap < 5% at L=0.1");
}

void c4_speed_identity(Outcome& o) {
  const IdentityReport h = verify_speed_identity(homogeneous_front(), 1.0 / 30.0);
  const ProblemInstance het = testing::cosine_cubic(0.3, 0.5);
  const FrontSolution& f = cached_front("het05", [] { return testing::cosine_cubic(0.3, 0.5); });
  const IdentityReport g = verify_speed_identity(f, fbar_and_integral(het.reaction).integral);
  o.detail << "homogeneous mismatch=" << h.mismatch << " heterogeneous(L=0.5) mismatch=" << g.mismatch;
  o.require(h.mismatch < 0.02, "homogeneous < 2%");
  o.require(g.mismatch < 0.05, "heterogeneous < 5%");
}

void c5_pulsating_relation(Outcome& o) {
  const std::vector<std::pair<std::string, const FrontSolution*>> fronts{
      {"homogeneous", &homogeneous_front()},
      {"a=2+cos L=1", &cached_front("het1", [] { return testing::cosine_cubic(0.3, 1.0); })},
      {"a=2+cos L=0.5", &cached_front("het05", [] { return testing::cosine_cubic(0.3, 0.5); })},
      {"xin lambda=2", &cached_front("xin2", [] { return make_xin_example(0.2, 2.0, 0.3); })}};
  for (const auto& [name, f] : fronts) {
    o.detail << name << ": " << f->pulsating_error_prev << ", " << f->pulsating_error << "; ";
    o.require(f->status == FrontStatus::Propagating, name + " accepted");
    o.require(f->pulsating_error < 1e-3 && f->pulsating_error_prev < 1e-3, name + " defect");
  }
}

void c6_eigen_closed_forms(Outcome& o) {
  double worst_d = 0.0;
  for (double a : {1.0, 2.0}) {
    for (double R : {2.0, 5.0}) {
      const ProblemInstance inst = linear_instance(0.21, a);
      const EigenPair ep = dirichlet_principal_eigen(inst, [](double) { return 0.0; }, R, 2048);
      worst_d = std::max(worst_d, std::abs(ep.lambda - (0.21 - a * std::pow(kPi / (2 * R), 2))));
    }
  }
  const ProblemInstance cubic = testing::cubic_instance(0.3);
  const EigenPair cd = dirichlet_principal_eigen(cubic, [](double) { return 0.3; }, 5.0, 2048);
  worst_d = std::max(worst_d, std::abs(cd.lambda - (0.21 - std::pow(kPi / 10.0, 2))));
  double worst_p = 0.0;
  for (double v : {0.0, 0.3, 1.0}) {
    const double q = cubic.dfdu_L(0.0, v);
    worst_p = std::max(worst_p, std::abs(periodic_principal_eigen(cubic, std::vector<double>(64, v)).lambda - q));
  }
  o.detail << "dirichlet err=" << worst_d << " periodic err=" << worst_p << ' ';
  o.require(worst_d <= 1e-6, "dirichlet 1e-6");
  o.require(worst_p <= 1e-10, "periodic 1e-10");

  const std::vector<double> Rs{1, 2, 4, 8, 16};
  struct Case {
    std::string name;
    ProblemInstance inst;
    StateFn u;
  };
  const std::vector<Case> cases{
      {"linear", linear_instance(-1.0, 1.0), [](double) { return 0.0; }},
      {"cubic theta", cubic, [](double) { return 0.3; }},
      {"cubic zero", cubic, [](double) { return 0.0; }},
      {"a=2+cos state", testing::cosine_cubic(0.3, 1.0), [](double x) { return 0.3 + 0.2 * std::sin(kTwoPi * x); }}};
  for (const auto& c : cases) {
    const StabilityTrace tr = stability_limit(c.inst, c.u, Rs, 0.01, 64);
    bool strict = true;
    for (std::size_t i = 1; i < tr.lambda.size(); ++i) strict &= tr.lambda[i] > tr.lambda[i - 1];
    o.require(strict, c.name + " strictly increasing");
  }
}

void c7_unstable_intermediate(Outcome& o) {
  auto r = make_cubic([](double y) { return 0.5 + 0.1 * std::cos(kTwoPi * y); }, 0.05, 0.05);
  const ProblemInstance osc = make_instance(constant_coefficient(1.0), r, 0.1);
  const ProblemInstance large = testing::cubic_instance(0.3, 1.0, 10.0);
  const HomogenizedData hd = homogenized_data(osc);
  o.require(!hd.theta_bar.empty() && hd.fbar_prime(hd.theta_bar[0]) > 0, "fbar'(theta_bar) > 0");
  for (const auto& [name, inst] : {std::pair{std::string("theta=0.5+0.1cos L=0.1"), osc},
                                   std::pair{std::string("theta=0.3 L=10"), large}}) {
    const SteadyStateSearch s = find_periodic_steady_states(inst, default_seeds(inst));
    o.detail << name << ": " << s.states.size() << " state(s), lambda1 =";
    o.require(!s.states.empty(), name + " found a state");
    for (const auto& st : s.states) {
      o.detail << ' ' << st.lambda1;
      o.require(st.lambda1 > 0, name + " lambda1 > 0");
    }
    o.detail << "; ";
  }
}

void c8_decay_rates(Outcome& o) {
  const ProblemInstance lin = linear_instance(-0.3, 2.0);
  const DecayRoot m = decay_root_mu(lin, 0.0, DecayDirection::Right, DecayPotential::Margin);
  o.detail << "sqrt(gamma/d) err=" << std::abs(m.mu - std::sqrt(0.15)) << "; ";
  o.require(std::abs(m.mu - std::sqrt(0.15)) <= 1e-6, "constant-coefficient root");
  for (double th : {0.3, 0.4}) {
    const ProblemInstance inst = testing::cubic_instance(th);
    const FrontSolution& f = th == 0.3 ? homogeneous_front()
                                       : cached_front("hom04", [] { return testing::cubic_instance(0.4); });
    const DecayFit fit = fit_decay_rates(f);
    const double r = decay_root_mu(inst, f.speed, DecayDirection::Right, DecayPotential::Linearized).mu;
    const double l = decay_root_mu(inst, f.speed, DecayDirection::Left, DecayPotential::Linearized).mu;
    o.detail << "theta=" << th << " fit " << fit.mu1 << '/' << fit.mu2 << " roots " << r << '/' << l << "; ";
    o.require(std::abs(fit.mu1 - r) / r < 0.1, "right tail within 10%");
    o.require(std::abs(fit.mu2 - l) / l < 0.1, "left tail within 10%");
  }
}

void c9_stability(Outcome& o) {
  const ProblemInstance inst = testing::cubic_instance(0.3);
  const FrontSolution& f = homogeneous_front();
  const double k = 1.0 / std::sqrt(2.0);
  const std::vector<std::pair<std::string, StateFn>> data{
      {"shifted", [k](double x) { return 1.0 / (1.0 + std::exp(k * (x - 3.0))); }},
      {"perturbed", [&f](double x) { return std::clamp(f(x, x) + 0.05 * bump(x, 2.0, 2.0), 0.0, 1.0); }},
      {"step", [](double x) { return x < 0 ? 1.0 : 0.0; }}};
  std::vector<double> mus;
  for (const auto& [name, g] : data) {
    const StabilityReport r = global_stability_experiment(inst, f, g);
    o.detail << name << ": mu=" << r.mu_fit << " final=" << r.final_error << "; ";
    o.require(r.accepted && r.mu_fit > 0 && r.final_error < 1e-4, name + " accepted");
    mus.push_back(r.mu_fit);
  }
  for (std::size_t i = 0; i < mus.size(); ++i)
    for (std::size_t j = i + 1; j < mus.size(); ++j)
      o.require(std::abs(mus[i] - mus[j]) <= 0.2 * std::max(mus[i], mus[j]), "pairwise mu within 20%");

  const SteadyStateSearch ss = find_periodic_steady_states(inst, default_seeds(inst));
  if (ss.states.empty()) {
    o.require(false, "steady states for initialv2");
    return;
  }
  auto g2 = [](double x) { return x < 0 ? 0.9 - 0.55 * bump(x, -10.0, 4.0) : 0.1; };
  bool rejected = false;
  try {
    global_stability_experiment(inst, f, g2);
  } catch (const PreconditionError&) {
    rejected = true;
  }
  o.require(rejected, "initialv2 datum violates the front end conditions");
  const StabilityReport r2 = initialv2_experiment(inst, f, ss.states, ss.states[0], ss.states[0], g2);
  o.detail << "initialv2: mu=" << r2.mu_fit << " entry=" << r2.t_entry << " final=" << r2.final_error;
  o.require(r2.accepted && r2.mu_fit > 0, "initialv2 accepted");
}

void c10_supersub(Outcome& o) {
  const ProblemInstance inst = testing::cubic_instance(0.3);
  const double c = homogeneous_front().speed;
  const SuperSubSolution sup = build_supersub(inst, SupersubKind::Super, inst.reaction.lip_K, c);
  const SuperSubSolution sub = build_supersub(inst, SupersubKind::Sub, inst.reaction.lip_K, c);
  o.detail << "min L(w+)=" << sup.defect_min << " max L(w-)=" << sub.defect_max;
  o.require(sup.defect_min >= -1e-8, "super defect");
  o.require(sub.defect_max <= 1e-8, "sub defect");
}

void c11_spectrum(Outcome& o) {
  const SpectrumSummary s =
      front_poincare_spectrum(testing::cubic_instance(0.3), homogeneous_front(), 400, 20.0, 20, workers());
  o.detail << "nodes=" << s.nodes << " |lambda-1|=" << s.unit_gap << " cosine=" << s.cosine
           << " second=" << s.second_modulus << " ess_radius=" << s.ess_radius << " flagged=" << s.flagged
           << " of " << s.eigenvalues.size() << " moduli:";
  for (const auto& z : s.eigenvalues) o.detail << ' ' << std::abs(z);
  o.require(s.nodes <= 402, "coarse grid");
  o.require(s.unit_gap <= 1e-2, "eigenvalue near 1");
  o.require(s.cosine > 0.99, "eigenvector matches d_xi phi");
  o.require(s.second_modulus < 1.0, "second modulus < 1");
  o.require(s.flagged >= 0 && s.flagged <= int(s.eigenvalues.size()), "flagged count finite");
}

void c12_quenching(Outcome& o) {
  const QuenchScan q = quench_scan(0.2, 0.3, {0, 1, 2, 3, 4}, FrontConfig{}, workers());
  for (const auto& r : q.records) {
    o.detail << "lambda=" << r.lambda << ' ' << to_string(r.status) << " c=" << r.c << "; ";
    o.require(r.error.empty(), "record error");
    if (r.status == FrontStatus::Stationary)
      o.require(r.stationary_residual < 1e-6, "stationary residual");
  }
  o.require(q.nonincreasing, "|c| nonincreasing");
  o.require(q.stationary_consistent, "stationary records consistent");
}

void c13_comparison(Outcome& o) {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::vector<ProblemInstance> insts{testing::cosine_cubic(0.3, 1.0), make_xin_example(0.2, 2.0, 0.3),
                                           testing::cubic_instance(0.6, 1.0, 0.5)};
  SolverConfig cfg;
  double worst = 0.0;
  for (int pair = 0; pair < 50; ++pair) {
    const ProblemInstance& inst = insts[pair % insts.size()];
    const Grid1D g = make_grid(inst, -8, 8, 32);
    Field a, b;
    a.u.resize(g.n);
    b.u.resize(g.n);
    const double spread = 0.5 * U(rng);
    for (std::size_t i = 0; i < g.n; ++i) {
      a.u[i] = U(rng);
      b.u[i] = std::min(1.0, a.u[i] + spread * U(rng));
    }
    a.u.front() = b.u.front() = 1.0;
    a.u.back() = b.u.back() = 0.0;
    Stepper sa(g, inst, cfg), sb(g, inst, cfg);
    for (int k = 0; k < 250; ++k) {
      sa.step(a);
      sb.step(b);
      for (std::size_t i = 0; i < g.n; ++i) worst = std::min(worst, b.u[i] - a.u[i]);
    }
  }
  o.detail << "50 pairs, min(u2-u1)=" << worst;
  o.require(worst >= -1e-10, "ordering preserved");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Criterion>> criteria{
      {"homogeneous speed oracle", c1_homogeneous_speed},
      {"sign law", c2_sign_law},
      {"homogenization", c3_homogenization},
      {"speed integral identity", c4_speed_identity},
      {"pulsating relation", c5_pulsating_relation},
      {"eigen closed forms", c6_eigen_closed_forms},
      {"instability of intermediate states", c7_unstable_intermediate},
      {"decay-rate consistency", c8_decay_rates},
      {"exponential stability", c9_stability},
      {"super/subsolution defects", c10_supersub},
      {"period-map spectrum", c11_spectrum},
      {"quenching trend", c12_quenching},
      {"discrete comparison principle", c13_comparison}};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s: %s (%.1fs) %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
