#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "fronts.hpp"
#include "model.hpp"
#include "pde.hpp"
#include "spectral.hpp"

namespace pfront {

/// Frame xi = x - c t on a uniform grid with Dirichlet ends. One frame
/// period T = L / |c| is an integer number of steps.
struct ComovingFrame {
  double c = 0.0;
  double period = 1.0;  // L
  double T = 0.0;
  double dt = 0.0;
  int steps_per_period = 0;
  double xi0 = 0.0;
  double h = 0.0;
  std::size_t n = 0;
  double u_left = 1.0, u_right = 0.0;

  double xi(std::size_t i) const { return xi0 + double(i) * h; }
};

/// dt_target <= 0 picks min(0.02, 0.45 h/|c|, 0.45/K). Throws ConfigError
/// when |c| dt / h > 0.9.
ComovingFrame make_frame(const ProblemInstance& inst, double c, double half_width, double h,
                         double dt_target = 0.0);

/// Frame matched to a computed front: same h, half-width inside the lattice.
ComovingFrame front_frame(const ProblemInstance& inst, const FrontSolution& front,
                          double half_width = 0.0, double h = 0.0, double dt_target = 0.0);

// V^tau(t, xi) = phi(xi + tau, (xi + c t) / L).
double front_translate(const FrontSolution& front, double tau, double t, double xi);
std::vector<double> sample_translate(const ComovingFrame& frame, const FrontSolution& front,
                                     double tau, double t = 0.0);

/// IMEX step of v_t = (a(xi+ct) v_xi)_xi + c v_xi + f(xi+ct, v): implicit
/// diffusion with faces frozen at t + dt/2, upwind explicit transport,
/// explicit reaction.
class FrameStepper {
 public:
  FrameStepper(const ComovingFrame& frame, const ProblemInstance& inst);
  void step(std::vector<double>& v, double t);

  // Factor the implicit part at time t (faces at t + dt/2).
  void factor(double t);
  // Solve (I - dt A) x = r in place on interior nodes with current factors.
  void solve(double* r) const;
  // Explicit part for the variational equation around v at time t, zero ends.
  void linear_explicit(const double* w, const std::vector<double>& dfdu, double* out) const;
  const std::vector<double>& face_a() const { return face_; }

 private:
  const ComovingFrame* fr_;
  const ProblemInstance* inst_;
  std::vector<double> face_, cp_, den_, sub_, rhs_;
};

using FrameCallback = std::function<void(double t, const std::vector<double>& v)>;

/// Evolve from g at time t0 until t0 + duration (rounded to whole steps).
std::vector<double> comoving_evolve(const ComovingFrame& frame, const ProblemInstance& inst,
                                    std::vector<double> g, double t0, double duration,
                                    const FrameCallback& cb = {});

/// One frame period starting at frame time t0.
std::vector<double> poincare_map(const ComovingFrame& frame, const ProblemInstance& inst,
                                 std::vector<double> g, double t0 = 0.0);

struct StabilityConfig {
  double t_max = 200.0;
  double probe_dt = 1.0;
  int tau_window = 10;       // probes in the stabilisation test
  double fit_upper = 1e-2;   // fit starts once the error is below this
  double floor_factor = 20;  // fit stops at floor_factor times the noise floor
  int min_fit_points = 6;
  double final_tol = 1e-4;
  double zone = 0.1;         // fraction of the domain checked at each end
};

struct StabilityReport {
  double tau_g = std::nan("");
  double mu_fit = std::nan("");
  double fit_t0 = 0.0, fit_t1 = 0.0;
  int fit_points = 0;
  double noise_floor = 0.0;
  bool tau_stable = false;
  bool at_floor = false;
  bool accepted = false;
  double final_error = std::nan("");
  double t_entry = 0.0;  // time spent before the front-like end conditions held
  std::vector<double> t, tau, sup_error;
  std::vector<std::complex<double>> spectrum;
  std::string message;
};

/// Lab-frame evolution of g on the front's grid and time step; probes
/// fit the time shift tau with u(t, x) ~ phi(x - c(t + tau), x/L).
StabilityReport global_stability_experiment(const ProblemInstance& inst, const FrontSolution& front,
                                            const StateFn& g, const StabilityConfig& cfg = {});

/// Intermediate steady states must all be unstable; g is checked against
/// u_minus on the left and u_plus on the right.
StabilityReport initialv2_experiment(const ProblemInstance& inst, const FrontSolution& front,
                                     const std::vector<SteadyState>& states,
                                     const SteadyState& u_minus, const SteadyState& u_plus,
                                     const StateFn& g, const StabilityConfig& cfg = {});

// Periodic linear interpolation of a steady state at x.
double steady_value(const SteadyState& s, double x);

enum class SupersubKind { Super, Sub };

struct SuperSubSolution {
  SupersubKind kind = SupersubKind::Super;
  double c = 0.0;        // frame speed
  double c_drift = 0.0;  // c+ or c-
  double gamma = 0.0, delta = 0.0, K = 0.0;
  double a_norm = 0.0, da_norm = 0.0;
  double period = 1.0;
  std::vector<double> t, xi;   // sample lattice
  std::vector<double> defect;  // defect[i * xi.size() + j]
  double defect_min = 0.0, defect_max = 0.0;
  // Squeeze at t = 0 against the translate V^0 after the normalising shift.
  double squeeze_shift = 0.0;
  double squeeze_gap = 0.0;  // min over xi of the signed margin (>= 0 is ok)
  bool squeeze_ok = false;
  bool verified = false;

  double w1(double t) const;
  double w2(double t) const;
  double w(double t, double xi) const;
  static double eta(double s);
};

/// K must be at least the Lipschitz constant of f and d_u f.
SuperSubSolution build_supersub(const ProblemInstance& inst, SupersubKind kind, double K, double c,
                                double tol = 1e-8, int nt = 64, int nxi = 64, double xi_max = 40.0);

// Adds the squeeze check against V^0(0, .) of a computed front.
void squeeze_check(SuperSubSolution& s, const FrontSolution& front);

struct SpectrumSummary {
  std::vector<std::complex<double>> eigenvalues;  // n_modes by decreasing modulus
  double T = 0.0;
  int nodes = 0;
  double unit_gap = std::nan("");  // |lambda - 1| for the eigenvalue nearest 1
  double cosine = std::nan("");    // eigenvector vs discrete d_xi v0
  double second_modulus = std::nan("");
  double ess_radius = 0.0;         // exp(-gamma T / 2)
  int flagged = 0;                 // other modes above ess_radius + margin
  bool unit_ok = false, second_ok = false;
};

/// Dense linearisation of the frame period map around the discrete orbit of
/// v0 (interior nodes), built column block by column block.
SpectrumSummary poincare_spectrum(const ComovingFrame& frame, const ProblemInstance& inst,
                                  const std::vector<double>& v0, int n_modes = 20,
                                  int workers = 1, double unit_tol = 1e-2, double margin = 0.05);

/// Coarse frame around a computed front: n_nodes over [-half_width, half_width].
SpectrumSummary front_poincare_spectrum(const ProblemInstance& inst, const FrontSolution& front,
                                        int n_nodes = 400, double half_width = 20.0,
                                        int n_modes = 20, int workers = 1);

std::string stability_report_json(const StabilityReport& r);

}  // namespace pfront
