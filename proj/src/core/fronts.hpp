#pragma once

#include <deque>
#include <string>
#include <vector>

#include "model.hpp"
#include "pde.hpp"

namespace pfront {

enum class FrontStatus { Propagating, Stationary, Inconclusive };
const char* to_string(FrontStatus s);

struct FrontConfig {
  int nodes_per_period = 64;   // lower bound, raised so that h <= h_max
  double h_max = 0.05;
  double dt = 0.0;             // 0: min(0.02, 0.4/K)
  Scheme scheme = Scheme::Imex;
  DatumStyle datum = DatumStyle::Tanh;
  double datum_width = 1.0;
  double half_width = 0.0;     // 0: from the decay pre-estimate
  double tol_puls = 1e-3;
  double tol_stat = 1e-6;
  double t_max = 1000.0;       // run budget in simulated time
  long long max_steps = 0;     // 0: unlimited
  bool moving_window = true;
  int extract_periods = 2;     // replicas averaged in extract_profile
};

// Level-set trajectory fit.
struct SpeedEstimate {
  double c_level = 0.0;
  double c_period = 0.0;
  double uncertainty = 0.0;
  double period_uncertainty = 0.0;
  double t_begin = 0.0, t_end = 0.0;
  int samples = 0;
  bool flagged = false;  // multiple level crossings seen
};

/// Regression of positions on times after t_discard.
SpeedEstimate measure_speed(std::span<const double> t, std::span<const double> x,
                            double t_discard = 0.0);

/// Recent solution history in absolute node numbering with cubic
/// interpolation in time (non-uniform sample times allowed).
class SnapshotRing {
 public:
  SnapshotRing(double u_left = 1.0, double u_right = 0.0) : u_left_(u_left), u_right_(u_right) {}

  void set_capacity(std::size_t cap) { capacity_ = std::max<std::size_t>(cap, 4); trim(); }
  void push(double t, long long origin, std::span<const double> u);
  void clear() { snaps_.clear(); }

  std::size_t size() const { return snaps_.size(); }
  double t_front() const { return snaps_.front().t; }
  double t_back() const { return snaps_.back().t; }
  double time(std::size_t s) const { return snaps_[s].t; }
  long long origin(std::size_t s) const { return snaps_[s].origin; }
  std::size_t nodes(std::size_t s) const { return snaps_[s].u.size(); }

  // Node value of snapshot s; boundary values outside the stored window.
  double at(std::size_t s, long long j) const;

  struct Stencil {
    std::size_t first = 0;
    int count = 0;
    double w[4] = {0, 0, 0, 0};
  };
  Stencil stencil(double t) const;
  double value(const Stencil& st, long long j) const;
  double value(double t, long long j) const { return value(stencil(t), j); }

 private:
  void trim();
  struct Snap {
    double t;
    long long origin;
    std::vector<double> u;
  };
  std::deque<Snap> snaps_;
  std::size_t capacity_ = 64;
  double u_left_, u_right_;
};

struct PeriodMatch {
  double T = 0.0;
  double defect = 0.0;
  double t0 = 0.0;
  double c_period = 0.0;
  double uncertainty = 0.0;
  bool interior = false;  // minimiser not on the bracket edge
};

/// Minimise sup_j |u(t0+T, j + sign*npp) - u(t0, j)| over T in [T_lo, T_hi]
/// using the newest usable snapshot as t0.
PeriodMatch match_period(const SnapshotRing& ring, int nodes_per_period, double period,
                         int direction, double T_lo, double T_hi);

struct ProbeRecord {
  double t = 0.0;
  double c_hat = 0.0;
  double defect = 0.0;     // NaN when no period matching was possible
  double residual = 0.0;
  double displacement = 0.0;
};

struct FrontSolution {
  FrontStatus status = FrontStatus::Inconclusive;
  bool stationary = false;
  double speed = 0.0;  // c_L
  SpeedEstimate estimate;
  double period = 1.0;
  double h = 0.0;
  int ny = 0;
  std::vector<double> xi;   // lattice abscissae, step h
  std::vector<double> phi;  // phi[j*ny + k] at (xi[j], k/ny)
  double replica_spread = 0.0;
  double pulsating_error = std::nan("");
  double pulsating_error_prev = std::nan("");
  double stationary_residual = std::nan("");
  double mu1_fit = std::nan(""), mu2_fit = std::nan("");
  // Stationary branch: final field on the grid.
  std::vector<double> x_stat, u_stat;
  std::vector<ProbeRecord> probes;
  std::vector<double> level_t, level_x;
  long long steps = 0;
  long long excursions = 0;
  double t_end = 0.0;
  double dt = 0.0;
  Scheme scheme = Scheme::Imex;
  double half_width = 0.0;
  std::string message;

  std::size_t n_xi() const { return xi.size(); }
  double at(std::size_t j, int k) const { return phi[j * ny + k]; }
  // Cubic in xi, periodic cubic in y; limits 1 / 0 outside the lattice.
  double operator()(double xi, double y) const;
  // Cubic in xi along lattice column k.
  double column(double xi, int k) const;
};

FrontSolution compute_pulsating_front(const ProblemInstance& inst, const FrontConfig& cfg);

/// Builds the lattice from snapshots covering `replicas` periods.
struct ProfileLattice {
  std::vector<double> xi;
  std::vector<double> phi;
  int ny = 0;
  double spread = 0.0;
};
ProfileLattice extract_profile(const SnapshotRing& ring, const Grid1D& grid, double c,
                               int replicas, double margin);

struct IdentityReport {
  double dirichlet_integral = 0.0;  // D
  double c_identity = 0.0;
  double c_front = 0.0;
  double mismatch = 0.0;
};
IdentityReport verify_speed_identity(const FrontSolution& front, double I_fbar);

struct DecayFit {
  double mu1 = 0.0, mu2 = 0.0;
  double span1 = 0.0, span2 = 0.0;  // e-foldings used
};
/// boundary_margin trims lattice ends distorted by the truncated domain.
DecayFit fit_decay_rates(const FrontSolution& front, double boundary_margin = 0.0);

struct QuenchingResult {
  FrontStatus status = FrontStatus::Inconclusive;
  double c = 0.0;
  FrontSolution front;
};
QuenchingResult classify_quenching(const ProblemInstance& inst, const FrontConfig& cfg);

struct SweepRecord {
  double L = 0.0;
  FrontStatus status = FrontStatus::Inconclusive;
  double c_level = 0.0, c_period = 0.0, uncertainty = 0.0;
  double pulsating_defect = std::nan("");
  double stationary_residual = std::nan("");
  std::string error;
  bool continuity_ok = true;  // against the previous propagating record
};

/// Independent runs for each L (base instance re-periodised), merged in
/// grid order. Worker exceptions become records with `error` set.
std::vector<SweepRecord> scan_E(const ProblemInstance& base, const std::vector<double>& Ls,
                                const FrontConfig& cfg, int workers = 1);

std::string sweep_csv(const std::vector<SweepRecord>& records);

// `xi y phi` triples; xi_stride thins the lattice.
void write_profile(const std::string& path, const FrontSolution& front, int xi_stride = 1,
                   const std::string& extra_header = "");

/// Mirror image x -> -x; its rightward fronts are the original's leftward ones.
ProblemInstance mirror_instance(const ProblemInstance& inst);

/// Default half-width from min_s sqrt(-d_u f(., s) / a_max).
double default_half_width(const ProblemInstance& inst);
double default_dt(const ProblemInstance& inst);
int default_nodes_per_period(const ProblemInstance& inst, const FrontConfig& cfg);

}  // namespace pfront
