#pragma once

#include <functional>
#include <string>
#include <vector>

#include "model.hpp"

namespace pfront {

/// Tridiagonal operator row i: sub[i] psi[i-1] + diag[i] psi[i] + sup[i] psi[i+1].
/// With `periodic`, sub[0] and sup[n-1] wrap around.
struct TriOperator {
  std::vector<double> sub, diag, sup;
  bool periodic = false;

  std::size_t size() const { return diag.size(); }
  void apply(std::span<const double> x, std::span<double> y) const;
};

struct PrincipalResult {
  double lambda = 0.0;
  double lower = 0.0, upper = 0.0;  // Collatz-Wielandt bounds
  std::vector<double> psi;          // positive, sup = 1
  int iterations = 0;
  double residual = 0.0;            // ||A psi - lambda psi||_inf
};

/// Principal eigenpair of an irreducible Metzler tridiagonal operator by
/// shifted inverse iteration; the shift follows the upper bound down.
PrincipalResult principal_metzler(const TriOperator& A, int max_iter = 10000, double tol = 1e-12);

enum class BoundaryKind { Dirichlet, Periodic };

struct EigenPair {
  double lambda = 0.0;
  std::vector<double> x;
  std::vector<double> psi;
  BoundaryKind boundary = BoundaryKind::Dirichlet;
  double extent = 0.0;  // R or L
  std::string potential;
  double lower = 0.0, upper = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

using StateFn = std::function<double(double)>;  // u_bar(x)

/// (a_L psi')' + d_u f_L(x, u_bar) psi on [-R, R], psi(+-R) = 0.
EigenPair dirichlet_principal_eigen(const ProblemInstance& inst, const StateFn& ubar, double R,
                                    int n_nodes, const std::string& label = "");

/// Same operator on one period [0, L) with periodic boundary conditions;
/// u_bar given at the N nodes x_i = i L / N.
EigenPair periodic_principal_eigen(const ProblemInstance& inst, std::span<const double> ubar,
                                   const std::string& label = "");

enum class StabilityClass { Stable, Unstable, SemistableBoundary };
const char* to_string(StabilityClass c);
StabilityClass classify_lambda(double lambda1, double band = 1e-6);

struct StabilityTrace {
  std::vector<double> R, lambda;
  bool monotone = true;
  double periodic_lambda = std::nan("");
  double terminal_gap = std::nan("");
  StabilityClass cls = StabilityClass::SemistableBoundary;
};

/// lambda_{1,R} along increasing R on a fixed mesh width h (nested grids).
/// If periodic_nodes > 0, u_bar is L-periodic and the periodic eigenvalue
/// is computed on that many nodes per period for comparison.
StabilityTrace stability_limit(const ProblemInstance& inst, const StateFn& ubar,
                               const std::vector<double>& R_list, double h,
                               int periodic_nodes = 0);

struct SteadyState {
  std::vector<double> x, u;  // one period, N nodes
  double period = 1.0;
  double residual = 0.0;
  double lambda1 = 0.0;
  StabilityClass cls = StabilityClass::SemistableBoundary;
  std::string seed;
};

struct NewtonConfig {
  int nodes_per_period = 256;
  double h_max = 0.02;
  double tol = 1e-10;
  int max_iter = 100;
  int max_halvings = 30;
  double touch_tol = 1e-6;
};

struct SeedOutcome {
  std::string seed;
  bool converged = false;
  bool rejected = false;
  std::string note;
};

struct SteadyStateSearch {
  std::vector<SteadyState> states;
  std::vector<SeedOutcome> seeds;
};

struct Seed {
  std::string name;
  StateFn u;  // function of x
};

/// Constants at the zeros of fbar, theta(x/L), and cosine perturbations of both.
std::vector<Seed> default_seeds(const ProblemInstance& inst);

int steady_nodes(const ProblemInstance& inst, const NewtonConfig& cfg);

SteadyStateSearch find_periodic_steady_states(const ProblemInstance& inst,
                                              const std::vector<Seed>& seeds,
                                              const NewtonConfig& cfg = {});

enum class DecayDirection { Right, Left };
enum class DecayPotential { Margin, Linearized };

struct DecayRoot {
  double mu = 0.0;
  double lambda_at_zero = 0.0;
  std::vector<double> mu_grid, lambda_grid;
  int nodes = 0;
};

/// Principal periodic eigenvalue of T_mu in the cell variable y.
double decay_operator_eigen(const ProblemInstance& inst, double c, double mu, DecayDirection dir,
                            DecayPotential pot, int nodes);

/// Smallest mu > 0 with lambda_1(T_mu) = 0.
DecayRoot decay_root_mu(const ProblemInstance& inst, double c, DecayDirection dir,
                        DecayPotential pot = DecayPotential::Margin, double mu_max = 50.0,
                        int min_nodes = 256);

void write_steady_state(const std::string& path, const SteadyState& s,
                        const std::string& extra_header = "");

}  // namespace pfront
