#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "model.hpp"

namespace pfront {

/// Uniform grid whose nodes sit at integer multiples of h = L / nodes_per_period,
/// so shifts by whole periods map nodes to nodes.
struct Grid1D {
  long long origin = 0;  // absolute index of node 0
  std::size_t n = 0;
  int nodes_per_period = 0;
  double h = 0.0;
  double period = 1.0;
  std::vector<double> face_a;  // a_L at x_{i+1/2}, size n-1
  std::vector<double> node_y;  // x_i / L reduced to [0,1)

  double x(std::size_t i) const { return double(origin + static_cast<long long>(i)) * h; }
  double x_min() const { return x(0); }
  double x_max() const { return x(n - 1); }
  // Node in absolute numbering, -1 when outside.
  long long local(long long absolute) const {
    const long long i = absolute - origin;
    return (i >= 0 && i < static_cast<long long>(n)) ? i : -1;
  }
};

/// Grid on [x_min, x_max]; both ends are rounded to whole periods.
Grid1D make_grid(const ProblemInstance& inst, double x_min, double x_max, int nodes_per_period);

/// Translate the window by whole periods (positive moves right).
void shift_grid(Grid1D& grid, long long periods);

struct Field {
  std::vector<double> u;
  double t = 0.0;
};

enum class Scheme { Imex, CrankNicolson };

struct SolverConfig {
  double dt = 0.02;
  Scheme scheme = Scheme::Imex;
  double u_left = 1.0;
  double u_right = 0.0;
  int stride = 1;  // callback every `stride` steps
};

struct StepDiagnostics {
  long long steps = 0;
  long long excursions = 0;  // node values seen outside [-0.1, 1.1]
};

/// Conservative flux-form stepper for u_t = (a_L u_x)_x + f_L(x,u) with
/// Dirichlet ends. The implicit tridiagonal factor is built once.
class Stepper {
 public:
  Stepper(const Grid1D& grid, const ProblemInstance& inst, const SolverConfig& cfg);

  void step(Field& field);
  const StepDiagnostics& diagnostics() const { return diag_; }
  const SolverConfig& config() const { return cfg_; }
  const Grid1D& grid() const { return *grid_; }
  // Refresh after shift_grid (faces are periodic, node positions change).
  void rebind(const Grid1D& grid);

 private:
  void factor();

  const Grid1D* grid_;
  const ProblemInstance* inst_;
  SolverConfig cfg_;
  StepDiagnostics diag_;
  std::vector<double> lower_, pivot_, upper_;  // factored (I - w dt A)
  std::vector<double> rhs_;
};

/// Callback sees the field after each reporting stride; return false to stop.
using StepCallback = std::function<bool(const Field&, long long step)>;

Field evolve(Field field, const Grid1D& grid, const ProblemInstance& inst,
             const SolverConfig& cfg, double t_final, const StepCallback& callback = {});

// max_i |(a u_x)_x + f| over interior nodes, same stencil as Stepper.
double residual_stationary(const Field& field, const Grid1D& grid, const ProblemInstance& inst);

// Discrete (a u_x)_x at interior node i.
inline double diffusion_term(const Grid1D& g, std::span<const double> u, std::size_t i) {
  return (g.face_a[i] * (u[i + 1] - u[i]) - g.face_a[i - 1] * (u[i] - u[i - 1])) / (g.h * g.h);
}

enum class DatumStyle { Step, Ramp, Tanh };

/// Nonincreasing datum, 1 on the left and 0 on the right, centred at
/// interface_x. Width is clamped to at least 4h (step uses exactly 4h).
Field front_initial_datum(const Grid1D& grid, DatumStyle style, double interface_x,
                          double width = 0.0);

DatumStyle parse_datum_style(const std::string& name);

/// Rightmost crossing of `level` with sub-grid linear interpolation;
/// `crossings` receives the number of sign changes.
double level_position(const Grid1D& grid, std::span<const double> u, double level,
                      int* crossings = nullptr);

void write_snapshot(const std::string& path, const Grid1D& grid, const Field& field,
                    const std::string& extra_header = "");

struct Snapshot {
  double t = 0.0;
  double period = 0.0;
  std::vector<double> x, u;
};
Snapshot read_snapshot(const std::string& path);

}  // namespace pfront
