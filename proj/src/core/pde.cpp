#include "pde.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pfront {

Grid1D make_grid(const ProblemInstance& inst, double x_min, double x_max, int nodes_per_period) {
  if (nodes_per_period < 2) throw PreconditionError("need at least 2 nodes per period");
  const double L = inst.period;
  const long long p0 = static_cast<long long>(std::floor(x_min / L + 1e-9));
  const long long p1 = static_cast<long long>(std::ceil(x_max / L - 1e-9));
  if (p1 <= p0) throw PreconditionError("grid must span at least one period");
  Grid1D g;
  g.nodes_per_period = nodes_per_period;
  g.period = L;
  g.h = L / nodes_per_period;
  g.origin = p0 * nodes_per_period;
  g.n = static_cast<std::size_t>((p1 - p0) * nodes_per_period + 1);
  if (g.n < 3) throw PreconditionError("grid needs at least 3 nodes");
  g.face_a.resize(g.n - 1);
  g.node_y.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const long long a = g.origin + static_cast<long long>(i);
    const long long r = ((a % nodes_per_period) + nodes_per_period) % nodes_per_period;
    g.node_y[i] = double(r) / nodes_per_period;
    if (i + 1 < g.n) g.face_a[i] = inst.coeff.a((double(r) + 0.5) / nodes_per_period);
  }
  return g;
}

void shift_grid(Grid1D& grid, long long periods) {
  // Faces and node_y are periodic with the period, so only the origin moves.
  grid.origin += periods * grid.nodes_per_period;
}

Stepper::Stepper(const Grid1D& grid, const ProblemInstance& inst, const SolverConfig& cfg)
    : grid_(&grid), inst_(&inst), cfg_(cfg) {
  if (!(cfg.dt > 0.0)) throw PreconditionError("dt must be positive");
  if (cfg.dt * inst.reaction.lip_K >= 0.5)
    throw PreconditionError("reaction stability requires dt*K < 0.5 (dt=" +
                            std::to_string(cfg.dt) + ", K=" +
                            std::to_string(inst.reaction.lip_K) + ")");
  factor();
}

void Stepper::rebind(const Grid1D& grid) {
  grid_ = &grid;
  factor();
}

void Stepper::factor() {
  const Grid1D& g = *grid_;
  const std::size_t m = g.n - 2;  // interior unknowns
  const double w = cfg_.scheme == Scheme::Imex ? 1.0 : 0.5;
  const double r = w * cfg_.dt / (g.h * g.h);
  lower_.assign(m, 0.0);
  pivot_.assign(m, 0.0);
  upper_.assign(m, 0.0);
  rhs_.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double aw = g.face_a[i - 1], ae = g.face_a[i];
    lower_[k] = -r * aw;
    upper_[k] = -r * ae;
    pivot_[k] = 1.0 + r * (aw + ae);
  }
  // Forward elimination once; lower_ then stores the multipliers.
  for (std::size_t k = 1; k < m; ++k) {
    const double mlt = lower_[k] / pivot_[k - 1];
    pivot_[k] -= mlt * upper_[k - 1];
    lower_[k] = mlt;
  }
}

void Stepper::step(Field& field) {
  const Grid1D& g = *grid_;
  const ProblemInstance& inst = *inst_;
  auto& u = field.u;
  const std::size_t n = g.n, m = n - 2;
  const double dt = cfg_.dt;
  const double w = cfg_.scheme == Scheme::Imex ? 1.0 : 0.5;
  const double r = w * dt / (g.h * g.h);
  u.front() = cfg_.u_left;
  u.back() = cfg_.u_right;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    double b = u[i] + dt * inst.reaction.f(g.node_y[i], u[i]);
    if (cfg_.scheme == Scheme::CrankNicolson) b += 0.5 * dt * diffusion_term(g, u, i);
    rhs_[k] = b;
  }
  rhs_.front() += r * g.face_a[0] * u.front();
  rhs_.back() += r * g.face_a[n - 2] * u.back();
  for (std::size_t k = 1; k < m; ++k) rhs_[k] -= lower_[k] * rhs_[k - 1];
  rhs_[m - 1] /= pivot_[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) rhs_[k] = (rhs_[k] - upper_[k] * rhs_[k + 1]) / pivot_[k];
  bool finite = true;
  for (std::size_t k = 0; k < m; ++k) {
    const double v = rhs_[k];
    finite = finite && std::isfinite(v);
    if (v < -0.1 || v > 1.1) ++diag_.excursions;
    u[k + 1] = v;
  }
  ++diag_.steps;
  if (!finite)
    throw NumericalError("non-finite value produced at step " + std::to_string(diag_.steps));
  field.t += dt;
}

Field evolve(Field field, const Grid1D& grid, const ProblemInstance& inst,
             const SolverConfig& cfg, double t_final, const StepCallback& callback) {
  if (!(t_final > field.t)) throw PreconditionError("t_final must exceed the current time");
  Stepper stepper(grid, inst, cfg);
  const long long steps =
      static_cast<long long>(std::ceil((t_final - field.t) / cfg.dt - 1e-9));
  const int stride = std::max(1, cfg.stride);
  for (long long s = 1; s <= steps; ++s) {
    stepper.step(field);
    if (callback && (s % stride == 0 || s == steps))
      if (!callback(field, s)) break;
  }
  return field;
}

double residual_stationary(const Field& field, const Grid1D& grid, const ProblemInstance& inst) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.n; ++i) {
    const double r = diffusion_term(grid, field.u, i) + inst.reaction.f(grid.node_y[i], field.u[i]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

Field front_initial_datum(const Grid1D& grid, DatumStyle style, double interface_x, double width) {
  if (interface_x <= grid.x_min() || interface_x >= grid.x_max())
    throw PreconditionError("interface must lie inside the grid");
  Field f;
  f.u.resize(grid.n);
  const double wmin = 4.0 * grid.h;
  double w = style == DatumStyle::Step ? wmin : std::max(width > 0.0 ? width : 10.0 * grid.h, wmin);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double s = grid.x(i) - interface_x;
    double v;
    if (style == DatumStyle::Tanh) {
      v = 0.5 * (1.0 - std::tanh(s / w));
    } else {
      v = std::clamp(0.5 - s / w, 0.0, 1.0);
    }
    f.u[i] = v;
  }
  f.u.front() = 1.0;
  f.u.back() = 0.0;
  return f;
}

DatumStyle parse_datum_style(const std::string& name) {
  if (name == "step") return DatumStyle::Step;
  if (name == "ramp") return DatumStyle::Ramp;
  if (name == "tanh") return DatumStyle::Tanh;
  throw ConfigError("initial", "unknown datum style '" + name + "'");
}

double level_position(const Grid1D& grid, std::span<const double> u, double level,
                      int* crossings) {
  int count = 0;
  double pos = std::nan("");
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double a = u[i] - level, b = u[i + 1] - level;
    if ((a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0)) {
      ++count;
      const double t = a / (a - b);
      pos = grid.x(i) + t * grid.h;
    }
  }
  if (crossings) *crossings = count;
  return pos;
}

void write_snapshot(const std::string& path, const Grid1D& grid, const Field& field,
                    const std::string& extra_header) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write snapshot " + path);
  out << std::setprecision(17);
  out << "# t=" << field.t << " L=" << grid.period << "\n";
  if (!extra_header.empty()) out << "# " << extra_header << "\n";
  for (std::size_t i = 0; i < grid.n; ++i) out << grid.x(i) << ' ' << field.u[i] << '\n';
  if (!out) throw Error("I/O error writing " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open snapshot " + path);
  Snapshot s;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pt = line.find("t="), pl = line.find("L=");
      if (pt != std::string::npos && pl != std::string::npos) {
        s.t = std::stod(line.substr(pt + 2));
        s.period = std::stod(line.substr(pl + 2));
        header = true;
      }
      continue;
    }
    std::istringstream ls(line);
    double x, u;
    if (!(ls >> x >> u)) throw Error("malformed snapshot line '" + line + "'");
    s.x.push_back(x);
    s.u.push_back(u);
  }
  if (!header) throw Error("snapshot " + path + " lacks '# t=<time> L=<period>' header");
  return s;
}

}  // namespace pfront
