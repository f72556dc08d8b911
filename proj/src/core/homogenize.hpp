#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fronts.hpp"
#include "model.hpp"

namespace pfront {

class NoConnectionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct HomogenizedFront {
  double c0 = 0.0;
  double a_H = 1.0;
  double lambda1 = 0.0, lambda2 = 0.0;  // closed-form exponents at 0 and 1
  double lambda1_fit = 0.0, lambda2_fit = 0.0;
  double A1 = 0.0, A2 = 0.0;            // phi0 ~ A1 e^{-lambda1 xi}, 1 - phi0 ~ A2 e^{lambda2 xi}
  double shoot_residual = 0.0;          // final bracket width in c
  bool symmetric = false;
  std::vector<double> xi, phi;          // samples, phi(0) = 1/2
  double dxi = 0.0;

  double phi0(double x) const;
  double dphi0(double x) const;
};

struct ShootingConfig {
  double tol_c = 1e-10;
  double eps = 1e-6;      // initial offset from the state 1
  double ode_tol = 1e-12;
  double dxi = 0.01;      // sample spacing of the stored profile
  double xi_cap = 5000.0;
};

HomogenizedFront solve_homogenized_front(const HomogenizedData& homog,
                                         const ShootingConfig& cfg = {});

struct DecayExponents {
  double lambda1 = 0.0, lambda2 = 0.0;
  double fit1 = 0.0, fit2 = 0.0;
  double gap1 = 0.0, gap2 = 0.0;  // relative
};
DecayExponents homogenized_decay_rates(const HomogenizedFront& front, const HomogenizedData& homog);

// Characteristic roots of a w'' + c w' + q w = 0 decaying toward the respective side.
double decay_root_right(double a, double c, double q);
double decay_root_left(double a, double c, double q);

struct Alignment {
  double shift = 0.0;
  double gap = 0.0;       // L2 over the lattice
  double grad_gap = 0.0;  // L2 gap of xi-derivatives
};
/// Minimises the lattice L2 distance between phi_L(xi+s, y) and phi0(xi).
Alignment align_profiles(const FrontSolution& phiL, const HomogenizedFront& phi0,
                         double search = 5.0);

struct HomogenizationRecord {
  double L = 0.0;
  FrontStatus status = FrontStatus::Inconclusive;
  double c_L = 0.0;
  double c0 = 0.0;
  double c_gap_rel = 0.0;
  double profile_gap_L2 = 0.0;
  double shift = 0.0;
  std::string error;
};

struct HomogenizationSweep {
  HomogenizedFront front0;
  std::vector<HomogenizationRecord> records;
  bool c_gap_decreasing = false;
  bool profile_gap_decreasing = false;
};

HomogenizationSweep homogenization_sweep(const ProblemInstance& base, const std::vector<double>& Ls,
                                         const FrontConfig& cfg, int workers = 1);

std::string homogenization_csv(const std::vector<HomogenizationRecord>& records);

}  // namespace pfront
