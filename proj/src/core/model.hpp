#pragma once

#include <functional>
#include <string>
#include <vector>

#include "common.hpp"

namespace pfront {

/// Periodic diffusivity a(y), y in [0,1). Samplers accept any real y and
/// wrap it; cached bounds are taken over a fine sample grid.
struct CoefficientProfile {
  std::function<double(double)> a;
  std::function<double(double)> da;
  double a_min = 0.0;
  double a_max = 0.0;
  double da_max = 0.0;  // sup |a'|
  double lip_a = 0.0;   // Lipschitz constant of a' (sampled)
  bool constant = false;
  std::string description;

  double operator()(double y) const { return a(y); }
};

CoefficientProfile constant_coefficient(double d);
// a(y) = a0 + a1 cos(2 pi y)
CoefficientProfile cosine_coefficient(double a0, double a1);
// a(y) = a0 + a1 sin(2 pi y)
CoefficientProfile sine_coefficient(double a0, double a1);
// a(y) = 1 / (b0 - b1 cos(2 pi y))
CoefficientProfile reciprocal_cosine_coefficient(double b0, double b1);
// Uniform samples on [0,1) (no duplicate endpoint), periodic cubic spline.
CoefficientProfile tabulated_coefficient(std::vector<double> samples);

/// Bistable reaction f(y,u). Samplers are valid on [0,1] in u; after
/// extend_reaction they are valid on the whole line.
struct ReactionProfile {
  std::function<double(double, double)> f;
  std::function<double(double, double)> dfdu;
  std::function<double(double)> theta;
  double gamma = 0.0;
  double delta = 0.0;
  double lip_K = 0.0;
  bool extended = false;
  bool x_independent = false;
  std::string description;
};

struct Violation {
  std::string kind;
  double y = 0.0;
  double u = 0.0;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  int checked_points = 0;
  bool pass() const { return violations.empty(); }
  std::string summary(std::size_t max_items = 5) const;
};

/// Samples (bistable) and (asspars) plus the Lipschitz bound on an
/// n_samples x n_samples (y,u) lattice. Throws on non-finite output.
ValidationReport validate_hypotheses(const ReactionProfile& reaction, int n_samples = 64);

/// Linear continuation outside [0,1] with slopes d_u f(y,0) and d_u f(y,1).
ReactionProfile extend_reaction(const ReactionProfile& reaction);

/// Admissible margins (gamma, delta) for the scaled cubic family with
/// intermediate zero ranging in [theta_min, theta_max].
struct CubicMargins {
  double gamma = 0.0;
  double delta = 0.0;
};
CubicMargins cubic_margins(double theta_min, double theta_max, double scale = 1.0);

// sup|d_u f| + sup|d_uu f| over [0,1] for scale*u(1-u)(u-theta).
double cubic_lipschitz(double theta_min, double theta_max, double scale = 1.0);

/// f(y,u) = scale * u(1-u)(u - theta(y)). Rejects theta outside (delta, 1-delta).
/// A zero K selects the closed-form family bound.
ReactionProfile make_cubic(std::function<double(double)> theta, double gamma, double delta,
                           double K = 0.0, double scale = 1.0, bool x_independent = false);

/// Locate theta(y) by bisection of f(y,.) on (delta, 1-delta).
std::function<double(double)> bisect_theta(const std::function<double(double, double)>& f,
                                           double delta);

struct ProblemInstance {
  CoefficientProfile coeff;
  ReactionProfile reaction;  // extended
  double period = 1.0;

  double a_L(double x) const { return coeff.a(x / period); }
  double da_L(double x) const { return coeff.da(x / period) / period; }
  double f_L(double x, double u) const { return reaction.f(x / period, u); }
  double dfdu_L(double x, double u) const { return reaction.dfdu(x / period, u); }
  bool homogeneous() const { return coeff.constant && reaction.x_independent; }
};

/// Builds an instance, validating the reaction and extending it.
ProblemInstance make_instance(CoefficientProfile coeff, const ReactionProfile& reaction,
                              double period, int n_validation = 64);

/// Same coefficients at a different period.
ProblemInstance with_period(const ProblemInstance& inst, double period);

/// a(y) = 1 + delta*lambda*sin(2 pi y), f = mu^2 u(1-u)(u - 1/2 + delta), L = 1.
ProblemInstance make_xin_example(double delta, double lambda, double mu);

struct HarmonicMean {
  double value = 0.0;
  double rel_error = 0.0;
};
HarmonicMean harmonic_mean(const CoefficientProfile& coeff, int quad_n = 2048);

double arithmetic_mean(const CoefficientProfile& coeff, int quad_n = 2048);

struct AveragedReaction {
  std::function<double(double)> fbar;
  std::function<double(double)> fbar_prime;
  double integral = 0.0;
  double integral_error = 0.0;
};
AveragedReaction fbar_and_integral(const ReactionProfile& reaction, int quad_n = 2048);

struct Corrector {
  std::function<double(double)> chi;
  std::function<double(double)> chi_prime;
  double periodicity_defect = 0.0;  // |chi(1) - chi(0)| before wrapping
};
Corrector corrector_chi(const CoefficientProfile& coeff, double a_H, int quad_n = 2048);

struct HomogenizedData {
  double a_H = 0.0;
  double a_H_rel_error = 0.0;
  std::function<double(double)> fbar;
  std::function<double(double)> fbar_prime;
  double I_fbar = 0.0;
  std::vector<double> theta_bar;  // zeros of fbar in (0,1)
  std::function<double(double)> chi;
  std::function<double(double)> chi_prime;
};
HomogenizedData homogenized_data(const ProblemInstance& inst, int quad_n = 2048);

// Two-column "y value" file with a "# period=1" header.
std::vector<double> read_tabulated(const std::string& path);

}  // namespace pfront
