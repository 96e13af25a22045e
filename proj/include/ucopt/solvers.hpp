#pragma once

#include <utility>

#include "ucopt/mappings.hpp"
#include "ucopt/problem.hpp"
#include "ucopt/trace.hpp"

namespace ucopt {

/// Positive root a of L a^2 = A + a:  a = (1 + sqrt(1 + 4 L A)) / (2 L).
/// Requires L > 0, A >= 0.
double ufgm_step_coefficient(double L, double A);

/// Accumulated lower model of the accuracy methods:
///   phi(x) = beta_d(x0, x) + <lin, x> + offset + weight * Psi(x).
/// Linearizations of f are added with positive coefficients; minimization
/// reuses the composite prox engine.
class EstimateFunction {
 public:
  EstimateFunction(ProxGeometry geometry, PsiSpec psi, Vec x0);

  /// Adds coeff * [ f_val + <grad, x - point> + Psi(x) ].
  void add_linearization(double coeff, double f_val, const Vec& grad,
                         const Vec& point);

  /// Returns (argmin phi, min phi).
  std::pair<Vec, double> minimize() const;

  double value(const Vec& x) const;

  double psi_weight() const { return weight_; }
  const Vec& lin() const { return lin_; }
  double offset() const { return offset_; }
  const Vec& x0() const { return x0_; }

  /// min over dom Psi of (phi without its prox term), i.e. a valid lower
  /// bound on weight * (f + Psi) at any point once phi underestimates it;
  /// nullopt when that linear part is unbounded below.
  std::optional<double> linear_lower_bound() const;

 private:
  ProxGeometry geometry_;
  PsiSpec psi_;
  Vec x0_;
  Vec lin_;
  double offset_ = 0;
  double weight_ = 0;
};

/// Constrained smooth method: doubling line search on projected gradient
/// steps until the mapped-gradient norm reaches cfg.delta.
RunReport ggm_solve(const CompositeProblem& p, const SolverConfig& cfg);

/// Primal accuracy method: doubling line search on composite prox steps
/// with an eps/2 slack in the acceptance test.
RunReport pgm_solve(const CompositeProblem& p, const SolverConfig& cfg);

/// Dual accuracy method: estimate-sequence variant of the primal method.
RunReport dgm_solve(const CompositeProblem& p, const SolverConfig& cfg);

/// Fast (momentum) accuracy method with scheduled slack eps/2 * tau_k.
RunReport ufgm_solve(const CompositeProblem& p, const SolverConfig& cfg);

}  // namespace ucopt
