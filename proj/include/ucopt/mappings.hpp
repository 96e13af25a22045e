#pragma once

#include <limits>
#include <vector>

#include "ucopt/problem.hpp"

namespace ucopt {

struct MappingResult {
  Vec point;            ///< the mapped point
  Vec mapped_gradient;  ///< M B (x - T); empty for Bregman mappings
  double model_value = std::numeric_limits<double>::quiet_NaN();
  ///< value of the upper model at the mapped point (Bregman mappings only)
  double step_M = 0;        ///< curvature constant the mapping was taken with
  double fop_residual = 0;  ///< probe-based first-order optimality violation
};

/// Projected gradient step over Q in the Euclidean geometry:
/// T = argmin_{y in Q} { <grad f(x), y> + M/2 ||y - x||^2 }, together with
/// the mapped gradient M B (x - T).
MappingResult gradient_mapping(const CompositeProblem& p, const Vec& x,
                               double M);
/// Variant reusing an already computed oracle result at x.
MappingResult gradient_mapping(const CompositeProblem& p, const Vec& x,
                               double M, double f_x, const Vec& g_x);

/// Composite prox step through the geometry's Bregman distance:
/// T = argmin_y { f(x) + <grad f(x), y - x> + M beta_d(x, y) + Psi(y) },
/// with model_value the minimized upper model at T.
MappingResult bregman_mapping(const CompositeProblem& p, const Vec& x,
                              double M);
MappingResult bregman_mapping(const CompositeProblem& p, const Vec& x,
                              double M, double f_x, const Vec& g_x);

/// Approximate-stationarity certificate after a projected gradient step at
/// x with constant M and slack eps: evaluates
///   <grad f(T), y - T> + 3/2 eps + 2/M ||g_M||_*^2 + 2 M ||y - T||^2
/// over the probe points and returns the minimum (non-negative whenever
/// M dominates the companion gauge at eps).  When the problem carries a
/// curvature model and eps > 0, that domination is checked up front.
double stationarity_certificate(const CompositeProblem& p, const Vec& x,
                                double M, double eps,
                                const std::vector<Vec>& probes);

}  // namespace ucopt
