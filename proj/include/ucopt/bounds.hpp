#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucopt/curvature.hpp"
#include "ucopt/problem.hpp"
#include "ucopt/solvers.hpp"
#include "ucopt/trace.hpp"

namespace ucopt {

/// Worst-case objective gap of the averaged primal/dual accuracy methods
/// after k iterations at distance budget D: 2 mu_hat(2 sqrt(D / k)).
double direct_bound_simple(const CurvatureModel& m, double D, long k);

/// Worst-case gap of the fast method after k iterations:
/// (k+1) mu_hat(2 (2/(k+1))^{3/2} sqrt(D)).
double direct_bound_fast(const CurvatureModel& m, double D, long k);

/// Smallest k with direct_bound_simple(m, D, k) <= eps.
long sufficient_iterations_simple(const CurvatureModel& m, double D,
                                  double eps);

/// Smallest k with direct_bound_fast(m, D, k) <= eps.
long sufficient_iterations_fast(const CurvatureModel& m, double D, double eps);

/// Smallest N whose total line-search budget certifies a mapped-gradient
/// norm <= delta from initial gap delta0:
/// N sigma_hat(2^{5/2} delta0 / (N delta)) < delta0.
long sufficient_iterations_ggm(const CurvatureModel& m, double delta0,
                               double delta);

/// One failed inequality found while checking a trace.
struct Violation {
  std::string name;  ///< which check failed (stable identifiers)
  long k;            ///< iteration index (-1 for whole-trace checks)
  double lhs, rhs;   ///< the sides of the violated inequality
};

struct VerifyConfig {
  std::string method;  ///< "ggm"/"pgm"/"dgm"/"ufgm"; "" = detect from columns
  double eps = 0;      ///< accuracy the trace was produced with
  double delta = 0;    ///< gradient-norm target (constrained smooth method)
  std::optional<CurvatureModel> model;  ///< enables model-based caps
  /// Initial objective gap; with a model and delta it also bounds the row
  /// count of a gradient-norm-certified trace.
  std::optional<double> delta0;
  double check_tol = 1e-9;
};

struct VerifyReport {
  std::string method;
  long rows = 0;
  std::vector<Violation> violations;
  bool passed() const { return violations.empty(); }
};

/// Replays every inequality a trace is supposed to satisfy: step-size
/// bookkeeping, certificate rows, monotonicity, and — when a model is
/// supplied — the curvature caps and the certified iteration bound.
VerifyReport verify_trace(const Trace& t, const VerifyConfig& cfg);

struct BenchmarkCell {
  std::string problem, method;
  double eps = 0;
  long sufficient_k = -1;  ///< -1 when no model/distance data is available
  long achieved_k = -1;
  std::vector<Violation> violations;
  std::string trace_path, report_path;
  std::string error;  ///< non-empty when the run itself failed
};

std::string report_json(const BenchmarkCell& cell);

/// Runs each method at each accuracy on p, writing one trace CSV and one
/// report JSON per cell into out_dir; failed cells are recorded, not fatal.
/// For the constrained smooth method the accuracy value is taken as the
/// gradient-norm target.
std::vector<BenchmarkCell> run_benchmark(
    const CompositeProblem& p, const std::vector<std::string>& methods,
    const std::vector<double>& eps_values, const std::string& out_dir,
    const SolverConfig& base_cfg = {});

}  // namespace ucopt
