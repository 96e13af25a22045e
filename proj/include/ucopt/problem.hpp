#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ucopt/curvature.hpp"
#include "ucopt/geometry.hpp"

namespace ucopt {

struct EvalResult {
  double f = 0;
  Vec grad;
  double psi = 0;      ///< full regularizer value (may be +inf)
  double f_tilde = 0;  ///< f + psi
};

/// Composite instance: smooth part f given by a first-order oracle, simple
/// additive part Psi, prox geometry, and a plain feasible set Q for the
/// constrained smooth method.  Optionally carries a curvature model of f and
/// a known optimizer, both used by certificates and bound checks.
class CompositeProblem {
 public:
  /// Oracle returns f(x) and, when grad != nullptr, writes the gradient.
  using Oracle = std::function<double(const Vec& x, Vec* grad)>;

  struct KnownOptimum {
    Vec x;
    double f_tilde;
  };

  CompositeProblem(std::string name, int dim, Oracle oracle, PsiSpec psi,
                   ProxGeometry geometry, PsiSpec q, Vec x0);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const PsiSpec& psi() const { return psi_; }
  const PsiSpec& q() const { return q_; }
  const ProxGeometry& geometry() const { return geometry_; }
  const Vec& x0() const { return x0_; }
  void set_x0(Vec x0);

  const std::optional<CurvatureModel>& known_model() const { return model_; }
  void set_known_model(CurvatureModel m) { model_ = std::move(m); }

  const std::optional<KnownOptimum>& known_optimum() const { return opt_; }
  /// Installs a known optimizer after checking its first-order residual.
  void set_known_optimum(Vec x_star, double residual_tol = 1e-8);
  void clear_known_optimum() { opt_.reset(); }

  /// Axis-aligned region the curvature estimator samples from.
  const Vec& sample_lo() const { return sample_lo_; }
  const Vec& sample_hi() const { return sample_hi_; }
  void set_sample_box(Vec lo, Vec hi);

  /// Smooth value (throws OracleError on non-finite result).
  double f_value(const Vec& x) const;
  /// Smooth value and gradient.
  double f_grad(const Vec& x, Vec& grad) const;
  /// Full evaluation of f, Psi and their sum.
  EvalResult eval(const Vec& x) const;
  /// f(y) - f(x) - <grad f(x), y - x>.
  double bregman_of_f(const Vec& x, const Vec& y) const;
  /// beta_d(x0, x*) when a known optimum is installed.
  std::optional<double> distance_to_optimum() const;

  long oracle_calls() const { return oracle_calls_; }
  void reset_oracle_calls() const { oracle_calls_ = 0; }

 private:
  std::string name_;
  int dim_;
  Oracle oracle_;
  PsiSpec psi_;
  ProxGeometry geometry_;
  PsiSpec q_;
  Vec x0_;
  std::optional<CurvatureModel> model_;
  std::optional<KnownOptimum> opt_;
  Vec sample_lo_, sample_hi_;
  mutable long oracle_calls_ = 0;
};

/// Max violation of the first-order optimality conditions of
/// min f + Psi at x (identity norm matrix required for l1/box/simplex).
double first_order_residual(const CompositeProblem& p, const Vec& x);

/// Names understood by builtin_problem.
std::vector<std::string> builtin_problem_names();

/// Instantiates a catalog problem.  params is a JSON object text ("{}" or ""
/// for defaults); unknown parameter keys are rejected.
CompositeProblem builtin_problem(const std::string& name, int dim,
                                 const std::string& params_json = "{}");

/// Loads a problem from a JSON spec file with keys
/// {"problem", "dim", "params", "psi", "q", "x0"}; unknown keys rejected.
CompositeProblem load_problem_json(const std::string& path);

/// Same, from an already-read JSON text.
CompositeProblem parse_problem_json(const std::string& text);

}  // namespace ucopt
