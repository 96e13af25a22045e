#pragma once

#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace ucopt {

/// Tolerances for the scalar inversions (radius-from-accuracy gauges).
struct GaugeConfig {
  double rel_tol = 1e-10;
  int max_bisection_steps = 200;
};

/// Sampled curvature curve: mu[i] is a lower estimate of the curvature bound
/// at radius t[i].  t starts at 0 with mu[0] == 0 and both are non-decreasing.
struct EmpiricalCurve {
  std::vector<double> t;
  std::vector<double> mu;
  long sample_budget = 0;  ///< pairs drawn while estimating (0 = hand-made)
  unsigned long seed = 0;  ///< RNG seed used when sample_budget > 0
};

/// Writes a curve as CSV with header "t,mu_hat" and full-precision decimals.
void write_curve_csv(const std::string& path, const EmpiricalCurve& curve);

/// Reads a curve written by write_curve_csv.  Validates the header and the
/// monotonicity of both columns.
EmpiricalCurve read_curve_csv(const std::string& path);

/// Model of the global curvature bound mu_hat of an objective: the worst
/// normalized gap between a chord of f and f itself over point pairs at
/// distance <= t.  mu_hat(0) = 0 and mu_hat is non-decreasing; everything
/// else this class exposes (integral companion sigma_hat, offset/Lipschitz
/// split, accuracy gauges) is derived from that curve.
///
/// Instances are immutable value types; copies are cheap.
class CurvatureModel {
 public:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  /// Curvature of a quadratic with extreme eigenvalue magnitude L:
  /// mu_hat(t) = L t^2 / 2.
  static CurvatureModel quadratic(double L, double radius_limit = kUnbounded,
                                  bool convex_full_domain = true);

  /// Curvature implied by a (nu, L)-Hölder gradient, nu in [0,1]:
  /// mu_hat(t) = L t^(1+nu) / (1+nu).
  static CurvatureModel hoelder(double nu, double L,
                                double radius_limit = kUnbounded,
                                bool convex_full_domain = true);

  /// Additive combination: mu_hat = sum of the parts' curves, valid radius
  /// range the intersection of the parts' ranges.
  static CurvatureModel sum(std::vector<CurvatureModel> parts);

  /// Piecewise-linear interpolation of a sampled curve (keeps provenance).
  static CurvatureModel empirical(EmpiricalCurve curve,
                                  bool convex_full_domain = false);

  /// Piecewise-linear interpolation of a hand-made monotone table.
  /// Requires t[0] == 0, mu[0] == 0, both columns non-decreasing.
  static CurvatureModel table(std::vector<double> t, std::vector<double> mu,
                              bool convex_full_domain = false);

  /// Largest radius the model can be queried at (may be +inf).
  double radius_limit() const { return radius_limit_; }

  /// Whether the modelled objective is convex with full domain; gates the
  /// sharper radius-scaling facts used by the gauge sandwich.
  bool convex_full_domain() const { return convex_; }

  /// Curvature bound at radius t.  Requires 0 <= t <= radius_limit().
  double mu_hat(double t) const;

  /// Integral companion sigma_hat(r) = integral_0^r mu_hat(tau)/tau dtau.
  /// Exact per closed form (analytic kinds) or per segment (tabulated kinds).
  double sigma_hat(double r) const;

  /// Splits the chord-gap bound at radius r into a constant offset and a
  /// quadratic coefficient: returns (2 sigma_hat(r) - mu_hat(r),
  /// 2 mu_hat(r) / r^2).  Requires r > 0.
  std::pair<double, double> delta_plus_and_lip(double r) const;

  /// Radius at which the curvature bound reaches eps: mu_hat(result) = eps.
  double invert_mu(double eps, const GaugeConfig& cfg = {}) const;

  /// Radius at which the integral companion reaches eps.
  double invert_sigma(double eps, const GaugeConfig& cfg = {}) const;

  /// Curvature-to-accuracy gauge t / invert_mu(t/2)^2.  Non-increasing for
  /// convex full-domain models; equals L identically for quadratic(L).
  double gamma_simple(double t, const GaugeConfig& cfg = {}) const;

  /// Companion gauge 2 t / invert_sigma(t/2)^2; non-increasing always.
  double gamma_hat(double t, const GaugeConfig& cfg = {}) const;

  /// Provenance of an empirical model (null for other kinds).
  const EmpiricalCurve* curve() const;

  /// Human-readable description, e.g. "quadratic(L=1)" or "sum[...]".
  std::string describe() const;

 private:
  enum class Kind { kQuadratic, kHoelder, kSum, kTable };

  struct TableData {
    std::vector<double> t;
    std::vector<double> mu;
    std::vector<double> sigma;  // integral companion at the nodes
    EmpiricalCurve provenance;  // empty t for hand-made tables
    bool is_empirical = false;
  };

  CurvatureModel() = default;

  Kind kind_ = Kind::kQuadratic;
  double l_ = 0.0;
  double nu_ = 1.0;
  double radius_limit_ = kUnbounded;
  bool convex_ = true;
  std::vector<CurvatureModel> parts_;
  std::shared_ptr<const TableData> table_;
};

/// Radius r at which the two-class bound L0 r + L1 r^2 / 2 equals eps,
/// in the cancellation-free form 2 eps / (L0 + sqrt(2 eps L1 + L0^2)).
double sum_class_radius(double L0, double L1, double eps);

}  // namespace ucopt
