#include "ucopt/estimate.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "ucopt/errors.hpp"

namespace ucopt {

EmpiricalCurve estimate_gcb(const CompositeProblem& p,
                            const std::vector<double>& t_grid,
                            long pairs_per_bin, int alphas_per_pair,
                            unsigned long seed) {
  const int n = p.dim();
  if (n > 10) {
    throw ConfigError("estimate_gcb: sampling estimator is meant for dim <= 10, got " +
                      std::to_string(n));
  }
  if (t_grid.empty()) throw ConfigError("estimate_gcb: empty radius grid");
  double prev = 0;
  for (double t : t_grid) {
    if (!(t > prev) || !std::isfinite(t)) {
      throw ConfigError("estimate_gcb: radius grid must be positive and increasing");
    }
    prev = t;
  }
  if (pairs_per_bin < 1) throw ConfigError("estimate_gcb: pairs_per_bin must be >= 1");
  if (alphas_per_pair < 1) throw ConfigError("estimate_gcb: alphas_per_pair must be >= 1");

  const Vec& lo = p.sample_lo();
  const Vec& hi = p.sample_hi();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double floor_factor = 1024.0 * std::numeric_limits<double>::epsilon();

  EmpiricalCurve curve;
  curve.t.reserve(t_grid.size() + 1);
  curve.mu.reserve(t_grid.size() + 1);
  curve.t.push_back(0.0);
  curve.mu.push_back(0.0);
  curve.sample_budget = pairs_per_bin * static_cast<long>(t_grid.size());
  curve.seed = seed;

  Vec m(n), u(n), x(n), y(n), mid(n);
  for (double t : t_grid) {
    double bin_max = 0;
    for (long s = 0; s < pairs_per_bin; ++s) {
      for (int i = 0; i < n; ++i) m[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
      for (int i = 0; i < n; ++i) u[i] = normal(rng);
      double sep = t * (1.0 - unit(rng));  // uniform in (0, t]
      double un = p.geometry().norm(u);
      if (!(un > 0)) continue;
      u *= sep / un;
      x = m - 0.5 * u;
      y = m + 0.5 * u;
      bool inside = true;
      for (int i = 0; i < n && inside; ++i) {
        inside = x[i] >= lo[i] && x[i] <= hi[i] && y[i] >= lo[i] && y[i] <= hi[i];
      }
      if (!inside) continue;
      double fx = p.f_value(x);
      double fy = p.f_value(y);
      for (int j = 1; j <= alphas_per_pair; ++j) {
        double alpha = static_cast<double>(j) / (alphas_per_pair + 1);
        mid = alpha * x + (1.0 - alpha) * y;
        double fm = p.f_value(mid);
        double chord = alpha * fx + (1.0 - alpha) * fy;
        double gap = chord - fm;
        // Quotients indistinguishable from cancellation noise count as zero,
        // keeping exactly-affine objectives at an identically zero curve.
        double scale = std::abs(alpha * fx) + std::abs((1.0 - alpha) * fy) + std::abs(fm);
        if (std::abs(gap) <= floor_factor * scale) continue;
        double q = std::abs(gap) / (alpha * (1.0 - alpha));
        if (q > bin_max) bin_max = q;
      }
    }
    // Larger radii admit every smaller separation, so the curve only grows.
    curve.t.push_back(t);
    curve.mu.push_back(std::max(bin_max, curve.mu.back()));
  }
  return curve;
}

}  // namespace ucopt
