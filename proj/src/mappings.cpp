#include "ucopt/mappings.hpp"

#include <cmath>
#include <random>

#include "ucopt/errors.hpp"
#include "ucopt/prox.hpp"

namespace ucopt {

namespace {

// First-order optimality violation of min <c,y> + M beta_d(z,y) + w psi(y)
// at its reported solution T, probed at coordinate steps and 32 random
// feasible points.  For an exact minimizer every probe satisfies
// <c + M (grad d(T) - grad d(z)), y - T> + w (psi(y) - psi(T)) >= 0.
double probe_fop_residual(const ProxGeometry& geom, const PsiSpec& psi,
                          const Vec& z, const Vec& c, double M, double w,
                          const Vec& T) {
  Vec slope = c + M * (geom.potential_gradient(T) - geom.potential_gradient(z));
  const double psi_t = psi.finite_value(T);
  const int n = static_cast<int>(T.size());
  const double h = 0.5 * (1.0 + T.lpNorm<Eigen::Infinity>());
  double worst = 0;
  auto visit = [&](const Vec& y_raw) {
    Vec y = nearest_feasible(geom, psi, y_raw);
    double fo = slope.dot(y - T) + w * (psi.finite_value(y) - psi_t);
    if (-fo > worst) worst = -fo;
  };
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = h;
    visit(T + e);
    visit(T - e);
  }
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < 32; ++s) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng);
    double nn = u.norm();
    if (nn > 0) u *= h / nn;
    visit(T + u);
  }
  return worst;
}

}  // namespace

MappingResult gradient_mapping(const CompositeProblem& p, const Vec& x,
                               double M, double f_x, const Vec& g_x) {
  (void)f_x;
  if (p.geometry().kind() != ProxKind::kEuclideanHalfSquare) {
    throw CapabilityError(
        "gradient_mapping: defined for the Euclidean geometry only");
  }
  if (!(M > 0)) throw DomainError("gradient_mapping: M must be > 0");
  MappingResult r;
  r.point = solve_composite_prox(p.geometry(), p.q(), x, g_x, M, 1.0);
  r.mapped_gradient = M * p.geometry().apply_matrix(x - r.point);
  r.step_M = M;
  r.fop_residual =
      probe_fop_residual(p.geometry(), p.q(), x, g_x, M, 1.0, r.point);
  return r;
}

MappingResult gradient_mapping(const CompositeProblem& p, const Vec& x,
                               double M) {
  Vec g;
  double f = p.f_grad(x, g);
  return gradient_mapping(p, x, M, f, g);
}

MappingResult bregman_mapping(const CompositeProblem& p, const Vec& x,
                              double M, double f_x, const Vec& g_x) {
  if (!(M > 0)) throw DomainError("bregman_mapping: M must be > 0");
  MappingResult r;
  r.point = solve_composite_prox(p.geometry(), p.psi(), x, g_x, M, 1.0);
  r.step_M = M;
  r.model_value = f_x + g_x.dot(r.point - x) + M * p.geometry().bregman(x, r.point) +
                  p.psi().finite_value(r.point);
  r.fop_residual =
      probe_fop_residual(p.geometry(), p.psi(), x, g_x, M, 1.0, r.point);
  return r;
}

MappingResult bregman_mapping(const CompositeProblem& p, const Vec& x,
                              double M) {
  Vec g;
  double f = p.f_grad(x, g);
  return bregman_mapping(p, x, M, f, g);
}

double stationarity_certificate(const CompositeProblem& p, const Vec& x,
                                double M, double eps,
                                const std::vector<Vec>& probes) {
  if (probes.empty()) {
    throw DomainError("stationarity_certificate: needs at least one probe point");
  }
  if (!(eps >= 0)) throw DomainError("stationarity_certificate: eps must be >= 0");
  if (p.known_model() && eps > 0) {
    // The guarantee needs M to dominate the companion gauge at eps.
    try {
      double need = p.known_model()->gamma_hat(eps);
      if (M < need * (1.0 - 1e-9)) {
        throw DomainError(
            "stationarity_certificate: M below the companion gauge at eps (" +
            std::to_string(M) + " < " + std::to_string(need) + ")");
      }
    } catch (const UnattainableAccuracyError&) {
      // eps/2 outside the model's value range: the precondition cannot be
      // evaluated; the certificate value is still computable.
    }
  }
  MappingResult gm = gradient_mapping(p, x, M);
  Vec gT;
  p.f_grad(gm.point, gT);
  double gdual = p.geometry().dual_norm(gm.mapped_gradient);
  double penalty = 1.5 * eps + (2.0 / M) * gdual * gdual;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& probe : probes) {
    Vec y = nearest_feasible(p.geometry(), p.q(), probe);
    double dn = p.geometry().norm(y - gm.point);
    double v = gT.dot(y - gm.point) + penalty + 2.0 * M * dn * dn;
    best = std::min(best, v);
  }
  return best;
}

}  // namespace ucopt
