#include "ucopt/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ucopt/errors.hpp"
#include "ucopt/prox.hpp"

namespace ucopt {

namespace {

// Relative slack protecting acceptance tests that hold with exact equality
// from flipping on roundoff.
constexpr double kFpSlack = 1e-12;

double require_eps(const SolverConfig& cfg, const char* who) {
  if (!(cfg.eps > 0) || !std::isfinite(cfg.eps)) {
    throw ConfigError(std::string(who) + ": target accuracy eps must be finite and > 0");
  }
  return cfg.eps;
}

double initial_l(const SolverConfig& cfg, double fallback, const char* who) {
  if (cfg.l0 < 0 || !std::isfinite(cfg.l0)) {
    throw ConfigError(std::string(who) +
                      ": initial curvature guess must be finite and >= 0");
  }
  return cfg.l0 > 0 ? cfg.l0 : fallback;
}

std::optional<double> distance_budget(const CompositeProblem& p,
                                      const SolverConfig& cfg) {
  if (cfg.d_hint) {
    if (!(*cfg.d_hint > 0)) throw ConfigError("distance hint must be > 0");
    return cfg.d_hint;
  }
  return p.distance_to_optimum();
}

[[noreturn]] void line_search_overflow(const char* who, long k, int cap) {
  std::ostringstream os;
  os << who << ": line search exceeded " << cap << " doublings at iteration " << k;
  throw LineSearchError(os.str(), cap);
}

void certificate_violation(const char* check, long k, double lhs, double rhs) {
  std::ostringstream os;
  os << check << " failed at iteration " << k << ": " << lhs << " > " << rhs;
  throw InvariantViolationError(os.str(), k);
}

}  // namespace

double ufgm_step_coefficient(double L, double A) {
  if (!(L > 0) || !std::isfinite(L)) {
    throw DomainError("ufgm_step_coefficient: L must be finite and > 0");
  }
  if (!(A >= 0)) throw DomainError("ufgm_step_coefficient: A must be >= 0");
  return (1.0 + std::sqrt(1.0 + 4.0 * L * A)) / (2.0 * L);
}

EstimateFunction::EstimateFunction(ProxGeometry geometry, PsiSpec psi, Vec x0)
    : geometry_(std::move(geometry)), psi_(std::move(psi)), x0_(std::move(x0)) {
  if (static_cast<int>(x0_.size()) != geometry_.dim()) {
    throw ConfigError("EstimateFunction: x0 dimension mismatch");
  }
  lin_ = Vec::Zero(x0_.size());
}

void EstimateFunction::add_linearization(double coeff, double f_val,
                                         const Vec& grad, const Vec& point) {
  if (!(coeff > 0) || !std::isfinite(coeff)) {
    throw DomainError("EstimateFunction: coefficient must be finite and > 0");
  }
  lin_ += coeff * grad;
  offset_ += coeff * (f_val - grad.dot(point));
  weight_ += coeff;
}

std::pair<Vec, double> EstimateFunction::minimize() const {
  Vec v = solve_composite_prox(geometry_, psi_, x0_, lin_, 1.0, weight_);
  return {v, value(v)};
}

double EstimateFunction::value(const Vec& x) const {
  return geometry_.bregman(x0_, x) + lin_.dot(x) + offset_ +
         weight_ * psi_.finite_value(x);
}

std::optional<double> EstimateFunction::linear_lower_bound() const {
  auto m = linear_psi_min(geometry_, psi_, lin_, weight_);
  if (!m) return std::nullopt;
  return *m + offset_;
}

// ---------------------------------------------------------------------------
// Constrained smooth method

RunReport ggm_solve(const CompositeProblem& p, const SolverConfig& cfg) {
  if (!(cfg.delta > 0) || !std::isfinite(cfg.delta)) {
    throw ConfigError("ggm_solve: gradient-norm target delta must be finite and > 0");
  }
  const double M0 = initial_l(cfg, 1e-3, "ggm_solve");
  const long calls0 = p.oracle_calls();

  RunReport rep;
  rep.method = "ggm";
  rep.problem = p.name();
  rep.eps = cfg.eps;
  rep.delta = cfg.delta;
  rep.l0 = M0;

  Vec x = p.x0();
  Vec g;
  double f = p.f_grad(x, g);
  double M = M0;
  rep.reason = StopReason::kMaxIters;

  for (long k = 0; k < cfg.max_iters; ++k) {
    bool committed = false;
    for (int i = 0; i <= cfg.max_doublings_per_iter; ++i) {
      const double Mt = std::ldexp(M, i);  // 2^i M
      MappingResult gm = gradient_mapping(p, x, Mt, f, g);
      const double gnorm = p.geometry().dual_norm(gm.mapped_gradient);
      const double step = p.geometry().norm(gm.point - x);
      if (gnorm <= cfg.delta) {
        IterationRecord r;
        r.k = k;
        r.i_k = i;
        r.L = Mt;
        r.f = f;
        r.f_tilde = f;
        r.grad_map_norm = gnorm;
        r.step_norm = step;
        rep.trace.rows.push_back(r);
        rep.total_doublings += i;
        rep.iterations = k + 1;
        rep.achieved_k = k;
        rep.reason = StopReason::kGradientNorm;
        rep.x_out = gm.point;
        rep.m_bar = Mt;
        rep.grad_map_norm_out = gnorm;
        rep.f_out = p.f_value(gm.point);
        rep.f_tilde_out = rep.f_out;
        rep.l_final = rep.trace.rows.size() > 1
                          ? rep.trace.rows[rep.trace.rows.size() - 2].L
                          : M0;
        rep.oracle_calls = p.oracle_calls() - calls0;
        return rep;
      }
      Vec gT;
      const double fT = p.f_grad(gm.point, gT);
      const double need = 0.25 * Mt * step * step;
      if (f - fT >= need - kFpSlack * (std::abs(f) + std::abs(fT) + 1.0)) {
        IterationRecord r;
        r.k = k;
        r.i_k = i;
        r.L = 0.5 * Mt;  // constant committed for the next iteration
        r.f = f;
        r.f_tilde = f;
        r.grad_map_norm = gnorm;
        r.step_norm = step;
        rep.trace.rows.push_back(r);
        rep.total_doublings += i;
        x = gm.point;
        f = fT;
        g = gT;
        M = 0.5 * Mt;
        committed = true;
        break;
      }
    }
    if (!committed) line_search_overflow("ggm_solve", k, cfg.max_doublings_per_iter);
  }

  rep.iterations = cfg.max_iters;
  rep.x_out = x;
  rep.f_out = f;
  rep.f_tilde_out = f;
  rep.l_final = M;
  rep.oracle_calls = p.oracle_calls() - calls0;
  return rep;
}

// ---------------------------------------------------------------------------
// Primal accuracy method

RunReport pgm_solve(const CompositeProblem& p, const SolverConfig& cfg) {
  const double eps = require_eps(cfg, "pgm_solve");
  const double L0 = initial_l(cfg, 1.0, "pgm_solve");
  const long calls0 = p.oracle_calls();
  const auto D = distance_budget(p, cfg);

  RunReport rep;
  rep.method = "pgm";
  rep.problem = p.name();
  rep.eps = eps;
  rep.l0 = L0;
  if (D) rep.d_used = *D;
  rep.reason = StopReason::kMaxIters;

  Vec x = p.x0();
  Vec g;
  double f = p.f_grad(x, g);
  double psi_x = p.psi().finite_value(x);
  double L = L0;

  EstimateFunction lower(p.geometry(), p.psi(), x);  // lower bounds only
  double weight_sum = 0;   // sum of 1/L_{k+1}
  double value_sum = 0;    // same weights applied to f_tilde at the iterates
  double best_ft = f + psi_x;
  Vec best_x = x;

  for (long k = 0; k < cfg.max_iters; ++k) {
    bool committed = false;
    for (int i = 0; i <= cfg.max_doublings_per_iter; ++i) {
      const double Mt = std::ldexp(L, i);
      Vec T = solve_composite_prox(p.geometry(), p.psi(), x, g, Mt, 1.0);
      Vec gT;
      const double fT = p.f_grad(T, gT);
      const double step = p.geometry().norm(T - x);
      const double rhs = f + g.dot(T - x) + 0.5 * Mt * step * step + 0.5 * eps;
      if (fT <= rhs + kFpSlack * (std::abs(fT) + std::abs(rhs) + 1.0)) {
        const double Lnext = 0.5 * Mt;
        const double w = 1.0 / Lnext;
        weight_sum += w;
        value_sum += w * (f + psi_x);
        lower.add_linearization(w, f, g, x);

        IterationRecord r;
        r.k = k;
        r.i_k = i;
        r.L = Lnext;
        r.f = f;
        r.f_tilde = f + psi_x;
        r.step_norm = step;
        rep.trace.rows.push_back(r);
        rep.total_doublings += i;

        x = std::move(T);
        f = fT;
        g = std::move(gT);
        psi_x = p.psi().finite_value(x);
        L = Lnext;
        committed = true;
        break;
      }
    }
    if (!committed) line_search_overflow("pgm_solve", k, cfg.max_doublings_per_iter);

    if (f + psi_x < best_ft) {
      best_ft = f + psi_x;
      best_x = x;
    }
    rep.iterations = k + 1;
    rep.l_final = L;

    // Certified gap: averaged (hence best) value is within eps/2 + 2 D / S_k
    // of optimal; without a distance budget, fall back to the accumulated
    // linear lower bound on the optimal value.
    if (D) {
      const double gap = 0.5 * eps + 2.0 * *D / weight_sum;
      if (gap <= eps) {
        rep.reason = StopReason::kAccuracyCertified;
        rep.achieved_k = k;
        rep.certified_gap = gap;
        break;
      }
    } else if (auto lb = lower.linear_lower_bound()) {
      const double gap = best_ft - *lb / lower.psi_weight();
      if (gap <= eps) {
        rep.reason = StopReason::kAccuracyCertified;
        rep.achieved_k = k;
        rep.certified_gap = gap;
        break;
      }
    }
  }

  (void)value_sum;
  rep.x_out = best_x;
  rep.f_tilde_out = best_ft;
  rep.f_out = best_ft - p.psi().finite_value(best_x);
  rep.oracle_calls = p.oracle_calls() - calls0;
  return rep;
}

// ---------------------------------------------------------------------------
// Dual accuracy method

RunReport dgm_solve(const CompositeProblem& p, const SolverConfig& cfg) {
  const double eps = require_eps(cfg, "dgm_solve");
  const double L0 = initial_l(cfg, 1.0, "dgm_solve");
  const long calls0 = p.oracle_calls();
  const auto D = distance_budget(p, cfg);

  RunReport rep;
  rep.method = "dgm";
  rep.problem = p.name();
  rep.eps = eps;
  rep.l0 = L0;
  if (D) rep.d_used = *D;
  rep.reason = StopReason::kMaxIters;

  Vec x = p.x0();  // anchor of the next subproblem
  Vec g;
  double f = p.f_grad(x, g);
  double L = L0;

  EstimateFunction phi(p.geometry(), p.psi(), x);
  double half_weight_sum = 0;  // sum of 1/(2 L_{k+1})
  double rate_sum = 0;         // same weights applied to f_tilde at the mapped points
  double best_ft = std::numeric_limits<double>::infinity();
  Vec best_x;

  for (long k = 0; k < cfg.max_iters; ++k) {
    // Alternative indexing: test and map at the current estimate minimizer.
    Vec v_k;
    double fv = 0;
    Vec gv;
    if (cfg.proof_indexing) {
      v_k = phi.minimize().first;
      fv = p.f_grad(v_k, gv);
    }

    bool committed = false;
    for (int i = 0; i <= cfg.max_doublings_per_iter; ++i) {
      const double Mt = std::ldexp(L, i);
      const double w_trial = 1.0 / Mt;
      Vec lin = phi.lin() + w_trial * g;
      Vec x_trial = solve_composite_prox(p.geometry(), p.psi(), phi.x0(), lin, 1.0,
                                         phi.psi_weight() + w_trial);
      const Vec& map_at = cfg.proof_indexing ? v_k : x_trial;
      Vec gm;
      double fm;
      if (cfg.proof_indexing) {
        fm = fv;
        gm = gv;
      } else {
        fm = p.f_grad(x_trial, gm);
      }
      Vec T = solve_composite_prox(p.geometry(), p.psi(), map_at, gm, Mt, 1.0);
      const double fT = p.f_value(T);
      const double breg = p.geometry().bregman(map_at, T);
      const double rhs = fm + gm.dot(T - map_at) + Mt * breg + 0.5 * eps;
      if (fT <= rhs + kFpSlack * (std::abs(fT) + std::abs(rhs) + 1.0)) {
        const double Lnext = 0.5 * Mt;
        const double w = 1.0 / Mt;  // = 1/(2 L_{k+1})
        phi.add_linearization(w, f, g, x);
        half_weight_sum += w;
        const double ft_y = fT + p.psi().finite_value(T);
        rate_sum += w * ft_y;

        auto [v_next, phi_star] = phi.minimize();
        const double rate_rhs =
            phi_star + half_weight_sum * eps * 0.5;  // S_k eps / 4
        if (rate_sum > rate_rhs + cfg.check_tol * (1.0 + std::abs(rate_rhs))) {
          certificate_violation("estimate-rate certificate", k, rate_sum, rate_rhs);
        }

        IterationRecord r;
        r.k = k;
        r.i_k = i;
        r.L = Lnext;
        r.f = fT;
        r.f_tilde = ft_y;
        r.phi_star = phi_star;
        r.step_norm = p.geometry().norm(T - map_at);
        rep.trace.rows.push_back(r);
        rep.total_doublings += i;

        if (ft_y < best_ft) {
          best_ft = ft_y;
          best_x = T;
        }
        if (!cfg.proof_indexing) {
          f = fm;
          g = std::move(gm);
        } else {
          f = p.f_grad(x_trial, g);
        }
        x = std::move(x_trial);
        L = Lnext;
        committed = true;
        break;
      }
    }
    if (!committed) line_search_overflow("dgm_solve", k, cfg.max_doublings_per_iter);

    rep.iterations = k + 1;
    rep.l_final = L;

    if (D) {
      const double gap = 0.5 * eps + *D / half_weight_sum;  // eps/2 + 2 D / S_k
      if (gap <= eps) {
        rep.reason = StopReason::kAccuracyCertified;
        rep.achieved_k = k;
        rep.certified_gap = gap;
        break;
      }
    } else if (auto lb = phi.linear_lower_bound()) {
      const double gap = best_ft - *lb / phi.psi_weight();
      if (gap <= eps) {
        rep.reason = StopReason::kAccuracyCertified;
        rep.achieved_k = k;
        rep.certified_gap = gap;
        break;
      }
    }
  }

  rep.x_out = best_x.size() ? best_x : x;
  rep.f_tilde_out = best_ft;
  rep.f_out = best_ft - p.psi().finite_value(rep.x_out);
  rep.oracle_calls = p.oracle_calls() - calls0;
  return rep;
}

// ---------------------------------------------------------------------------
// Fast accuracy method

RunReport ufgm_solve(const CompositeProblem& p, const SolverConfig& cfg) {
  const double eps = require_eps(cfg, "ufgm_solve");
  const double L0 = initial_l(cfg, 1.0, "ufgm_solve");
  const long calls0 = p.oracle_calls();
  const auto D = distance_budget(p, cfg);

  RunReport rep;
  rep.method = "ufgm";
  rep.problem = p.name();
  rep.eps = eps;
  rep.l0 = L0;
  if (D) rep.d_used = *D;
  rep.reason = StopReason::kMaxIters;

  Vec y = p.x0();
  double fy = p.f_value(y);
  double ft_y = fy + p.psi().finite_value(y);
  double best_ft = ft_y;
  Vec best_x = y;

  EstimateFunction phi(p.geometry(), p.psi(), y);
  auto [v, phi_star] = phi.minimize();
  double A = 0;
  double L = L0;
  double tau_prev = std::numeric_limits<double>::infinity();

  for (long k = 0; k < cfg.max_iters; ++k) {
    bool committed = false;
    for (int i = 0; i <= cfg.max_doublings_per_iter; ++i) {
      const double Lt = std::ldexp(L, i);
      const double a = ufgm_step_coefficient(Lt, A);
      const double A_new = A + a;
      const double tau = a / A_new;
      Vec x_t = tau * v + (1.0 - tau) * y;
      Vec gx;
      const double fx = p.f_grad(x_t, gx);
      Vec xhat = solve_composite_prox(p.geometry(), p.psi(), v, a * gx, 1.0, a);
      Vec y_t = tau * xhat + (1.0 - tau) * y;
      const double fyt = p.f_value(y_t);
      const double step = p.geometry().norm(y_t - x_t);
      const double rhs =
          fx + gx.dot(y_t - x_t) + 0.5 * Lt * step * step + 0.5 * eps * tau;
      if (fyt <= rhs + kFpSlack * (std::abs(fyt) + std::abs(rhs) + 1.0)) {
        const double Lnext = cfg.aggressive_l ? 0.5 * Lt : Lt;
        phi.add_linearization(a, fx, gx, x_t);
        std::tie(v, phi_star) = phi.minimize();

        y = std::move(y_t);
        fy = fyt;
        ft_y = fyt + p.psi().finite_value(y);
        A = A_new;
        L = Lnext;

        // Online certificates; failures are bugs, not data.  The two
        // step-fraction facts are proved for the keep-on-accept update only:
        // halving the constant lets tau hover instead of shrinking.
        if (!cfg.aggressive_l) {
          if (tau > 2.0 / (k + 1) + cfg.check_tol) {
            certificate_violation("step-fraction bound", k, tau, 2.0 / (k + 1));
          }
          if (tau > tau_prev + cfg.check_tol) {
            certificate_violation("step-fraction monotonicity", k, tau, tau_prev);
          }
        }
        const double coupling = 1.0 / (A * tau * tau);
        if (std::abs(coupling - Lt) > 1e-12 * Lt) {
          certificate_violation("coupling identity", k, coupling, Lt);
        }
        const double cert_lhs = A * (ft_y - 0.5 * eps);
        if (cert_lhs > phi_star + cfg.check_tol * (1.0 + std::abs(phi_star))) {
          certificate_violation("estimate certificate", k, cert_lhs, phi_star);
        }
        tau_prev = tau;

        IterationRecord r;
        r.k = k;
        r.i_k = i;
        r.L = Lnext;
        r.f = fyt;
        r.f_tilde = ft_y;
        r.tau = tau;
        r.a = a;
        r.A = A_new;
        r.phi_star = phi_star;
        r.step_norm = step;
        rep.trace.rows.push_back(r);
        rep.total_doublings += i;
        committed = true;
        break;
      }
    }
    if (!committed) line_search_overflow("ufgm_solve", k, cfg.max_doublings_per_iter);

    if (ft_y < best_ft) {
      best_ft = ft_y;
      best_x = y;
    }
    rep.iterations = k + 1;
    rep.l_final = L;

    if (D) {
      if (A >= 2.0 * *D / eps) {
        rep.reason = StopReason::kAccuracyCertified;
        rep.achieved_k = k;
        rep.certified_gap = *D / A + 0.5 * eps;
        // The guarantee is attached to the latest point, not the best-seen.
        best_ft = ft_y;
        best_x = y;
        break;
      }
    } else if (auto lb = phi.linear_lower_bound()) {
      const double gap = ft_y - *lb / phi.psi_weight();
      if (gap <= eps) {
        rep.reason = StopReason::kAccuracyCertified;
        rep.achieved_k = k;
        rep.certified_gap = gap;
        best_ft = ft_y;
        best_x = y;
        break;
      }
    }
  }

  rep.x_out = best_x;
  rep.f_tilde_out = best_ft;
  rep.f_out = best_ft - p.psi().finite_value(best_x);
  rep.oracle_calls = p.oracle_calls() - calls0;
  return rep;
}

}  // namespace ucopt
