#include "ucopt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ucopt/errors.hpp"

namespace ucopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Queries beyond the model's valid radius certify nothing: treat as +inf so
// the sufficient searches simply keep increasing k.
double mu_or_inf(const CurvatureModel& m, double t) {
  if (t > m.radius_limit()) return kInf;
  return m.mu_hat(t);
}

double sigma_or_inf(const CurvatureModel& m, double r) {
  if (r > m.radius_limit()) return kInf;
  return m.sigma_hat(r);
}

// Smallest k >= 1 with pred(k) true; pred must be monotone (false..false,
// true..true).  Throws when no k up to the cap satisfies it.
template <typename Pred>
long smallest_satisfying(Pred pred, const char* who) {
  constexpr long kCap = 1L << 60;
  long hi = 1;
  while (!pred(hi)) {
    if (hi >= kCap) {
      throw UnattainableAccuracyError(
          std::string(who) + ": no iteration count up to 2^60 satisfies the target");
    }
    hi *= 2;
  }
  long lo = hi / 2;  // pred(lo) false (or lo == 0)
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

double direct_bound_simple(const CurvatureModel& m, double D, long k) {
  if (!(D > 0)) throw DomainError("direct_bound_simple: D must be > 0");
  if (k < 1) throw DomainError("direct_bound_simple: k must be >= 1");
  return 2.0 * mu_or_inf(m, 2.0 * std::sqrt(D / static_cast<double>(k)));
}

double direct_bound_fast(const CurvatureModel& m, double D, long k) {
  if (!(D > 0)) throw DomainError("direct_bound_fast: D must be > 0");
  if (k < 1) throw DomainError("direct_bound_fast: k must be >= 1");
  const double kp1 = static_cast<double>(k) + 1.0;
  const double t = 2.0 * std::pow(2.0 / kp1, 1.5) * std::sqrt(D);
  return kp1 * mu_or_inf(m, t);
}

long sufficient_iterations_simple(const CurvatureModel& m, double D,
                                  double eps) {
  if (!(eps > 0)) throw DomainError("sufficient_iterations_simple: eps must be > 0");
  return smallest_satisfying(
      [&](long k) { return direct_bound_simple(m, D, k) <= eps; },
      "sufficient_iterations_simple");
}

long sufficient_iterations_fast(const CurvatureModel& m, double D, double eps) {
  if (!(eps > 0)) throw DomainError("sufficient_iterations_fast: eps must be > 0");
  return smallest_satisfying(
      [&](long k) { return direct_bound_fast(m, D, k) <= eps; },
      "sufficient_iterations_fast");
}

long sufficient_iterations_ggm(const CurvatureModel& m, double delta0,
                               double delta) {
  if (!(delta0 > 0)) throw DomainError("sufficient_iterations_ggm: delta0 must be > 0");
  if (!(delta > 0)) throw DomainError("sufficient_iterations_ggm: delta must be > 0");
  const double c = std::pow(2.0, 2.5) * delta0 / delta;
  return smallest_satisfying(
      [&](long n) {
        const double nn = static_cast<double>(n);
        return nn * sigma_or_inf(m, c / nn) < delta0;
      },
      "sufficient_iterations_ggm");
}

// ---------------------------------------------------------------------------
// Trace verification

namespace {

struct Checker {
  const VerifyConfig& cfg;
  std::vector<Violation>& out;

  void fail(const std::string& name, long k, double lhs, double rhs) {
    out.push_back({name, k, lhs, rhs});
  }

  // lhs <= rhs up to a relative slack.
  void expect_le(const std::string& name, long k, double lhs, double rhs) {
    if (!(lhs <= rhs + cfg.check_tol * (1.0 + std::abs(rhs)))) {
      fail(name, k, lhs, rhs);
    }
  }
};

std::string detect_method(const Trace& t) {
  for (const auto& r : t.rows) {
    if (!std::isnan(r.tau) || !std::isnan(r.a) || !std::isnan(r.A)) return "ufgm";
  }
  for (const auto& r : t.rows) {
    if (!std::isnan(r.grad_map_norm)) return "ggm";
  }
  for (const auto& r : t.rows) {
    if (!std::isnan(r.phi_star)) return "dgm";
  }
  return "pgm";
}

// The first committed constant implies the starting one through the update
// rule; halve_on_commit is true for every method except the fast one's
// default (keep-on-commit) rule.
double infer_l0(const IterationRecord& r0, bool halve_on_commit) {
  const int shift = halve_on_commit ? (1 - r0.i_k) : -r0.i_k;
  return std::ldexp(r0.L, shift);
}

void check_ufgm(const Trace& t, Checker& ck) {
  const auto& rows = t.rows;
  const long n = static_cast<long>(rows.size());

  // Update-rule variant: committed L is either the accepted constant
  // (default) or half of it (aggressive).  Row ratios disambiguate.
  bool aggressive = false;
  bool variant_known = false;
  for (long k = 1; k < n && !variant_known; ++k) {
    if (rows[k].L == std::ldexp(rows[k - 1].L, rows[k].i_k)) {
      aggressive = false;
      variant_known = true;
    } else if (rows[k].L == std::ldexp(rows[k - 1].L, rows[k].i_k - 1)) {
      aggressive = true;
      variant_known = true;
    }
  }
  for (long k = 1; k < n; ++k) {
    const double expect =
        std::ldexp(rows[k - 1].L, rows[k].i_k - (aggressive ? 1 : 0));
    if (rows[k].L != expect) {
      ck.fail("l-accounting", k, rows[k].L, expect);
    }
  }

  const double l0 = n ? infer_l0(rows[0], aggressive) : 0;
  if (n && !(l0 > 0 && std::isfinite(l0))) {
    ck.fail("curvature-start", 0, l0, 0.0);
  }

  double cap = kInf;
  if (ck.cfg.model && ck.cfg.eps > 0) {
    try {
      cap = ck.cfg.model->gamma_hat(ck.cfg.eps);
    } catch (const Error&) {
      cap = kInf;
    }
  }

  double tau_prev = kInf;
  double A_prev = 0;
  double inv_sqrt_sum = 0;  // sum of 1/(2 sqrt(L_used))
  long total_doublings = 0;
  double l_used_max = 0;
  for (long k = 0; k < n; ++k) {
    const auto& r = rows[k];
    const double l_used = aggressive ? 2.0 * r.L : r.L;  // accepted constant
    l_used_max = std::max(l_used_max, l_used);
    total_doublings += r.i_k;
    inv_sqrt_sum += 0.5 / std::sqrt(l_used);

    // The step-fraction facts hold for the keep-on-accept update only.
    if (!aggressive) {
      ck.expect_le("tau-bound", k, r.tau, 2.0 / (static_cast<double>(k) + 1.0));
      ck.expect_le("tau-monotone", k, r.tau, std::min(tau_prev, 1.0));
    }
    tau_prev = r.tau;

    // tau = a / A, A = A_prev + a, and the step-size identity
    // L_used = 1 / (A tau^2) all have to hold simultaneously.
    if (!(std::abs(r.tau * r.A - r.a) <=
          ck.cfg.check_tol * (std::abs(r.a) + 1.0))) {
      ck.fail("coupling-identity", k, r.tau * r.A, r.a);
    }
    if (!(std::abs(r.A - (A_prev + r.a)) <=
          ck.cfg.check_tol * (std::abs(r.A) + 1.0))) {
      ck.fail("coupling-identity", k, r.A, A_prev + r.a);
    }
    const double implied = 1.0 / (r.A * r.tau * r.tau);
    if (!(std::abs(implied - l_used) <= ck.cfg.check_tol * l_used)) {
      ck.fail("coupling-identity", k, implied, l_used);
    }
    A_prev = r.A;

    // Coefficient growth: A_k >= (sum 1/(2 sqrt(L_j)))^2.
    const double growth = inv_sqrt_sum * inv_sqrt_sum;
    if (!(r.A >= growth * (1.0 - ck.cfg.check_tol))) {
      ck.fail("growth-lower", k, growth, r.A);
    }

    if (ck.cfg.eps > 0 && !std::isnan(r.phi_star)) {
      ck.expect_le("estimate-certificate", k,
                   r.A * (r.f_tilde - 0.5 * ck.cfg.eps), r.phi_star);
    }
    if (std::isfinite(cap)) {
      ck.expect_le("curvature-cap", k, l_used, std::max(l0, 2.0 * cap));
    }
  }

  if (n && l0 > 0) {
    const double budget = (aggressive ? static_cast<double>(n) : 0.0) +
                          std::log2(l_used_max / l0);
    ck.expect_le("doubling-total", -1, static_cast<double>(total_doublings),
                 budget);
  }
}

void check_ggm(const Trace& t, Checker& ck) {
  const auto& rows = t.rows;
  const long n = static_cast<long>(rows.size());
  if (!n) return;

  // The last row is the certifying partial search when it reached the
  // gradient-norm target; its constant is attached without halving.
  bool has_cert_row =
      ck.cfg.delta > 0 && !std::isnan(rows[n - 1].grad_map_norm) &&
      rows[n - 1].grad_map_norm <= ck.cfg.delta * (1.0 + ck.cfg.check_tol);
  const long committed = has_cert_row ? n - 1 : n;

  for (long k = 1; k < n; ++k) {
    const bool cert = has_cert_row && k == n - 1;
    const double expect = std::ldexp(rows[k - 1].L, rows[k].i_k - (cert ? 0 : 1));
    if (rows[k].L != expect) {
      ck.fail("l-accounting", k, rows[k].L, expect);
    }
  }
  const double m0 = infer_l0(rows[0], !(has_cert_row && n == 1));
  if (!(m0 > 0 && std::isfinite(m0))) {
    ck.fail("curvature-start", 0, m0, 0.0);
  }

  long total_doublings = 0;
  double l_attached_max = 0;
  for (long k = 0; k < n; ++k) {
    const auto& r = rows[k];
    const bool cert = has_cert_row && k == n - 1;
    total_doublings += r.i_k;
    l_attached_max = std::max(l_attached_max, cert ? r.L : 2.0 * r.L);

    if (ck.cfg.delta > 0) {
      if (cert) {
        ck.expect_le("gradient-target", k, r.grad_map_norm, ck.cfg.delta);
      } else if (!std::isnan(r.grad_map_norm) &&
                 r.grad_map_norm <= ck.cfg.delta * (1.0 - ck.cfg.check_tol)) {
        // The method should have stopped here instead of committing.
        ck.fail("gradient-target", k, ck.cfg.delta, r.grad_map_norm);
      }
    }

    // Accepted descent: f(x_k) - f(x_{k+1}) >= 2^{i_k - 2} M_k |step|^2,
    // and the right side equals L_col / 2 * |step|^2.
    if (k + 1 < n && !cert) {
      const double drop = r.f - rows[k + 1].f;
      const double need = 0.5 * r.L * r.step_norm * r.step_norm;
      if (!(drop >= need - ck.cfg.check_tol *
                               (std::abs(r.f) + std::abs(rows[k + 1].f) + 1.0))) {
        ck.fail("descent-margin", k, need, drop);
      }
    }

    if (ck.cfg.model) {
      // The accepted constant stays below max(start, local Lipschitz bound).
      const double attached = cert ? r.L : 2.0 * r.L;
      if (r.step_norm > 0 && r.step_norm <= ck.cfg.model->radius_limit()) {
        const double lip = ck.cfg.model->delta_plus_and_lip(r.step_norm).second;
        ck.expect_le("curvature-max", k, attached, std::max(2.0 * m0, 2.0 * lip));
      }
    }
  }

  if (m0 > 0) {
    const double budget =
        static_cast<double>(committed) + std::log2(l_attached_max / m0);
    ck.expect_le("doubling-total", -1, static_cast<double>(total_doublings),
                 budget);
  }

  // A certified trace cannot take more committed steps than the worst case
  // the model allows from the stated initial gap: otherwise some row kept
  // going past the point where the target was provably reached.
  if (has_cert_row && ck.cfg.model && ck.cfg.delta > 0 && ck.cfg.delta0 &&
      *ck.cfg.delta0 > 0) {
    try {
      const long worst =
          sufficient_iterations_ggm(*ck.cfg.model, *ck.cfg.delta0, ck.cfg.delta);
      if (committed > worst) {
        ck.fail("iteration-count", -1, static_cast<double>(committed),
                static_cast<double>(worst));
      }
    } catch (const UnattainableAccuracyError&) {
      // The model certifies nothing at this target; no bound to enforce.
    }
  }
}

void check_accuracy_common(const Trace& t, Checker& ck, bool dual) {
  const auto& rows = t.rows;
  const long n = static_cast<long>(rows.size());

  for (long k = 1; k < n; ++k) {
    const double expect = std::ldexp(rows[k - 1].L, rows[k].i_k - 1);
    if (rows[k].L != expect) {
      ck.fail("l-accounting", k, rows[k].L, expect);
    }
  }
  const double l0 = n ? infer_l0(rows[0], true) : 0;
  if (n && !(l0 > 0 && std::isfinite(l0))) {
    ck.fail("curvature-start", 0, l0, 0.0);
  }

  double cap = kInf;
  if (ck.cfg.model && ck.cfg.eps > 0) {
    try {
      cap = ck.cfg.model->gamma_simple(ck.cfg.eps);
    } catch (const Error&) {
      cap = kInf;
    }
  }

  long total_doublings = 0;
  double l_max = 0;
  double rate_lhs = 0;     // sum of f_tilde / (2 L_{j+1})
  double half_weight = 0;  // sum of         1 / (2 L_{j+1})
  for (long k = 0; k < n; ++k) {
    const auto& r = rows[k];
    total_doublings += r.i_k;
    l_max = std::max(l_max, r.L);
    if (std::isfinite(cap)) {
      ck.expect_le("curvature-cap", k, r.L, std::max(l0, cap));
    }
    if (dual) {
      rate_lhs += 0.5 * r.f_tilde / r.L;
      half_weight += 0.5 / r.L;
      if (ck.cfg.eps > 0 && !std::isnan(r.phi_star)) {
        ck.expect_le("rate-sum", k, rate_lhs,
                     r.phi_star + half_weight * 0.5 * ck.cfg.eps);
      }
    }
  }

  if (n && l0 > 0) {
    const double budget = static_cast<double>(n) + std::log2(2.0 * l_max / l0);
    ck.expect_le("doubling-total", -1, static_cast<double>(total_doublings),
                 budget);
  }
}

}  // namespace

VerifyReport verify_trace(const Trace& t, const VerifyConfig& cfg) {
  VerifyReport rep;
  rep.rows = static_cast<long>(t.rows.size());
  rep.method = cfg.method.empty() ? detect_method(t) : cfg.method;
  if (rep.method != "ggm" && rep.method != "pgm" && rep.method != "dgm" &&
      rep.method != "ufgm") {
    throw ConfigError("verify_trace: unknown method '" + rep.method + "'");
  }

  Checker ck{cfg, rep.violations};
  for (long k = 0; k < rep.rows; ++k) {
    if (t.rows[k].k != k || t.rows[k].i_k < 0) {
      ck.fail("row-indexing", k, static_cast<double>(t.rows[k].k),
              static_cast<double>(k));
    }
  }

  if (rep.method == "ufgm") {
    check_ufgm(t, ck);
  } else if (rep.method == "ggm") {
    check_ggm(t, ck);
  } else {
    check_accuracy_common(t, ck, rep.method == "dgm");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Benchmark harness

namespace {

std::string eps_tag(double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", eps);
  std::string s(buf);
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return s;
}

RunReport dispatch_solve(const std::string& method, const CompositeProblem& p,
                         const SolverConfig& cfg) {
  if (method == "ggm") return ggm_solve(p, cfg);
  if (method == "pgm") return pgm_solve(p, cfg);
  if (method == "dgm") return dgm_solve(p, cfg);
  if (method == "ufgm") return ufgm_solve(p, cfg);
  throw ConfigError("unknown method '" + method + "'");
}

}  // namespace

std::string report_json(const BenchmarkCell& cell) {
  nlohmann::ordered_json j;
  j["problem"] = cell.problem;
  j["method"] = cell.method;
  j["eps"] = cell.eps;
  j["sufficient_k"] = cell.sufficient_k;
  j["achieved_k"] = cell.achieved_k;
  nlohmann::ordered_json viols = nlohmann::ordered_json::array();
  for (const auto& v : cell.violations) {
    nlohmann::ordered_json jv;
    jv["name"] = v.name;
    jv["k"] = v.k;
    jv["lhs"] = v.lhs;
    jv["rhs"] = v.rhs;
    viols.push_back(jv);
  }
  j["violations"] = viols;
  if (!cell.error.empty()) j["error"] = cell.error;
  return j.dump(2);
}

std::vector<BenchmarkCell> run_benchmark(const CompositeProblem& p,
                                         const std::vector<std::string>& methods,
                                         const std::vector<double>& eps_values,
                                         const std::string& out_dir,
                                         const SolverConfig& base_cfg) {
  std::filesystem::create_directories(out_dir);
  std::vector<BenchmarkCell> cells;

  for (const auto& method : methods) {
    for (double eps : eps_values) {
      BenchmarkCell cell;
      cell.problem = p.name();
      cell.method = method;
      cell.eps = eps;
      try {
        SolverConfig cfg = base_cfg;
        if (method == "ggm") {
          cfg.delta = eps;
        } else {
          cfg.eps = eps;
        }
        RunReport run = dispatch_solve(method, p, cfg);
        cell.achieved_k = run.achieved_k;

        const auto& model = p.known_model();
        std::optional<double> D =
            cfg.d_hint ? cfg.d_hint : p.distance_to_optimum();
        // The known optimum is the composite one; it bounds the initial gap
        // of the constrained smooth method only when the additive part is an
        // indicator (the method ignores a finite regularizer).
        std::optional<double> delta0;
        if (p.known_optimum() && p.psi().is_indicator()) {
          delta0 = p.eval(p.x0()).f_tilde - p.known_optimum()->f_tilde;
        }
        if (model) {
          try {
            if (method == "ggm" && delta0 && *delta0 > 0) {
              cell.sufficient_k = sufficient_iterations_ggm(*model, *delta0, eps);
            } else if (method == "ufgm" && D) {
              cell.sufficient_k = sufficient_iterations_fast(*model, *D, eps);
            } else if ((method == "pgm" || method == "dgm") && D) {
              cell.sufficient_k = sufficient_iterations_simple(*model, *D, eps);
            }
          } catch (const UnattainableAccuracyError&) {
            cell.sufficient_k = -1;
          }
        }

        const std::string stem = p.name() + "_" + method + "_" + eps_tag(eps);
        cell.trace_path = out_dir + "/" + stem + "_trace.csv";
        write_trace_csv(cell.trace_path, run.trace);

        VerifyConfig vc;
        vc.method = method;
        vc.eps = method == "ggm" ? 0 : eps;
        vc.delta = method == "ggm" ? eps : 0;
        if (model) vc.model = *model;
        vc.delta0 = delta0;
        vc.check_tol = base_cfg.check_tol;
        cell.violations = verify_trace(run.trace, vc).violations;

        cell.report_path = out_dir + "/" + stem + "_report.json";
        std::ofstream out(cell.report_path);
        if (!out) throw ConfigError("cannot open " + cell.report_path);
        out << report_json(cell) << "\n";
      } catch (const std::exception& ex) {
        cell.error = ex.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace ucopt
