// Command-line harness for the composite-optimization toolkit: run the
// solvers on catalog or JSON-specified problems, query curvature gauges and
// iteration bounds, sample curvature curves, and check traces.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ucopt/bounds.hpp"
#include "ucopt/curvature.hpp"
#include "ucopt/errors.hpp"
#include "ucopt/estimate.hpp"
#include "ucopt/problem.hpp"
#include "ucopt/solvers.hpp"
#include "ucopt/trace.hpp"

namespace {

using namespace ucopt;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

CompositeProblem load_problem(const std::string& spec, int dim,
                              const std::string& params) {
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
    return load_problem_json(spec);
  }
  return builtin_problem(spec, dim, params.empty() ? "{}" : params);
}

// Flags shared by the model-consuming subcommands.  "sum" is the two-class
// mix: a nonsmooth part with constant l0 plus a quadratic part with
// constant l1.
struct ModelFlags {
  std::string model = "quadratic";
  double l = 1.0;
  double nu = 0.5;
  double l0 = 1.0;
  double l1 = 1.0;
  int dim = 10;
  std::string curve_file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model,
                    "quadratic | hoelder | sum | example11 | curve")
        ->check(CLI::IsMember({"quadratic", "hoelder", "sum", "example11",
                               "curve"}));
    cmd->add_option("--l", l, "constant of the quadratic/hoelder model");
    cmd->add_option("--nu", nu, "gradient Hoelder exponent in [0,1]");
    cmd->add_option("--l0", l0, "nonsmooth-part constant of the sum model");
    cmd->add_option("--l1", l1, "quadratic-part constant of the sum model");
    cmd->add_option("--dim", dim, "dimension (example11 model only)");
    cmd->add_option("--curve-file", curve_file, "sampled curve CSV");
  }

  CurvatureModel build() const {
    if (model == "quadratic") return CurvatureModel::quadratic(l);
    if (model == "hoelder") return CurvatureModel::hoelder(nu, l);
    if (model == "sum") {
      return CurvatureModel::sum({CurvatureModel::hoelder(0.0, l0),
                                  CurvatureModel::quadratic(l1)});
    }
    if (model == "example11") {
      const double c = std::sqrt(2.0) * std::pow(double(dim), 0.25);
      return CurvatureModel::sum({CurvatureModel::quadratic(1.0),
                                  CurvatureModel::hoelder(0.5, c)});
    }
    if (model == "curve") {
      if (curve_file.empty()) {
        throw ConfigError("--model curve requires --curve-file");
      }
      return CurvatureModel::empirical(read_curve_csv(curve_file));
    }
    throw ConfigError("unknown model '" + model + "'");
  }
};

int cmd_solve(const std::string& method, const std::string& problem, int dim,
              const std::string& params, const SolverConfig& cfg,
              const std::string& trace_path) {
  CompositeProblem p = load_problem(problem, dim, params);
  RunReport r;
  if (method == "ggm") {
    r = ggm_solve(p, cfg);
  } else if (method == "pgm") {
    r = pgm_solve(p, cfg);
  } else if (method == "dgm") {
    r = dgm_solve(p, cfg);
  } else {
    r = ufgm_solve(p, cfg);
  }

  std::cout << "method:       " << r.method << "\n"
            << "problem:      " << r.problem << " (dim " << p.dim() << ")\n"
            << "stop:         " << to_string(r.reason) << "\n"
            << "iterations:   " << r.iterations << "\n";
  if (r.achieved_k >= 0) std::cout << "achieved k:   " << r.achieved_k << "\n";
  if (!std::isnan(r.certified_gap)) {
    std::cout << "certified gap: " << num(r.certified_gap) << "\n";
  }
  if (!std::isnan(r.grad_map_norm_out)) {
    std::cout << "mapped-gradient norm: " << num(r.grad_map_norm_out) << "\n";
  }
  if (!std::isnan(r.m_bar)) {
    std::cout << "attached constant: " << num(r.m_bar) << "\n";
  }
  std::cout << "f_tilde(out): " << num(r.f_tilde_out) << "\n"
            << "oracle calls: " << r.oracle_calls << "\n"
            << "doublings:    " << r.total_doublings << "\n"
            << "L0 / L_final: " << num(r.l0) << " / " << num(r.l_final) << "\n";
  if (!trace_path.empty()) {
    write_trace_csv(trace_path, r.trace);
    std::cout << "trace:        " << trace_path << "\n";
  }
  return r.reason == StopReason::kMaxIters ? 1 : 0;
}

int cmd_gauge(const ModelFlags& mf, double eps) {
  CurvatureModel m = mf.build();
  std::cout << "model:  " << m.describe() << "\n"
            << "eps:    " << num(eps) << "\n"
            << "s      (curvature radius at eps):  " << num(m.invert_mu(eps))
            << "\n"
            << "s_hat  (companion radius at eps):  " << num(m.invert_sigma(eps))
            << "\n"
            << "gamma     = eps / s(eps/2)^2:      " << num(m.gamma_simple(eps))
            << "\n"
            << "gamma_hat = 2 eps / s_hat(eps/2)^2: " << num(m.gamma_hat(eps))
            << "\n";
  return 0;
}

int cmd_bound(const std::string& kind, const ModelFlags& mf, double d,
              double eps, double delta, double delta0) {
  CurvatureModel m = mf.build();
  if (kind == "ggm") {
    if (!(delta > 0) || !(delta0 > 0)) {
      throw ConfigError("bound --method ggm needs --delta and --delta0");
    }
    long n = sufficient_iterations_ggm(m, delta0, delta);
    std::cout << "model:        " << m.describe() << "\n"
              << "delta0:       " << num(delta0) << "\n"
              << "delta:        " << num(delta) << "\n"
              << "sufficient k: " << n << "\n";
    return 0;
  }
  if (!(d > 0) || !(eps > 0)) {
    throw ConfigError("bound --method " + kind + " needs --d and --eps");
  }
  long k = kind == "fast" ? sufficient_iterations_fast(m, d, eps)
                          : sufficient_iterations_simple(m, d, eps);
  double at_k = kind == "fast" ? direct_bound_fast(m, d, k)
                               : direct_bound_simple(m, d, k);
  std::cout << "model:        " << m.describe() << "\n"
            << "D:            " << num(d) << "\n"
            << "eps:          " << num(eps) << "\n"
            << "sufficient k: " << k << "\n"
            << "bound at k:   " << num(at_k) << "\n";
  return 0;
}

int cmd_estimate(const std::string& problem, int dim, const std::string& params,
                 double tmax, int grid, long samples, int alphas,
                 unsigned long seed, const std::string& out) {
  CompositeProblem p = load_problem(problem, dim, params);
  if (!(tmax > 0)) throw ConfigError("estimate-gcb needs --tmax > 0");
  if (grid < 1) throw ConfigError("estimate-gcb needs --grid >= 1");
  std::vector<double> t_grid(grid);
  for (int i = 0; i < grid; ++i) t_grid[i] = tmax * double(i + 1) / grid;
  long per_bin = std::max(1L, samples / grid);
  EmpiricalCurve curve = estimate_gcb(p, t_grid, per_bin, alphas, seed);
  write_curve_csv(out, curve);
  std::cout << "problem: " << p.name() << " (dim " << p.dim() << ")\n"
            << "grid:    " << grid << " radii up to " << num(tmax) << "\n"
            << "samples: " << per_bin << " pairs per radius, seed " << seed
            << "\n"
            << "curve:   " << out << "\n";
  return 0;
}

int cmd_verify(const std::string& trace_path, const std::string& method,
               double eps, double delta, const std::optional<ModelFlags>& mf,
               std::optional<double> delta0, double tol) {
  Trace t = read_trace_csv(trace_path);
  VerifyConfig vc;
  vc.method = method;
  vc.eps = eps;
  vc.delta = delta;
  if (mf) vc.model = mf->build();
  vc.delta0 = delta0;
  vc.check_tol = tol;
  VerifyReport rep = verify_trace(t, vc);
  std::cout << "trace:  " << trace_path << "\n"
            << "method: " << rep.method << "\n"
            << "rows:   " << rep.rows << "\n";
  if (rep.passed()) {
    std::cout << "result: ok, no violations\n";
    return 0;
  }
  for (const auto& v : rep.violations) {
    std::cout << "violation " << v.name << " at k=" << v.k
              << ": lhs=" << num(v.lhs) << " rhs=" << num(v.rhs) << "\n";
  }
  std::cout << "result: " << rep.violations.size() << " violation(s)\n";
  return 1;
}

int cmd_benchmark(const std::string& problem, int dim,
                  const std::string& params,
                  const std::vector<std::string>& methods,
                  const std::vector<double>& eps_values,
                  const std::string& out_dir, const SolverConfig& base) {
  CompositeProblem p = load_problem(problem, dim, params);
  auto cells = run_benchmark(p, methods, eps_values, out_dir, base);
  std::printf("%-16s %-6s %-10s %12s %12s %10s\n", "problem", "method", "eps",
              "sufficient", "achieved", "violations");
  bool bad = false;
  for (const auto& c : cells) {
    if (!c.error.empty()) {
      std::printf("%-16s %-6s %-10g %12s %12s %10s  error: %s\n",
                  c.problem.c_str(), c.method.c_str(), c.eps, "-", "-", "-",
                  c.error.c_str());
      bad = true;
      continue;
    }
    std::printf("%-16s %-6s %-10g %12ld %12ld %10zu\n", c.problem.c_str(),
                c.method.c_str(), c.eps, c.sufficient_k, c.achieved_k,
                c.violations.size());
    if (!c.violations.empty()) bad = true;
  }
  std::cout << "artifacts: " << out_dir << "\n";
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Universal composite-optimization toolkit: four parameter-free "
      "first-order methods with curvature-based accuracy certificates"};
  app.require_subcommand(1);

  // ---- solve -------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "run a method on a problem");
  std::string method = "ufgm", problem = "quadratic", params, trace_path;
  int dim = 10;
  SolverConfig cfg;
  double d_hint = 0;
  solve->add_option("--method", method, "ggm | pgm | dgm | ufgm")
      ->check(CLI::IsMember({"ggm", "pgm", "dgm", "ufgm"}));
  solve->add_option("--problem", problem, "catalog name or problem JSON path");
  solve->add_option("--dim", dim, "dimension for catalog problems");
  solve->add_option("--params", params, "catalog parameter JSON object");
  solve->add_option("--eps", cfg.eps, "target objective accuracy");
  solve->add_option("--delta", cfg.delta, "target mapped-gradient norm (ggm)");
  solve->add_option("--l0", cfg.l0, "initial curvature guess");
  solve->add_option("--max-iters", cfg.max_iters, "iteration cap");
  solve->add_flag("--aggressive-l", cfg.aggressive_l,
                  "fast method: halve the constant after acceptance");
  solve->add_flag("--proof-indexing", cfg.proof_indexing,
                  "dual method: test at the estimate minimizer");
  solve->add_option("--d", d_hint, "distance budget beta(x0, x*) if known");
  solve->add_option("--check-tol", cfg.check_tol,
                    "relative tolerance of the online certificates");
  solve->add_option("--trace", trace_path, "write the iteration trace CSV here");

  // ---- gauge -------------------------------------------------------------
  auto* gauge = app.add_subcommand(
      "gauge", "accuracy radii and method-constant gauges of a model");
  ModelFlags gauge_mf;
  gauge_mf.attach(gauge);
  double gauge_eps = 0;
  gauge->add_option("--eps", gauge_eps, "accuracy to evaluate at")->required();

  // ---- bound -------------------------------------------------------------
  auto* bound = app.add_subcommand(
      "bound", "iteration counts sufficient for a target accuracy");
  ModelFlags bound_mf;
  bound_mf.attach(bound);
  std::string bound_kind = "simple";
  double bound_d = 0, bound_eps = 0, bound_delta = 0, bound_delta0 = 0;
  bound->add_option("--method", bound_kind, "simple | fast | ggm")
      ->check(CLI::IsMember({"simple", "fast", "ggm"}));
  bound->add_option("--d", bound_d, "distance budget beta(x0, x*)");
  bound->add_option("--eps", bound_eps, "target objective accuracy");
  bound->add_option("--delta", bound_delta, "target mapped-gradient norm (ggm)");
  bound->add_option("--delta0", bound_delta0, "initial objective gap (ggm)");

  // ---- estimate-gcb ------------------------------------------------------
  auto* est = app.add_subcommand(
      "estimate-gcb", "sample a curvature curve of a problem's smooth part");
  std::string est_problem = "quadratic", est_params, est_out;
  int est_dim = 2, est_grid = 32, est_alphas = 9;
  long est_samples = 100000;
  double est_tmax = 0;
  unsigned long est_seed = 12345;
  est->add_option("--problem", est_problem, "catalog name or problem JSON path");
  est->add_option("--dim", est_dim, "dimension (must be <= 10)");
  est->add_option("--params", est_params, "catalog parameter JSON object");
  est->add_option("--tmax", est_tmax, "largest radius on the grid")->required();
  est->add_option("--grid", est_grid, "number of grid radii");
  est->add_option("--samples", est_samples, "total point pairs across the grid");
  est->add_option("--alphas", est_alphas, "interior mixing weights per pair");
  est->add_option("--seed", est_seed, "RNG seed");
  est->add_option("--out", est_out, "output curve CSV path")->required();

  // ---- verify ------------------------------------------------------------
  auto* verify = app.add_subcommand(
      "verify", "replay the inequality checks of a trace CSV");
  std::string v_trace, v_method;
  double v_eps = 0, v_delta = 0, v_tol = 1e-9;
  double v_delta0 = 0;
  ModelFlags v_mf;
  verify->add_option("--trace", v_trace, "trace CSV path")->required();
  verify->add_option("--method", v_method,
                     "ggm | pgm | dgm | ufgm (default: detect from columns)");
  verify->add_option("--eps", v_eps, "accuracy the trace was produced with");
  verify->add_option("--delta", v_delta, "mapped-gradient target (ggm traces)");
  auto* v_model_opt = verify->add_option(
      "--model", v_mf.model, "curvature model enabling the cap checks");
  verify->add_option("--l", v_mf.l, "constant of the quadratic/hoelder model");
  verify->add_option("--nu", v_mf.nu, "gradient Hoelder exponent");
  verify->add_option("--l0", v_mf.l0, "nonsmooth-part constant (sum model)");
  verify->add_option("--l1", v_mf.l1, "quadratic-part constant (sum model)");
  verify->add_option("--dim", v_mf.dim, "dimension (example11 model)");
  verify->add_option("--curve-file", v_mf.curve_file, "sampled curve CSV");
  verify->add_option("--delta0", v_delta0,
                     "initial objective gap (bounds certified trace length)");
  verify->add_option("--tol", v_tol, "relative check tolerance");

  // ---- benchmark ---------------------------------------------------------
  auto* bench = app.add_subcommand(
      "benchmark", "run a method/accuracy grid and check every trace");
  std::string b_problem = "quadratic", b_params, b_out = "bench_out";
  int b_dim = 10;
  std::vector<std::string> b_methods{"ggm", "pgm", "dgm", "ufgm"};
  std::vector<double> b_eps{1e-1, 1e-2};
  SolverConfig b_cfg;
  bench->add_option("--problem", b_problem, "catalog name or problem JSON path");
  bench->add_option("--dim", b_dim, "dimension for catalog problems");
  bench->add_option("--params", b_params, "catalog parameter JSON object");
  bench->add_option("--methods", b_methods, "methods to run")
      ->delimiter(',');
  bench->add_option("--eps", b_eps,
                    "accuracy grid (mapped-gradient targets for ggm)")
      ->delimiter(',');
  bench->add_option("--out", b_out, "artifact directory");
  bench->add_option("--l0", b_cfg.l0, "initial curvature guess");
  bench->add_option("--max-iters", b_cfg.max_iters, "iteration cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit clean, usage errors as 2
  }

  try {
    if (solve->parsed()) {
      if (d_hint > 0) cfg.d_hint = d_hint;
      return cmd_solve(method, problem, dim, params, cfg, trace_path);
    }
    if (gauge->parsed()) return cmd_gauge(gauge_mf, gauge_eps);
    if (bound->parsed()) {
      return cmd_bound(bound_kind, bound_mf, bound_d, bound_eps, bound_delta,
                       bound_delta0);
    }
    if (est->parsed()) {
      return cmd_estimate(est_problem, est_dim, est_params, est_tmax, est_grid,
                          est_samples, est_alphas, est_seed, est_out);
    }
    if (verify->parsed()) {
      std::optional<ModelFlags> mf;
      if (*v_model_opt) mf = v_mf;
      std::optional<double> delta0;
      if (v_delta0 > 0) delta0 = v_delta0;
      return cmd_verify(v_trace, v_method, v_eps, v_delta, mf, delta0, v_tol);
    }
    if (bench->parsed()) {
      return cmd_benchmark(b_problem, b_dim, b_params, b_methods, b_eps, b_out,
                           b_cfg);
    }
  } catch (const InvariantViolationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 2;
}
