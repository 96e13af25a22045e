#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ucopt/bounds.hpp"
#include "ucopt/errors.hpp"
#include "ucopt/problem.hpp"
#include "ucopt/solvers.hpp"
#include "ucopt/trace.hpp"

using namespace ucopt;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  fs::path d = fs::temp_directory_path() / "ucopt_harness_tests";
  fs::create_directories(d);
  return d;
}

bool has_violation(const VerifyReport& rep, const std::string& name, long k) {
  for (const auto& v : rep.violations) {
    if (v.name == name && v.k == k) return true;
  }
  return false;
}

std::string violation_names(const VerifyReport& rep) {
  std::ostringstream os;
  for (const auto& v : rep.violations) os << v.name << "@" << v.k << " ";
  return os.str();
}

int run_cli(const std::string& args, const std::string& out_file = "") {
  std::string cmd = std::string(UCOPT_CLI_PATH) + " " + args;
  cmd += out_file.empty() ? " > /dev/null 2>&1"
                          : (" > " + out_file + " 2>&1");
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("direct gap bounds: closed forms on the quadratic model") {
  CurvatureModel m = CurvatureModel::quadratic(1.0);
  // 2 mu(2 sqrt(D/k)) = 4 D / k.
  CHECK(direct_bound_simple(m, 1.0, 4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(direct_bound_simple(m, 2.5, 10) == doctest::Approx(1.0).epsilon(1e-12));
  // (k+1) mu(2 (2/(k+1))^{3/2} sqrt(D)) = 16 D / (k+1)^2.
  CHECK(direct_bound_fast(m, 1.0, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(direct_bound_fast(m, 1.0, 7) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(direct_bound_simple(m, 0.0, 4), DomainError);
  CHECK_THROWS_AS(direct_bound_simple(m, 1.0, 0), DomainError);
  CHECK_THROWS_AS(direct_bound_fast(m, -1.0, 4), DomainError);
  CHECK_THROWS_AS(direct_bound_fast(m, 1.0, -2), DomainError);
}

TEST_CASE("sufficient iteration counts are minimal") {
  CurvatureModel quad = CurvatureModel::quadratic(1.0);
  CHECK(sufficient_iterations_simple(quad, 1.0, 1.0) == 4);
  CHECK(direct_bound_simple(quad, 1.0, 3) > 1.0);
  // The fast bound is 16 D / (k+1)^2; targets sit off the exact boundary so
  // the count is stable against roundoff in the radius powers.
  CHECK(sufficient_iterations_fast(quad, 1.0, 1.001) == 3);
  CHECK(direct_bound_fast(quad, 1.0, 2) > 1.001);
  CHECK(sufficient_iterations_fast(quad, 1.0, 0.3) == 7);
  CHECK(direct_bound_fast(quad, 1.0, 6) > 0.3);

  // Nonsmooth end of the range: mu(t) = t, so the simple bound is 4 sqrt(D/k).
  CurvatureModel ns = CurvatureModel::hoelder(0.0, 1.0);
  CHECK(sufficient_iterations_simple(ns, 1.0, 1.0) == 16);
  CHECK(direct_bound_simple(ns, 1.0, 15) > 1.0);

  CHECK_THROWS_AS(sufficient_iterations_simple(quad, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(sufficient_iterations_fast(quad, 1.0, -1.0), DomainError);
}

TEST_CASE("gradient-target iteration count: quadratic worst case") {
  CurvatureModel m = CurvatureModel::quadratic(1.0);
  // N sigma(2^{5/2} delta0 / (N delta)) = 8 delta0^2 / (N delta^2) < delta0:
  // strictly more than 800 iterations at delta0 = 1, delta = 0.1.
  CHECK(sufficient_iterations_ggm(m, 1.0, 0.1) == 801);
  const double c = std::pow(2.0, 2.5) * 1.0 / 0.1;
  CHECK(800.0 * m.sigma_hat(c / 800.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(sufficient_iterations_ggm(m, 0.0, 0.1), DomainError);
  CHECK_THROWS_AS(sufficient_iterations_ggm(m, 1.0, 0.0), DomainError);
}

TEST_CASE("targets beyond a model's reach are reported, not looped on") {
  // mu(t) = t makes N sigma(c/N) = c independent of N: unattainable whenever
  // c = 2^{5/2} delta0/delta >= delta0.
  CurvatureModel ns = CurvatureModel::hoelder(0.0, 1.0);
  CHECK_THROWS_AS(sufficient_iterations_ggm(ns, 1.0, 0.1),
                  UnattainableAccuracyError);
  CHECK(sufficient_iterations_ggm(ns, 1.0, 10.0) == 1);

  // A radius-limited model certifies nothing until the queried radius
  // 2 sqrt(D/k) fits under the limit, which here needs more iterations than
  // the accuracy alone would.
  CurvatureModel lim = CurvatureModel::quadratic(1.0, 0.11);
  CHECK(sufficient_iterations_simple(CurvatureModel::quadratic(1.0), 1.0,
                                     0.02) == 200);
  CHECK(sufficient_iterations_simple(lim, 1.0, 0.02) == 331);
  CHECK(sufficient_iterations_simple(lim, 1.0, 1e-9) ==
        sufficient_iterations_simple(CurvatureModel::quadratic(1.0), 1.0,
                                     1e-9));

  // Counts past the 2^60 search cap surface as the same error.
  CHECK_THROWS_AS(
      sufficient_iterations_simple(CurvatureModel::quadratic(1.0), 1.0, 1e-30),
      UnattainableAccuracyError);
}

TEST_CASE("clean traces of all four methods verify with model caps") {
  CompositeProblem p = builtin_problem("quadratic", 10);
  CurvatureModel model = CurvatureModel::quadratic(1.0);

  SolverConfig scfg;
  scfg.delta = 0.1;
  RunReport ggm = ggm_solve(p, scfg);
  VerifyConfig vc;
  vc.delta = 0.1;
  vc.model = model;
  vc.delta0 = p.eval(p.x0()).f_tilde - p.known_optimum()->f_tilde;
  VerifyReport rep = verify_trace(ggm.trace, vc);
  CHECK(rep.method == "ggm");
  CHECK_MESSAGE(rep.passed(), violation_names(rep));

  SolverConfig acfg;
  acfg.eps = 1e-2;
  for (auto* solver : {&pgm_solve, &dgm_solve, &ufgm_solve}) {
    RunReport r = (*solver)(p, acfg);
    VerifyConfig av;
    av.eps = acfg.eps;
    av.model = model;
    VerifyReport arep = verify_trace(r.trace, av);
    CHECK(arep.method == r.method);  // detected from populated columns
    CHECK(arep.rows == static_cast<long>(r.trace.rows.size()));
    CHECK_MESSAGE(arep.passed(), r.method << ": " << violation_names(arep));
  }

  VerifyConfig unknown;
  unknown.method = "newton";
  CHECK_THROWS_AS(verify_trace(ggm.trace, unknown), ConfigError);
}

TEST_CASE("corrupted fast-method traces are pinpointed") {
  CompositeProblem p = builtin_problem("quadratic", 10);
  SolverConfig cfg;
  cfg.eps = 1e-2;
  Trace clean = ufgm_solve(p, cfg).trace;
  REQUIRE(clean.rows.size() >= 7);
  VerifyConfig vc;
  vc.eps = cfg.eps;

  CHECK(verify_trace(clean, vc).passed());

  SUBCASE("raised step fraction breaks monotonicity") {
    Trace t = clean;
    t.rows[5].tau += 0.2;
    VerifyReport rep = verify_trace(t, vc);
    CHECK(has_violation(rep, "tau-monotone", 5));
  }
  SUBCASE("deflated estimate minimum breaks the certificate") {
    Trace t = clean;
    t.rows[3].phi_star =
        t.rows[3].A * (t.rows[3].f_tilde - 0.5 * cfg.eps) - 1.0;
    VerifyReport rep = verify_trace(t, vc);
    CHECK(has_violation(rep, "estimate-certificate", 3));
  }
  SUBCASE("off-ladder constant breaks the doubling bookkeeping") {
    Trace t = clean;
    t.rows[2].L *= 3.0;
    VerifyReport rep = verify_trace(t, vc);
    CHECK(has_violation(rep, "l-accounting", 2));
  }
  SUBCASE("shuffled row index is flagged") {
    Trace t = clean;
    t.rows[4].k = 7;
    VerifyReport rep = verify_trace(t, vc);
    CHECK(has_violation(rep, "row-indexing", 4));
  }
}

TEST_CASE("corrupted smooth-method trace fails the descent margin") {
  CompositeProblem p = builtin_problem("quadratic", 10);
  SolverConfig cfg;
  cfg.delta = 0.1;
  Trace clean = ggm_solve(p, cfg).trace;
  REQUIRE(clean.rows.size() >= 2);
  VerifyConfig vc;
  vc.delta = 0.1;
  CHECK(verify_trace(clean, vc).passed());

  Trace t = clean;
  t.rows[1].f = t.rows[0].f + 1.0;  // claims ascent across the accepted step
  VerifyReport rep = verify_trace(t, vc);
  CHECK(has_violation(rep, "descent-margin", 0));
}

TEST_CASE("corrupted dual-method trace fails the rate certificate") {
  CompositeProblem p = builtin_problem("quadratic", 10);
  SolverConfig cfg;
  cfg.eps = 1e-2;
  Trace clean = dgm_solve(p, cfg).trace;
  REQUIRE(clean.rows.size() >= 5);
  VerifyConfig vc;
  vc.eps = cfg.eps;
  CHECK(verify_trace(clean, vc).passed());

  Trace t = clean;
  t.rows[3].f_tilde += 1e6;
  VerifyReport rep = verify_trace(t, vc);
  CHECK(has_violation(rep, "rate-sum", 3));
}

TEST_CASE("certified trace longer than the model allows is flagged") {
  // Hand-built gradient-norm-certified trace: ten committed unit steps with
  // valid bookkeeping, then a certifying row.  A quadratic model with a small
  // claimed initial gap proves at most five committed steps were needed.
  Trace t;
  for (long k = 0; k < 10; ++k) {
    IterationRecord r;
    r.k = k;
    r.i_k = 1;  // one doubling per round keeps the committed constant at 1
    r.L = 1.0;
    r.f = 10.0 - 0.6 * static_cast<double>(k);
    r.f_tilde = r.f;
    r.grad_map_norm = 1.0;
    r.step_norm = 1.0;
    t.rows.push_back(r);
  }
  IterationRecord cert;
  cert.k = 10;
  cert.i_k = 0;
  cert.L = 1.0;
  cert.f = 3.8;
  cert.f_tilde = 3.8;
  cert.grad_map_norm = 0.05;
  cert.step_norm = 0.05;
  t.rows.push_back(cert);

  VerifyConfig vc;
  vc.method = "ggm";
  vc.delta = 0.1;
  vc.model = CurvatureModel::quadratic(1.0);
  vc.delta0 = 0.005;  // sufficient count 5 < 10 committed rows
  VerifyReport rep = verify_trace(t, vc);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].name == "iteration-count");
  CHECK(rep.violations[0].lhs == 10.0);
  CHECK(rep.violations[0].rhs == 5.0);

  // The same trace with an honest initial gap passes.
  vc.delta0 = 10.0;
  CHECK(verify_trace(t, vc).passed());
}

TEST_CASE("trace CSV round-trip preserves every bit") {
  CompositeProblem p = builtin_problem("l1_quadratic", 6);
  SolverConfig cfg;
  cfg.eps = 1e-3;
  Trace orig = ufgm_solve(p, cfg).trace;
  REQUIRE_FALSE(orig.rows.empty());

  fs::path path = work_dir() / "roundtrip.csv";
  write_trace_csv(path.string(), orig);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,i_k,L,f,f_tilde,grad_map_norm,tau,a,A,phi_star,step_norm");
  in.close();

  Trace back = read_trace_csv(path.string());
  REQUIRE(back.rows.size() == orig.rows.size());
  auto same = [](double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
  };
  for (size_t i = 0; i < orig.rows.size(); ++i) {
    const auto& a = orig.rows[i];
    const auto& b = back.rows[i];
    CHECK(a.k == b.k);
    CHECK(a.i_k == b.i_k);
    CHECK(same(a.L, b.L));
    CHECK(same(a.f, b.f));
    CHECK(same(a.f_tilde, b.f_tilde));
    CHECK(same(a.grad_map_norm, b.grad_map_norm));
    CHECK(same(a.tau, b.tau));
    CHECK(same(a.a, b.a));
    CHECK(same(a.A, b.A));
    CHECK(same(a.phi_star, b.phi_star));
    CHECK(same(a.step_norm, b.step_norm));
  }
  // Columns the fast method does not fill stay empty in the file.
  CHECK(std::isnan(back.rows[0].grad_map_norm));
}

TEST_CASE("trace CSV reader rejects malformed input") {
  fs::path dir = work_dir();
  auto write = [&](const char* name, const std::string& text) {
    fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  };
  CHECK_THROWS_AS(read_trace_csv((dir / "absent.csv").string()), Error);
  CHECK_THROWS_AS(read_trace_csv(write("bad_header.csv", "a,b,c\n1,2,3\n")),
                  ParseError);
  CHECK_THROWS_AS(
      read_trace_csv(write(
          "bad_fields.csv",
          "k,i_k,L,f,f_tilde,grad_map_norm,tau,a,A,phi_star,step_norm\n1,2\n")),
      ParseError);
  CHECK_THROWS_AS(
      read_trace_csv(write("bad_number.csv",
                           "k,i_k,L,f,f_tilde,grad_map_norm,tau,a,A,phi_star,"
                           "step_norm\n0,0,x,,,,,,,,\n")),
      ParseError);
}

TEST_CASE("benchmark cell report serializes with a fixed key layout") {
  BenchmarkCell cell;
  cell.problem = "quadratic";
  cell.method = "ufgm";
  cell.eps = 0.5;
  cell.sufficient_k = 12;
  cell.achieved_k = 7;
  cell.violations.push_back({"tau-monotone", 5, 0.7, 0.5});

  auto j = nlohmann::ordered_json::parse(report_json(cell));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"problem", "method", "eps",
                                         "sufficient_k", "achieved_k",
                                         "violations"});
  CHECK(j["eps"].get<double>() == 0.5);
  CHECK(j["violations"].size() == 1);
  CHECK(j["violations"][0]["name"] == "tau-monotone");
  CHECK(j["violations"][0]["k"] == 5);
  CHECK(j["violations"][0]["lhs"].get<double>() == 0.7);

  cell.error = "boom";
  auto je = nlohmann::ordered_json::parse(report_json(cell));
  CHECK(je.contains("error"));
  CHECK(je["error"] == "boom");
}

TEST_CASE("benchmark grid produces verified artifacts") {
  CompositeProblem p = builtin_problem("quadratic", 6);
  fs::path out = work_dir() / "bench";
  fs::remove_all(out);
  auto cells = run_benchmark(p, {"pgm", "ufgm"}, {1e-1, 1e-2}, out.string());
  REQUIRE(cells.size() == 4);
  for (const auto& c : cells) {
    CAPTURE(c.method);
    CAPTURE(c.eps);
    CHECK(c.error.empty());
    CHECK(c.violations.empty());
    REQUIRE(c.sufficient_k > 0);  // model and distance are known here
    CHECK(c.achieved_k >= 0);
    CHECK(c.achieved_k <= c.sufficient_k);
    CHECK(fs::exists(c.trace_path));
    CHECK(fs::exists(c.report_path));
    // The written report is the serialized cell.
    auto j = nlohmann::ordered_json::parse(slurp(c.report_path));
    CHECK(j["method"] == c.method);
    CHECK(j["sufficient_k"].get<long>() == c.sufficient_k);
    CHECK(j["achieved_k"].get<long>() == c.achieved_k);
    // The trace on disk re-verifies from scratch.
    VerifyConfig vc;
    vc.eps = c.eps;
    vc.model = CurvatureModel::quadratic(1.0);
    CHECK(verify_trace(read_trace_csv(c.trace_path), vc).passed());
  }
  CHECK(cells[0].achieved_k <= cells[1].achieved_k);  // coarser target stops earlier
}

TEST_CASE("unknown benchmark method is a recorded error, not a crash") {
  CompositeProblem p = builtin_problem("quadratic", 4);
  fs::path out = work_dir() / "bench_err";
  auto cells = run_benchmark(p, {"newton"}, {1e-1}, out.string());
  REQUIRE(cells.size() == 1);
  CHECK_FALSE(cells[0].error.empty());
  CHECK(cells[0].achieved_k == -1);
}

TEST_CASE("command line: solve, verify and exit codes") {
  fs::path dir = work_dir();
  std::string trace = (dir / "cli_trace.csv").string();
  std::string log = (dir / "cli_log.txt").string();

  CHECK(run_cli("solve --method ufgm --problem quadratic --dim 8 --eps 1e-3"
                " --trace " + trace, log) == 0);
  CHECK(fs::exists(trace));
  std::string out = slurp(log);
  CHECK(out.find("accuracy-certified") != std::string::npos);
  CHECK(out.find("method:       ufgm") != std::string::npos);

  CHECK(run_cli("verify --trace " + trace + " --eps 1e-3 --model quadratic"
                " --l 1") == 0);

  // Tampering makes verify exit 1.
  Trace t = read_trace_csv(trace);
  REQUIRE(t.rows.size() >= 3);
  t.rows[2].L *= 3.0;
  std::string bad = (dir / "cli_trace_bad.csv").string();
  write_trace_csv(bad, t);
  CHECK(run_cli("verify --trace " + bad + " --eps 1e-3", log) == 1);
  CHECK(slurp(log).find("l-accounting") != std::string::npos);

  // Hitting the iteration cap without a certificate exits 1.
  CHECK(run_cli("solve --method pgm --problem quadratic --dim 8 --eps 1e-9"
                " --max-iters 3") == 1);

  // Usage errors exit 2.
  CHECK(run_cli("solve --method newton") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("bound --method ggm") == 2);  // missing --delta/--delta0
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("command line: bound output matches the frozen counts") {
  fs::path dir = work_dir();
  std::string log = (dir / "cli_bound.txt").string();
  CHECK(run_cli("bound --method simple --model quadratic --l 1 --d 1 --eps 1",
                log) == 0);
  CHECK(slurp(log).find("sufficient k: 4") != std::string::npos);
  CHECK(run_cli("bound --method fast --model quadratic --l 1 --d 1"
                " --eps 1.001", log) == 0);
  CHECK(slurp(log).find("sufficient k: 3") != std::string::npos);
  CHECK(run_cli("bound --method ggm --model quadratic --l 1 --delta0 1"
                " --delta 0.1", log) == 0);
  CHECK(slurp(log).find("sufficient k: 801") != std::string::npos);
  // Unattainable targets surface as a clean error, exit 2.
  CHECK(run_cli("bound --method ggm --model hoelder --nu 0 --l 1 --delta0 1"
                " --delta 0.1", log) == 2);
  CHECK(slurp(log).find("error:") != std::string::npos);
}
