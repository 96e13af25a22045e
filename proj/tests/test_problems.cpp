#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ucopt/errors.hpp"
#include "ucopt/problem.hpp"
#include "ucopt/prox.hpp"

using namespace ucopt;

namespace {

// Central finite differences against the oracle gradient.
void check_gradient(const CompositeProblem& p, const Vec& x, double tol) {
  Vec g;
  p.f_grad(x, g);
  const double h = 1e-6;
  for (int i = 0; i < p.dim(); ++i) {
    Vec e = Vec::Zero(p.dim());
    e[i] = h;
    const double fd = (p.f_value(x + e) - p.f_value(x - e)) / (2.0 * h);
    CHECK(g[i] == doctest::Approx(fd).epsilon(tol).scale(1.0));
  }
}

Vec random_in_box(const CompositeProblem& p, std::mt19937_64& rng) {
  Vec x(p.dim());
  for (int i = 0; i < p.dim(); ++i) {
    std::uniform_real_distribution<double> u(p.sample_lo()[i], p.sample_hi()[i]);
    x[i] = u(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("catalog lists the built-in instances") {
  auto names = builtin_problem_names();
  for (const char* want : {"quadratic", "l1_quadratic", "box_quadratic",
                           "simplex_quadratic", "hoelder", "example_1_1",
                           "linear"}) {
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  }
  CHECK_THROWS_AS(builtin_problem("no_such_problem", 3), CatalogError);
}

TEST_CASE("catalog oracles match finite differences") {
  std::mt19937_64 rng(7);
  for (const auto& name : builtin_problem_names()) {
    CompositeProblem p = builtin_problem(name, 4);
    CAPTURE(name);
    for (int rep = 0; rep < 3; ++rep) {
      Vec x = random_in_box(p, rng);
      // Keep away from the kink of the fractional-power terms.
      for (int i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) < 0.05) x[i] = 0.05;
      }
      check_gradient(p, x, 1e-5);
    }
  }
}

TEST_CASE("known optima satisfy the first-order conditions") {
  for (const auto& name : builtin_problem_names()) {
    CompositeProblem p = builtin_problem(name, 5);
    CAPTURE(name);
    if (!p.known_optimum()) continue;
    CHECK(first_order_residual(p, p.known_optimum()->x) <= 1e-8);
    auto d = p.distance_to_optimum();
    REQUIRE(d.has_value());
    CHECK(*d >= 0.0);
  }
}

TEST_CASE("curvature models dominate sampled chord gaps") {
  // The installed model must upper-bound the normalized chord gap of its
  // oracle: |a f(x) + (1-a) f(y) - f(ax + (1-a)y)| / (a(1-a)) <= mu(|x-y|).
  std::mt19937_64 rng(11);
  for (const auto& name : {"quadratic", "hoelder", "example_1_1"}) {
    CompositeProblem p = builtin_problem(name, 3);
    REQUIRE(p.known_model().has_value());
    const auto& m = *p.known_model();
    CAPTURE(name);
    for (int rep = 0; rep < 200; ++rep) {
      Vec x = random_in_box(p, rng), y = random_in_box(p, rng);
      const double dist = p.geometry().norm(x - y);
      if (dist == 0.0) continue;
      const double cap = m.mu_hat(dist);
      for (double a : {0.2, 0.5, 0.8}) {
        const double gap = std::abs(a * p.f_value(x) + (1 - a) * p.f_value(y) -
                                    p.f_value(a * x + (1 - a) * y)) /
                           (a * (1 - a));
        CHECK(gap <= cap * (1.0 + 1e-9) + 1e-12);
      }
    }
  }
}

TEST_CASE("shifted quadratic with l1 term has the soft-threshold optimum") {
  CompositeProblem p = builtin_problem("l1_quadratic", 5,
                                       R"({"L": 2.0, "lambda": 0.3})");
  REQUIRE(p.known_optimum());
  const Vec& xs = p.known_optimum()->x;
  for (int i = 0; i < 5; ++i) {
    const double b = double(i % 5) - 2.0;  // catalog shift pattern
    const double expect = std::copysign(std::max(0.0, std::abs(b) - 0.15), b);
    CHECK(xs[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("catalog parameters are validated and unknown keys rejected") {
  CHECK_THROWS_AS(builtin_problem("quadratic", 3, R"({"LL": 1})"), ConfigError);
  CHECK_THROWS_AS(builtin_problem("quadratic", 3, R"({"L": -1})"), CatalogError);
  CHECK_THROWS_AS(builtin_problem("hoelder", 3, R"({"nu": 0.0})"), CatalogError);
  CHECK_THROWS_AS(builtin_problem("hoelder", 3, R"({"nu": 2.0})"), CatalogError);
  CHECK_THROWS_AS(builtin_problem("quadratic", 0), CatalogError);
  CHECK_THROWS_AS(builtin_problem("simplex_quadratic", 3, R"({"prox": "what"})"),
                  CatalogError);
  CHECK_NOTHROW(builtin_problem("quadratic", 3, R"({"L": 2, "b": 0.5})"));
}

TEST_CASE("problem JSON loading") {
  CompositeProblem p = parse_problem_json(R"({
    "problem": "quadratic",
    "dim": 3,
    "params": {"L": 2.0},
    "psi": {"kind": "box", "lo": -1.0, "hi": 1.0},
    "x0": [0.5, 0.5, 0.5]
  })");
  CHECK(p.dim() == 3);
  CHECK(p.psi().kind == PsiSpec::Kind::kBox);
  CHECK(p.x0()[0] == 0.5);
  CHECK(p.f_value(Vec::Zero(3)) == doctest::Approx(0.0));

  // Unknown keys anywhere are rejected.
  CHECK_THROWS_AS(parse_problem_json(R"({"problem": "quadratic", "dim": 2,
                                         "unknown": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_problem_json(R"({"problem": "quadratic", "dim": 2,
                                         "psi": {"kind": "box", "low": 0}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_problem_json(R"({"dim": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_problem_json(R"({"problem": "quadratic"})"), ConfigError);
  CHECK_THROWS_AS(parse_problem_json("not json at all"), ParseError);
}

TEST_CASE("infeasible or ill-sized start points are rejected") {
  CHECK_THROWS_AS(parse_problem_json(R"({"problem": "quadratic", "dim": 2,
                                         "x0": [1, 2, 3]})"),
                  ConfigError);
  // x0 outside an indicator regularizer's domain.
  CHECK_THROWS_AS(parse_problem_json(R"({"problem": "quadratic", "dim": 2,
      "psi": {"kind": "box", "lo": 0.0, "hi": 1.0}, "x0": [2.0, 0.5]})"),
                  ConfigError);
}

TEST_CASE("evaluation bundles the smooth and simple parts") {
  CompositeProblem p = builtin_problem("l1_quadratic", 4, R"({"lambda": 0.5})");
  Vec x = Vec::Constant(4, -0.5);
  auto ev = p.eval(x);
  CHECK(ev.f == doctest::Approx(p.f_value(x)));
  CHECK(ev.psi == doctest::Approx(0.5 * x.lpNorm<1>()));
  CHECK(ev.f_tilde == doctest::Approx(ev.f + ev.psi));
}

TEST_CASE("oracle call counting") {
  CompositeProblem p = builtin_problem("quadratic", 3);
  const long before = p.oracle_calls();
  Vec g;
  p.f_value(p.x0());
  p.f_grad(p.x0(), g);
  p.eval(p.x0());
  CHECK(p.oracle_calls() - before == 3);
}

TEST_CASE("rejecting a wrong claimed optimum") {
  CompositeProblem p = builtin_problem("quadratic", 3, R"({"b": 1.0})");
  CHECK_THROWS_AS(p.set_known_optimum(Vec::Zero(3)), ConfigError);
  CHECK_NOTHROW(p.set_known_optimum(Vec::Ones(3)));
}

TEST_CASE("regularizer values and feasibility") {
  auto geom = ProxGeometry::euclidean(Vec::Zero(2));
  auto box = PsiSpec::box(Vec::Constant(2, 0.0), Vec::Constant(2, 1.0));
  CHECK(box.is_indicator());
  CHECK(box.feasible(Vec::Constant(2, 0.5), geom));
  CHECK_FALSE(box.feasible(Vec::Constant(2, 1.5), geom));
  CHECK(std::isinf(box.value(Vec::Constant(2, 1.5), geom)));
  CHECK(box.value(Vec::Constant(2, 0.5), geom) == 0.0);

  auto l1 = PsiSpec::l1(0.25);
  CHECK_FALSE(l1.is_indicator());
  Vec x(2);
  x << 1.0, -3.0;
  CHECK(l1.value(x, geom) == doctest::Approx(1.0));

  auto ball = PsiSpec::ball(Vec::Zero(2), 1.0);
  CHECK(ball.feasible(Vec::Constant(2, 0.5), geom));
  CHECK_FALSE(ball.feasible(Vec::Constant(2, 0.9), geom));
}

TEST_CASE("simplex projection: closed-form cases") {
  Vec v(3);
  v << 0.3, 0.3, 0.4;  // already on the simplex
  CHECK((project_simplex(v) - v).lpNorm<Eigen::Infinity>() <= 1e-15);

  v << 2.0, 0.0, 0.0;  // projects to a vertex
  Vec pj = project_simplex(v);
  CHECK(pj[0] == doctest::Approx(1.0));
  CHECK(pj[1] == doctest::Approx(0.0));

  v << 0.6, 0.4, -5.0;  // negative coordinate clipped, rest shifted
  pj = project_simplex(v);
  CHECK(pj.sum() == doctest::Approx(1.0));
  CHECK(pj[2] == 0.0);
  CHECK(pj[0] == doctest::Approx(0.6));
  CHECK(pj[1] == doctest::Approx(0.4));
}

TEST_CASE("composite prox solves its optimality conditions") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  auto geom = ProxGeometry::euclidean(Vec::Zero(4));

  for (int rep = 0; rep < 20; ++rep) {
    Vec z(4), c(4);
    for (int i = 0; i < 4; ++i) {
      z[i] = n01(rng);
      c[i] = n01(rng);
    }
    const double M = 0.5 + std::abs(n01(rng));

    // Plain step.
    Vec y = solve_composite_prox(geom, PsiSpec::zero(), z, c, M, 1.0);
    CHECK((y - (z - c / M)).lpNorm<Eigen::Infinity>() <= 1e-12);

    // Soft threshold.
    auto l1 = PsiSpec::l1(0.3);
    y = solve_composite_prox(geom, l1, z, c, M, 1.0);
    for (int i = 0; i < 4; ++i) {
      const double u = z[i] - c[i] / M, t = 0.3 / M;
      const double expect = std::copysign(std::max(0.0, std::abs(u) - t), u);
      CHECK(y[i] == doctest::Approx(expect).epsilon(1e-12));
    }

    // Box clamp.
    auto box = PsiSpec::box(Vec::Constant(4, -0.25), Vec::Constant(4, 0.25));
    y = solve_composite_prox(geom, box, z, c, M, 1.0);
    for (int i = 0; i < 4; ++i) {
      const double u = z[i] - c[i] / M;
      CHECK(y[i] == doctest::Approx(std::clamp(u, -0.25, 0.25)).epsilon(1e-12));
    }

    // Simplex: optimality via variational inequality against vertices.
    auto sx = PsiSpec::simplex();
    y = solve_composite_prox(geom, sx, z.cwiseAbs(), c, M, 1.0);
    CHECK(y.sum() == doctest::Approx(1.0).epsilon(1e-9));
    Vec slope = c + M * (y - z.cwiseAbs());
    const double at_y = slope.dot(y);
    for (int i = 0; i < 4; ++i) {
      CHECK(slope[i] >= at_y - 1e-9);
    }
  }
}

TEST_CASE("entropy prox stays on the simplex and beats vertex competitors") {
  auto geom = ProxGeometry::entropy_simplex(3);
  Vec z(3);
  z << 0.2, 0.3, 0.5;
  Vec c(3);
  c << 1.0, -1.0, 0.0;
  const double M = 2.0;
  Vec y = solve_composite_prox(geom, PsiSpec::zero(), z, c, M, 0.0);
  CHECK(y.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((y.array() > 0).all());
  // Closed form: y_i proportional to z_i exp(-c_i / M).
  Vec w = (z.array() * (-c.array() / M).exp()).matrix();
  w /= w.sum();
  CHECK((y - w).lpNorm<Eigen::Infinity>() <= 1e-12);

  auto objective = [&](const Vec& p) {
    return c.dot(p) + M * geom.bregman(z, p);
  };
  Vec interior = Vec::Constant(3, 1.0 / 3.0);
  CHECK(objective(y) <= objective(interior) + 1e-12);
  CHECK(objective(y) <= objective(w) + 1e-12);
}

TEST_CASE("weighted-norm geometry: matrix prox and capability fences") {
  Mat B(2, 2);
  B << 2.0, 0.5, 0.5, 1.0;
  auto geom = ProxGeometry::euclidean_weighted(B, Vec::Zero(2));
  Vec z(2), c(2);
  z << 1.0, -1.0;
  c << 0.4, 0.2;
  const double M = 1.5;
  // Unregularized minimizer solves M B (y - z) + c = 0.
  Vec y = solve_composite_prox(geom, PsiSpec::zero(), z, c, M, 1.0);
  Vec res = M * (B * (y - z)) + c;
  CHECK(res.lpNorm<Eigen::Infinity>() <= 1e-10);
  // Separable regularizers need the identity norm.
  CHECK_THROWS_AS(solve_composite_prox(geom, PsiSpec::l1(0.1), z, c, M, 1.0),
                  CapabilityError);
  // Non-SPD matrices are rejected up front.
  Mat bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(ProxGeometry::euclidean_weighted(bad, Vec::Zero(2)),
                  ConfigError);
}

TEST_CASE("linear part minimum over the regularizer domain") {
  auto geom = ProxGeometry::euclidean(Vec::Zero(3));
  Vec c(3);
  c << 1.0, -2.0, 0.5;

  auto box = PsiSpec::box(Vec::Constant(3, -1.0), Vec::Constant(3, 1.0));
  auto v = linear_psi_min(geom, box, c, 1.0);
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(-3.5));

  auto sx = PsiSpec::simplex();
  v = linear_psi_min(geom, sx, c, 1.0);
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(-2.0));

  auto ball = PsiSpec::ball(Vec::Zero(3), 2.0);
  v = linear_psi_min(geom, ball, c, 1.0);
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(-2.0 * c.norm()));

  // l1: bounded exactly when the weight dominates every coefficient.
  CHECK(linear_psi_min(geom, PsiSpec::l1(0.5), c, 1.0) == std::nullopt);
  auto small = linear_psi_min(geom, PsiSpec::l1(2.5), c, 1.0);
  REQUIRE(small.has_value());
  CHECK(*small == 0.0);

  // Unbounded linear function without a regularizer.
  CHECK(linear_psi_min(geom, PsiSpec::zero(), c, 0.0) == std::nullopt);

  // Entropy geometry confines everything to the simplex.
  auto ent = ProxGeometry::entropy_simplex(3);
  v = linear_psi_min(ent, PsiSpec::zero(), c, 0.0);
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(-2.0));
}

TEST_CASE("hoelder catalog model constant carries the dimension factor") {
  // Effective constant 2^(1-nu) n^((1-nu)/2) L; at nu = 1 it collapses to L.
  CompositeProblem p = builtin_problem("hoelder", 4, R"({"nu": 1.0, "L": 3.0})");
  REQUIRE(p.known_model());
  CHECK(p.known_model()->mu_hat(1.0) == doctest::Approx(1.5).epsilon(1e-12));

  CompositeProblem q = builtin_problem("hoelder", 4, R"({"nu": 0.5, "L": 1.0})");
  // 2^(1/2) * 4^(1/4) = 2, so mu(1) = 2 / 1.5.
  CHECK(q.known_model()->mu_hat(1.0) == doctest::Approx(2.0 / 1.5).epsilon(1e-12));
}
