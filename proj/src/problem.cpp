#include "ucopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ucopt/errors.hpp"
#include "ucopt/prox.hpp"

namespace ucopt {

namespace {

using nlohmann::json;

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

Vec default_shift(int dim) {
  // Deterministic non-trivial pattern: -2, -1, 0, 1, 2, -2, ...
  Vec b(dim);
  for (int i = 0; i < dim; ++i) b[i] = static_cast<double>(i % 5) - 2.0;
  return b;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

double number_or(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw ConfigError(std::string("parameter '") + key + "' must be a number");
  }
  return obj[key].get<double>();
}

Vec vector_param(const json& value, int dim, const char* key) {
  if (value.is_number()) return Vec::Constant(dim, value.get<double>());
  if (!value.is_array()) {
    throw ConfigError(std::string("parameter '") + key + "' must be a number or an array");
  }
  if (static_cast<int>(value.size()) != dim) {
    throw ConfigError(std::string("parameter '") + key + "' must have length " +
                      std::to_string(dim));
  }
  Vec v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!value[i].is_number()) {
      throw ConfigError(std::string("parameter '") + key + "' must contain numbers");
    }
    v[i] = value[i].get<double>();
  }
  return v;
}

PsiSpec psi_from_json(const json& spec, int dim, const ProxGeometry& geom,
                      bool as_plain_set) {
  const std::string where = as_plain_set ? "q" : "psi";
  if (!spec.is_object()) throw ConfigError(where + ": must be an object");
  if (!spec.contains("kind")) throw ConfigError(where + ": missing 'kind'");
  const std::string kind = spec["kind"].get<std::string>();
  if (as_plain_set && kind == "all") {
    reject_unknown_keys(spec, {"kind"}, where);
    return PsiSpec::zero();
  }
  if (!as_plain_set && kind == "zero") {
    reject_unknown_keys(spec, {"kind"}, where);
    return PsiSpec::zero();
  }
  if (!as_plain_set && kind == "l1") {
    reject_unknown_keys(spec, {"kind", "lambda"}, where);
    if (!spec.contains("lambda")) throw ConfigError("psi l1: missing 'lambda'");
    return PsiSpec::l1(spec["lambda"].get<double>());
  }
  if (kind == "indicator_box" || kind == "box") {
    reject_unknown_keys(spec, {"kind", "lo", "hi"}, where);
    Vec lo = spec.contains("lo") ? vector_param(spec["lo"], dim, "lo")
                                 : Vec::Constant(dim, -1.0);
    Vec hi = spec.contains("hi") ? vector_param(spec["hi"], dim, "hi")
                                 : Vec::Constant(dim, 1.0);
    return PsiSpec::box(std::move(lo), std::move(hi));
  }
  if (kind == "indicator_ball" || kind == "ball") {
    reject_unknown_keys(spec, {"kind", "center", "radius"}, where);
    Vec c = spec.contains("center") ? vector_param(spec["center"], dim, "center")
                                    : Vec::Zero(dim);
    double r = number_or(spec, "radius", 1.0);
    return PsiSpec::ball(std::move(c), r);
  }
  if (kind == "indicator_simplex" || kind == "simplex") {
    reject_unknown_keys(spec, {"kind"}, where);
    return PsiSpec::simplex();
  }
  (void)geom;
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

struct CatalogBuild {
  CompositeProblem problem;
  // Data needed to re-derive a known optimum after psi/q overrides.
  enum class Family { kShiftedQuadratic, kZeroMinimum, kNone } family;
  double L = 1.0;
  Vec b;
};

void install_optimum(CatalogBuild& cb) {
  CompositeProblem& p = cb.problem;
  const PsiSpec& psi = p.psi();
  Vec xs;
  switch (cb.family) {
    case CatalogBuild::Family::kNone:
      return;
    case CatalogBuild::Family::kShiftedQuadratic:
      // argmin of L/2 ||x - b||^2 + psi has closed form per regularizer.
      switch (psi.kind) {
        case PsiSpec::Kind::kZero:
          xs = cb.b;
          break;
        case PsiSpec::Kind::kL1: {
          xs = cb.b;
          double t = psi.lambda / cb.L;
          for (int i = 0; i < xs.size(); ++i) {
            xs[i] = xs[i] > t ? xs[i] - t : (xs[i] < -t ? xs[i] + t : 0.0);
          }
          break;
        }
        case PsiSpec::Kind::kBox:
          xs = cb.b.cwiseMax(psi.lo).cwiseMin(psi.hi);
          break;
        case PsiSpec::Kind::kBall: {
          Vec u = cb.b - psi.ball_center;
          double n = p.geometry().norm(u);
          if (n > psi.ball_radius) u *= psi.ball_radius / n;
          xs = psi.ball_center + u;
          break;
        }
        case PsiSpec::Kind::kSimplex:
          xs = project_simplex(cb.b);
          break;
      }
      break;
    case CatalogBuild::Family::kZeroMinimum: {
      // Smooth part minimized at the origin with gradient 0 there, so the
      // origin stays optimal whenever it is feasible and psi is minimal there.
      Vec zero = Vec::Zero(p.dim());
      bool zero_ok = false;
      switch (psi.kind) {
        case PsiSpec::Kind::kZero:
        case PsiSpec::Kind::kL1:
          zero_ok = true;
          break;
        case PsiSpec::Kind::kBox:
          zero_ok = (psi.lo.array() <= 0).all() && (psi.hi.array() >= 0).all();
          break;
        case PsiSpec::Kind::kBall:
          zero_ok = p.geometry().norm(zero - psi.ball_center) <= psi.ball_radius;
          break;
        case PsiSpec::Kind::kSimplex:
          zero_ok = false;
          break;
      }
      if (!zero_ok) return;
      xs = zero;
      break;
    }
  }
  p.set_known_optimum(std::move(xs), 1e-10);
}

CatalogBuild build_catalog(const std::string& name, int dim, const json& params,
                           const json* psi_override, const json* q_override,
                           const json* x0_override) {
  if (dim < 1) throw CatalogError("builtin_problem: dim must be >= 1");
  const int n = dim;

  CompositeProblem::Oracle oracle;
  PsiSpec psi = PsiSpec::zero();
  PsiSpec q = PsiSpec::zero();
  Vec x0 = Vec::Ones(n);
  Vec lo_box = Vec::Constant(n, -1.0), hi_box = Vec::Constant(n, 1.0);
  std::optional<CurvatureModel> model;
  auto family = CatalogBuild::Family::kNone;
  double L = 1.0;
  Vec b = Vec::Zero(n);
  ProxGeometry geometry = ProxGeometry::euclidean(Vec::Zero(n));

  if (name == "quadratic" || name == "l1_quadratic" || name == "box_quadratic" ||
      name == "simplex_quadratic") {
    if (name == "l1_quadratic") {
      reject_unknown_keys(params, {"L", "b", "lambda"}, name);
    } else if (name == "box_quadratic") {
      reject_unknown_keys(params, {"L", "b", "lo", "hi"}, name);
    } else if (name == "simplex_quadratic") {
      reject_unknown_keys(params, {"L", "b", "prox"}, name);
    } else {
      reject_unknown_keys(params, {"L", "b"}, name);
    }
    L = number_or(params, "L", 1.0);
    if (!(L > 0)) throw CatalogError(name + ": L must be > 0");
    b = params.contains("b") ? vector_param(params["b"], n, "b") : Vec::Zero(n);
    if (name == "l1_quadratic" || name == "box_quadratic") {
      if (!params.contains("b")) b = default_shift(n);
    }
    double Lc = L;
    Vec bc = b;
    oracle = [Lc, bc](const Vec& x, Vec* grad) {
      Vec d = x - bc;
      if (grad) *grad = Lc * d;
      return 0.5 * Lc * d.squaredNorm();
    };
    model = CurvatureModel::quadratic(L);
    family = CatalogBuild::Family::kShiftedQuadratic;
    if (name == "l1_quadratic") {
      double lambda = number_or(params, "lambda", 0.1);
      psi = PsiSpec::l1(lambda);
    } else if (name == "box_quadratic") {
      Vec lo = params.contains("lo") ? vector_param(params["lo"], n, "lo")
                                     : Vec::Zero(n);
      Vec hi = params.contains("hi") ? vector_param(params["hi"], n, "hi")
                                     : Vec::Ones(n);
      psi = PsiSpec::box(lo, hi);
      lo_box = lo;
      hi_box = hi;
    } else if (name == "simplex_quadratic") {
      psi = PsiSpec::simplex();
      std::string prox = params.contains("prox") ? params["prox"].get<std::string>()
                                                 : "euclidean";
      if (prox == "entropy") {
        geometry = ProxGeometry::entropy_simplex(n);
      } else if (prox != "euclidean") {
        throw CatalogError("simplex_quadratic: prox must be 'euclidean' or 'entropy'");
      }
      x0 = Vec::Constant(n, 1.0 / n);
      lo_box = Vec::Zero(n);
      hi_box = Vec::Ones(n);
    }
  } else if (name == "hoelder") {
    reject_unknown_keys(params, {"nu", "L"}, name);
    double nu = number_or(params, "nu", 0.5);
    L = number_or(params, "L", 1.0);
    if (!(nu > 0) || !(nu <= 1)) {
      throw CatalogError("hoelder: nu must lie in (0, 1] for a differentiable instance");
    }
    if (!(L > 0)) throw CatalogError("hoelder: L must be > 0");
    double Lc = L, nuc = nu;
    oracle = [Lc, nuc](const Vec& x, Vec* grad) {
      double f = 0;
      if (grad) grad->resize(x.size());
      for (int i = 0; i < x.size(); ++i) {
        double a = std::abs(x[i]);
        f += Lc / (1.0 + nuc) * std::pow(a, 1.0 + nuc);
        if (grad) (*grad)[i] = Lc * sgn(x[i]) * std::pow(a, nuc);
      }
      return f;
    };
    // Model constant: the per-coordinate derivative sgn(x)|x|^nu has Hölder
    // constant 2^(1-nu) L (antisymmetric pairs are worst), and gathering n
    // coordinates into the Euclidean norm costs a further n^((1-nu)/2).
    double l_eff = std::pow(2.0, 1.0 - nu) * std::pow(double(n), 0.5 * (1.0 - nu)) * L;
    model = CurvatureModel::hoelder(nu, l_eff);
    family = CatalogBuild::Family::kZeroMinimum;
  } else if (name == "example_1_1") {
    reject_unknown_keys(params, {"R"}, name);
    double R = number_or(params, "R", 1.0);
    if (!(R > 0)) throw CatalogError("example_1_1: R must be > 0");
    oracle = [](const Vec& x, Vec* grad) {
      double f = 0.5 * x.squaredNorm();
      if (grad) grad->resize(x.size());
      for (int i = 0; i < x.size(); ++i) {
        double a = std::abs(x[i]);
        f += (2.0 / 3.0) * a * std::sqrt(a);
        if (grad) (*grad)[i] = x[i] + sgn(x[i]) * std::sqrt(a);
      }
      return f;
    };
    model = CurvatureModel::sum(
        {CurvatureModel::quadratic(1.0),
         CurvatureModel::hoelder(0.5, std::sqrt(2.0) * std::pow(double(n), 0.25))});
    family = CatalogBuild::Family::kZeroMinimum;
    q = PsiSpec::box(Vec::Constant(n, -R), Vec::Constant(n, R));
    lo_box = Vec::Constant(n, -R);
    hi_box = Vec::Constant(n, R);
    x0 = Vec::Constant(n, std::min(1.0, R));
  } else if (name == "linear") {
    reject_unknown_keys(params, {"c"}, name);
    Vec c = params.contains("c") ? vector_param(params["c"], n, "c") : Vec::Ones(n);
    oracle = [c](const Vec& x, Vec* grad) {
      if (grad) *grad = c;
      return c.dot(x);
    };
    q = PsiSpec::box(lo_box, hi_box);
    x0 = Vec::Zero(n);
  } else {
    std::string names;
    for (const auto& s : builtin_problem_names()) names += " " + s;
    throw CatalogError("builtin_problem: unknown name '" + name + "'; available:" + names);
  }

  if (psi_override) psi = psi_from_json(*psi_override, n, geometry, false);
  if (q_override) {
    q = psi_from_json(*q_override, n, geometry, true);
    if (q.kind == PsiSpec::Kind::kL1) {
      throw ConfigError("q: must describe a plain set");
    }
  }
  if (x0_override) x0 = vector_param(*x0_override, n, "x0");

  geometry.set_center(x0);

  CatalogBuild cb{CompositeProblem(name, n, std::move(oracle), std::move(psi),
                                   std::move(geometry), std::move(q), x0),
                  family, L, b};
  cb.problem.set_sample_box(lo_box, hi_box);
  if (model) cb.problem.set_known_model(*std::move(model));
  install_optimum(cb);
  return cb;
}

}  // namespace

CompositeProblem::CompositeProblem(std::string name, int dim, Oracle oracle,
                                   PsiSpec psi, ProxGeometry geometry, PsiSpec q,
                                   Vec x0)
    : name_(std::move(name)),
      dim_(dim),
      oracle_(std::move(oracle)),
      psi_(std::move(psi)),
      geometry_(std::move(geometry)),
      q_(std::move(q)),
      x0_(std::move(x0)) {
  if (dim_ < 1) throw ConfigError("CompositeProblem: dim must be >= 1");
  if (!oracle_) throw ConfigError("CompositeProblem: missing oracle");
  if (geometry_.dim() != dim_) {
    throw ConfigError("CompositeProblem: geometry dimension mismatch");
  }
  if (static_cast<int>(x0_.size()) != dim_) {
    throw ConfigError("CompositeProblem: x0 dimension mismatch");
  }
  if (q_.kind == PsiSpec::Kind::kL1) {
    throw ConfigError("CompositeProblem: the plain feasible set cannot be an l1 term");
  }
  if (psi_.kind == PsiSpec::Kind::kBox &&
      static_cast<int>(psi_.lo.size()) != dim_) {
    throw ConfigError("CompositeProblem: psi box bounds dimension mismatch");
  }
  if (q_.kind == PsiSpec::Kind::kBox && static_cast<int>(q_.lo.size()) != dim_) {
    throw ConfigError("CompositeProblem: q box bounds dimension mismatch");
  }
  if (geometry_.kind() == ProxKind::kEntropyOnSimplex) {
    if ((x0_.array() <= 0).any()) {
      throw ConfigError("CompositeProblem: entropy geometry needs a strictly positive x0");
    }
  }
  if (!psi_.feasible(x0_, geometry_) || !q_.feasible(x0_, geometry_)) {
    throw ConfigError("CompositeProblem: x0 is infeasible");
  }
  sample_lo_ = Vec::Constant(dim_, -1.0);
  sample_hi_ = Vec::Constant(dim_, 1.0);
}

void CompositeProblem::set_x0(Vec x0) {
  if (static_cast<int>(x0.size()) != dim_) {
    throw ConfigError("set_x0: dimension mismatch");
  }
  if (!psi_.feasible(x0, geometry_) || !q_.feasible(x0, geometry_)) {
    throw ConfigError("set_x0: infeasible point");
  }
  x0_ = std::move(x0);
  geometry_.set_center(x0_);
}

void CompositeProblem::set_sample_box(Vec lo, Vec hi) {
  if (static_cast<int>(lo.size()) != dim_ || static_cast<int>(hi.size()) != dim_) {
    throw ConfigError("set_sample_box: dimension mismatch");
  }
  if ((lo.array() >= hi.array()).any()) {
    throw ConfigError("set_sample_box: box must have positive extent");
  }
  sample_lo_ = std::move(lo);
  sample_hi_ = std::move(hi);
}

double CompositeProblem::f_value(const Vec& x) const {
  ++oracle_calls_;
  double f = oracle_(x, nullptr);
  if (!std::isfinite(f)) {
    std::ostringstream os;
    os << "oracle returned non-finite value at x = [" << x.transpose() << "]";
    throw OracleError(os.str());
  }
  return f;
}

double CompositeProblem::f_grad(const Vec& x, Vec& grad) const {
  ++oracle_calls_;
  double f = oracle_(x, &grad);
  if (!std::isfinite(f) || !grad.allFinite()) {
    std::ostringstream os;
    os << "oracle returned non-finite value/gradient at x = [" << x.transpose() << "]";
    throw OracleError(os.str());
  }
  return f;
}

EvalResult CompositeProblem::eval(const Vec& x) const {
  EvalResult r;
  r.f = f_grad(x, r.grad);
  r.psi = psi_.value(x, geometry_);
  r.f_tilde = r.f + r.psi;
  return r;
}

double CompositeProblem::bregman_of_f(const Vec& x, const Vec& y) const {
  Vec gx;
  double fx = f_grad(x, gx);
  double fy = f_value(y);
  return fy - fx - gx.dot(y - x);
}

std::optional<double> CompositeProblem::distance_to_optimum() const {
  if (!opt_) return std::nullopt;
  return geometry_.bregman(x0_, opt_->x);
}

void CompositeProblem::set_known_optimum(Vec x_star, double residual_tol) {
  if (static_cast<int>(x_star.size()) != dim_) {
    throw ConfigError("set_known_optimum: dimension mismatch");
  }
  double res = first_order_residual(*this, x_star);
  if (!(res <= residual_tol)) {
    throw ConfigError("set_known_optimum: first-order residual " + std::to_string(res) +
                      " exceeds tolerance");
  }
  double ft = eval(x_star).f_tilde;
  opt_ = KnownOptimum{std::move(x_star), ft};
}

double first_order_residual(const CompositeProblem& p, const Vec& x) {
  Vec g;
  p.f_grad(x, g);
  const PsiSpec& psi = p.psi();
  const ProxGeometry& geom = p.geometry();
  const double act = 1e-9;  // activity tolerance
  switch (psi.kind) {
    case PsiSpec::Kind::kZero:
      return geom.dual_norm(g);
    case PsiSpec::Kind::kL1: {
      if (geom.has_matrix()) {
        throw CapabilityError("first_order_residual: l1 needs the identity norm");
      }
      double worst = 0;
      for (int i = 0; i < x.size(); ++i) {
        double v;
        if (x[i] > act) {
          v = std::abs(g[i] + psi.lambda);
        } else if (x[i] < -act) {
          v = std::abs(g[i] - psi.lambda);
        } else {
          v = std::max(0.0, std::abs(g[i]) - psi.lambda);
        }
        worst = std::max(worst, v);
      }
      return worst;
    }
    case PsiSpec::Kind::kBox: {
      if (geom.has_matrix()) {
        throw CapabilityError("first_order_residual: box needs the identity norm");
      }
      double worst = 0;
      for (int i = 0; i < x.size(); ++i) {
        double v;
        if (x[i] <= psi.lo[i] + act) {
          v = std::max(0.0, -g[i]);
        } else if (x[i] >= psi.hi[i] - act) {
          v = std::max(0.0, g[i]);
        } else {
          v = std::abs(g[i]);
        }
        worst = std::max(worst, v);
      }
      return worst;
    }
    case PsiSpec::Kind::kBall: {
      Vec u = x - psi.ball_center;
      double n = geom.norm(u);
      if (n < psi.ball_radius - act) return geom.dual_norm(g);
      // On the boundary the gradient may point inward along B u.
      Vec bu = geom.apply_matrix(u);
      double mu = -g.dot(u) / (n * n);
      if (mu < 0) mu = 0;
      return geom.dual_norm(g + mu * bu);
    }
    case PsiSpec::Kind::kSimplex: {
      if (geom.has_matrix()) {
        throw CapabilityError("first_order_residual: simplex needs the identity norm");
      }
      double c = g.minCoeff();
      double worst = 0;
      for (int i = 0; i < x.size(); ++i) {
        if (x[i] > act) worst = std::max(worst, g[i] - c);
      }
      return worst;
    }
  }
  return 0;
}

std::vector<std::string> builtin_problem_names() {
  return {"quadratic",      "hoelder",           "example_1_1", "l1_quadratic",
          "box_quadratic",  "simplex_quadratic", "linear"};
}

CompositeProblem builtin_problem(const std::string& name, int dim,
                                 const std::string& params_json) {
  json params;
  if (params_json.empty()) {
    params = json::object();
  } else {
    try {
      params = json::parse(params_json);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("builtin_problem: bad params JSON: ") + e.what(), 1);
    }
  }
  if (!params.is_object()) throw ConfigError("builtin_problem: params must be an object");
  return build_catalog(name, dim, params, nullptr, nullptr, nullptr).problem;
}

CompositeProblem parse_problem_json(const std::string& text) {
  json spec;
  try {
    spec = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("problem spec: ") + e.what(), 1);
  }
  if (!spec.is_object()) throw ConfigError("problem spec: must be a JSON object");
  reject_unknown_keys(spec, {"problem", "dim", "params", "psi", "q", "x0"},
                      "problem spec");
  if (!spec.contains("problem") || !spec["problem"].is_string()) {
    throw ConfigError("problem spec: missing string key 'problem'");
  }
  if (!spec.contains("dim") || !spec["dim"].is_number_integer()) {
    throw ConfigError("problem spec: missing integer key 'dim'");
  }
  const std::string name = spec["problem"].get<std::string>();
  const int dim = spec["dim"].get<int>();
  json params = spec.contains("params") ? spec["params"] : json::object();
  if (!params.is_object()) throw ConfigError("problem spec: 'params' must be an object");
  const json* psi_ov = spec.contains("psi") ? &spec["psi"] : nullptr;
  const json* q_ov = spec.contains("q") ? &spec["q"] : nullptr;
  const json* x0_ov = spec.contains("x0") ? &spec["x0"] : nullptr;
  return build_catalog(name, dim, params, psi_ov, q_ov, x0_ov).problem;
}

CompositeProblem load_problem_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_problem_json: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_json(ss.str());
}

}  // namespace ucopt
