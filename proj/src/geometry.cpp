#include "ucopt/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "ucopt/errors.hpp"

namespace ucopt {

namespace {

void check_dim(const Vec& x, int dim, const char* who) {
  if (static_cast<int>(x.size()) != dim) {
    throw ConfigError(std::string(who) + ": expected dimension " + std::to_string(dim) +
                      ", got " + std::to_string(x.size()));
  }
}

// x log x with the continuous extension at 0.
double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

}  // namespace

ProxGeometry ProxGeometry::euclidean(Vec center) {
  if (center.size() == 0) throw ConfigError("ProxGeometry: empty center");
  ProxGeometry g;
  g.center_ = std::move(center);
  return g;
}

ProxGeometry ProxGeometry::euclidean_weighted(Mat B, Vec center) {
  if (center.size() == 0) throw ConfigError("ProxGeometry: empty center");
  if (B.rows() != B.cols() || B.rows() != center.size()) {
    throw ConfigError("ProxGeometry: norm matrix shape does not match the dimension");
  }
  if (!B.isApprox(B.transpose(), 1e-12)) {
    throw ConfigError("ProxGeometry: norm matrix must be symmetric");
  }
  auto llt = std::make_shared<Eigen::LLT<Mat>>(B);
  if (llt->info() != Eigen::Success) {
    throw ConfigError("ProxGeometry: norm matrix must be positive definite");
  }
  ProxGeometry g;
  g.center_ = std::move(center);
  g.b_ = std::make_shared<const Mat>(std::move(B));
  g.llt_ = std::move(llt);
  return g;
}

ProxGeometry ProxGeometry::entropy_simplex(int dim) {
  if (dim < 1) throw ConfigError("ProxGeometry: dimension must be >= 1");
  ProxGeometry g;
  g.kind_ = ProxKind::kEntropyOnSimplex;
  g.center_ = Vec::Constant(dim, 1.0 / dim);
  return g;
}

const Mat& ProxGeometry::matrix() const {
  if (!b_) throw ConfigError("ProxGeometry: no norm matrix installed");
  return *b_;
}

void ProxGeometry::set_center(Vec center) {
  check_dim(center, dim(), "set_center");
  if (kind_ == ProxKind::kEntropyOnSimplex && (center.array() <= 0).any()) {
    throw DomainError("set_center: entropy center must be strictly positive");
  }
  center_ = std::move(center);
}

double ProxGeometry::norm(const Vec& x) const {
  check_dim(x, dim(), "norm");
  if (!b_) return x.norm();
  return std::sqrt(x.dot(*b_ * x));
}

double ProxGeometry::dual_norm(const Vec& g) const {
  check_dim(g, dim(), "dual_norm");
  if (!b_) return g.norm();
  return std::sqrt(g.dot(llt_->solve(g)));
}

Vec ProxGeometry::apply_matrix(const Vec& x) const {
  check_dim(x, dim(), "apply_matrix");
  if (!b_) return x;
  return *b_ * x;
}

Vec ProxGeometry::apply_inverse(const Vec& g) const {
  check_dim(g, dim(), "apply_inverse");
  if (!b_) return g;
  return llt_->solve(g);
}

double ProxGeometry::bregman(const Vec& z, const Vec& y) const {
  check_dim(z, dim(), "bregman");
  check_dim(y, dim(), "bregman");
  if (kind_ == ProxKind::kEuclideanHalfSquare) {
    Vec d = y - z;
    double n = norm(d);
    return 0.5 * n * n;
  }
  // Entropy potential: sum x log x; Bregman distance
  // sum y log(y/z) - sum y + sum z, finite for y >= 0, needs z > 0.
  double acc = 0;
  for (int i = 0; i < y.size(); ++i) {
    if (!(z[i] > 0)) {
      throw DomainError("bregman: entropy base point must be strictly positive");
    }
    if (y[i] < 0) throw DomainError("bregman: entropy target must be non-negative");
    acc += xlogx(y[i]) - y[i] * std::log(z[i]) - y[i] + z[i];
  }
  return acc;
}

Vec ProxGeometry::potential_gradient(const Vec& x) const {
  check_dim(x, dim(), "potential_gradient");
  if (kind_ == ProxKind::kEuclideanHalfSquare) return apply_matrix(x);
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0)) {
      throw DomainError("potential_gradient: entropy point must be strictly positive");
    }
    g[i] = 1.0 + std::log(x[i]);
  }
  return g;
}

std::string ProxGeometry::describe() const {
  char buf[96];
  if (kind_ == ProxKind::kEntropyOnSimplex) {
    std::snprintf(buf, sizeof buf, "entropy-simplex(dim=%d)", dim());
  } else {
    std::snprintf(buf, sizeof buf, "euclidean(dim=%d%s)", dim(),
                  b_ ? ",weighted" : "");
  }
  return buf;
}

PsiSpec PsiSpec::zero() { return PsiSpec{}; }

PsiSpec PsiSpec::l1(double lambda) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) {
    throw ConfigError("PsiSpec::l1: weight must be finite and >= 0");
  }
  PsiSpec p;
  p.kind = Kind::kL1;
  p.lambda = lambda;
  return p;
}

PsiSpec PsiSpec::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw ConfigError("PsiSpec::box: bounds must be non-empty and equal length");
  }
  if ((lo.array() > hi.array()).any()) {
    throw ConfigError("PsiSpec::box: lower bound exceeds upper bound");
  }
  PsiSpec p;
  p.kind = Kind::kBox;
  p.lo = std::move(lo);
  p.hi = std::move(hi);
  return p;
}

PsiSpec PsiSpec::ball(Vec center, double radius) {
  if (center.size() == 0) throw ConfigError("PsiSpec::ball: empty center");
  if (!(radius > 0)) throw ConfigError("PsiSpec::ball: radius must be > 0");
  PsiSpec p;
  p.kind = Kind::kBall;
  p.ball_center = std::move(center);
  p.ball_radius = radius;
  return p;
}

PsiSpec PsiSpec::simplex() {
  PsiSpec p;
  p.kind = Kind::kSimplex;
  return p;
}

double PsiSpec::finite_value(const Vec& x) const {
  if (kind == Kind::kL1) return lambda * x.lpNorm<1>();
  return 0.0;
}

bool PsiSpec::feasible(const Vec& x, const ProxGeometry& geom, double tol) const {
  switch (kind) {
    case Kind::kZero:
    case Kind::kL1:
      return true;
    case Kind::kBox:
      return (x.array() >= lo.array() - tol).all() &&
             (x.array() <= hi.array() + tol).all();
    case Kind::kBall:
      return geom.norm(x - ball_center) <= ball_radius + tol;
    case Kind::kSimplex:
      return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
  }
  return false;
}

double PsiSpec::value(const Vec& x, const ProxGeometry& geom) const {
  if (!feasible(x, geom)) return std::numeric_limits<double>::infinity();
  return finite_value(x);
}

std::string PsiSpec::describe() const {
  char buf[64];
  switch (kind) {
    case Kind::kZero:
      return "zero";
    case Kind::kL1:
      std::snprintf(buf, sizeof buf, "l1(%g)", lambda);
      return buf;
    case Kind::kBox:
      return "box";
    case Kind::kBall:
      std::snprintf(buf, sizeof buf, "ball(r=%g)", ball_radius);
      return buf;
    case Kind::kSimplex:
      return "simplex";
  }
  return "?";
}

}  // namespace ucopt
