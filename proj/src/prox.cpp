#include "ucopt/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ucopt/errors.hpp"

namespace ucopt {

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Vec solve_entropy(const PsiSpec& psi, const Vec& z, const Vec& c, double M) {
  if (psi.kind != PsiSpec::Kind::kZero && psi.kind != PsiSpec::Kind::kSimplex) {
    throw CapabilityError(
        "solve_composite_prox: entropy geometry supports only zero/simplex "
        "regularizers, got " + psi.describe());
  }
  if ((z.array() <= 0).any()) {
    throw DomainError("solve_composite_prox: entropy base point must be strictly positive");
  }
  // argmin over the simplex of <c,y> + M sum y log(y/z):
  // y_i proportional to z_i exp(-c_i / M), computed in log space.
  Vec logw = z.array().log() - c.array() / M;
  double mx = logw.maxCoeff();
  Vec w = (logw.array() - mx).exp();
  return w / w.sum();
}

}  // namespace

Vec project_simplex(const Vec& v) {
  const int n = static_cast<int>(v.size());
  if (n == 0) throw DomainError("project_simplex: empty vector");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;  // deterministic tie order
  });
  double cum = 0;
  double theta = 0;
  int rho = 0;
  for (int j = 0; j < n; ++j) {
    cum += v[idx[j]];
    double cand = (cum - 1.0) / (j + 1);
    if (v[idx[j]] - cand > 0) {
      rho = j + 1;
      theta = cand;
    }
  }
  (void)rho;
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = std::max(v[i] - theta, 0.0);
  return y;
}

Vec solve_composite_prox(const ProxGeometry& geom, const PsiSpec& psi,
                         const Vec& z, const Vec& c, double M, double w) {
  if (!(M > 0) || !std::isfinite(M)) {
    throw DomainError("solve_composite_prox: prox weight M must be finite and > 0");
  }
  if (!(w >= 0) || !std::isfinite(w)) {
    throw DomainError("solve_composite_prox: regularizer weight must be finite and >= 0");
  }
  if (z.size() != c.size() || static_cast<int>(z.size()) != geom.dim()) {
    throw ConfigError("solve_composite_prox: dimension mismatch");
  }
  if (geom.kind() == ProxKind::kEntropyOnSimplex) {
    return solve_entropy(psi, z, c, M);
  }

  const bool weighted = geom.has_matrix();
  switch (psi.kind) {
    case PsiSpec::Kind::kZero:
      return z - geom.apply_inverse(c) / M;
    case PsiSpec::Kind::kL1: {
      if (weighted) {
        throw CapabilityError(
            "solve_composite_prox: l1 with a weighted norm has no closed form here");
      }
      Vec y(z.size());
      double t = w * psi.lambda / M;
      for (int i = 0; i < z.size(); ++i) y[i] = soft_threshold(z[i] - c[i] / M, t);
      return y;
    }
    case PsiSpec::Kind::kBox: {
      if (weighted) {
        throw CapabilityError(
            "solve_composite_prox: box with a weighted norm has no closed form here");
      }
      if (psi.lo.size() != z.size()) {
        throw ConfigError("solve_composite_prox: box bounds dimension mismatch");
      }
      Vec y = z - c / M;
      return y.cwiseMax(psi.lo).cwiseMin(psi.hi);
    }
    case PsiSpec::Kind::kBall: {
      if (psi.ball_center.size() != z.size()) {
        throw ConfigError("solve_composite_prox: ball center dimension mismatch");
      }
      Vec u = z - geom.apply_inverse(c) / M - psi.ball_center;
      double n = geom.norm(u);
      if (n > psi.ball_radius) u *= psi.ball_radius / n;
      return psi.ball_center + u;
    }
    case PsiSpec::Kind::kSimplex: {
      if (weighted) {
        throw CapabilityError(
            "solve_composite_prox: simplex with a weighted norm has no closed form here");
      }
      return project_simplex(z - c / M);
    }
  }
  throw CapabilityError("solve_composite_prox: unsupported regularizer");
}

Vec nearest_feasible(const ProxGeometry& geom, const PsiSpec& psi, const Vec& x) {
  switch (psi.kind) {
    case PsiSpec::Kind::kZero:
    case PsiSpec::Kind::kL1:
      return x;
    case PsiSpec::Kind::kBox:
      return x.cwiseMax(psi.lo).cwiseMin(psi.hi);
    case PsiSpec::Kind::kBall: {
      Vec u = x - psi.ball_center;
      double n = geom.norm(u);
      if (n > psi.ball_radius) u *= psi.ball_radius / n;
      return psi.ball_center + u;
    }
    case PsiSpec::Kind::kSimplex:
      return project_simplex(x);
  }
  return x;
}

std::optional<double> linear_psi_min(const ProxGeometry& geom,
                                     const PsiSpec& psi, const Vec& c,
                                     double w) {
  if (geom.kind() == ProxKind::kEntropyOnSimplex) {
    // The prox domain is already the probability simplex, so the linear term
    // is bounded regardless of a trivial regularizer.
    if (psi.kind == PsiSpec::Kind::kZero || psi.kind == PsiSpec::Kind::kSimplex) {
      return c.minCoeff();
    }
  }
  switch (psi.kind) {
    case PsiSpec::Kind::kZero:
      if (c.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;
      return std::nullopt;
    case PsiSpec::Kind::kL1:
      // min <c,y> + w lambda |y|_1 is 0 at the origin when the weight
      // dominates every coefficient, else unbounded below.
      if ((c.array().abs() <= w * psi.lambda).all()) return 0.0;
      return std::nullopt;
    case PsiSpec::Kind::kBox: {
      double acc = 0;
      for (int i = 0; i < c.size(); ++i) {
        acc += c[i] >= 0 ? c[i] * psi.lo[i] : c[i] * psi.hi[i];
      }
      return acc;
    }
    case PsiSpec::Kind::kBall:
      return c.dot(psi.ball_center) - psi.ball_radius * geom.dual_norm(c);
    case PsiSpec::Kind::kSimplex:
      return c.minCoeff();
  }
  return std::nullopt;
}

}  // namespace ucopt
