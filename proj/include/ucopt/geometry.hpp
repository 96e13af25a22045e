#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

namespace ucopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ProxKind { kEuclideanHalfSquare, kEntropyOnSimplex };

/// Norm and prox structure shared by the mappings and the solvers.
///
/// The norm is ||x|| = sqrt(x' B x) with B symmetric positive definite
/// (identity when no matrix is installed); the dual norm uses B^{-1}.
/// The prox function d is 1-strongly convex w.r.t. that norm, vanishes at
/// the center together with its gradient, and generates the Bregman
/// distances all prox subproblems are built from.
class ProxGeometry {
 public:
  /// Euclidean half-square d(x) = ||x - center||^2 / 2, B = I.
  static ProxGeometry euclidean(Vec center);

  /// Euclidean half-square in the B-norm.  B must be SPD.
  static ProxGeometry euclidean_weighted(Mat B, Vec center);

  /// Entropy on the probability simplex; center defaults to uniform.
  /// Strong convexity modulus 1 w.r.t. the Euclidean norm holds because the
  /// entropy is 1-strongly convex w.r.t. ||.||_1 >= ||.||_2 on the simplex.
  static ProxGeometry entropy_simplex(int dim);

  int dim() const { return static_cast<int>(center_.size()); }
  ProxKind kind() const { return kind_; }
  bool has_matrix() const { return static_cast<bool>(b_); }
  const Mat& matrix() const;

  const Vec& center() const { return center_; }
  void set_center(Vec center);

  double norm(const Vec& x) const;
  double dual_norm(const Vec& g) const;
  Vec apply_matrix(const Vec& x) const;       ///< B x
  Vec apply_inverse(const Vec& g) const;      ///< B^{-1} g

  /// Bregman distance beta_d(z, y) of the generating potential.  Requires
  /// z in the interior of dom d (strictly positive for the entropy case).
  double bregman(const Vec& z, const Vec& y) const;

  /// Gradient of the raw potential (used only by residual checks).
  Vec potential_gradient(const Vec& x) const;

  /// d(x) = beta_d(center, x): the prox function itself.
  double prox_value(const Vec& x) const { return bregman(center_, x); }

  std::string describe() const;

 private:
  ProxKind kind_ = ProxKind::kEuclideanHalfSquare;
  Vec center_;
  std::shared_ptr<const Mat> b_;
  std::shared_ptr<const Eigen::LLT<Mat>> llt_;
};

/// Simple regularizer / constraint description.  Covers the additive term
/// Psi of a composite objective and, with the l1 kind excluded, the plain
/// feasible sets the constrained smooth method projects onto (kZero then
/// reads "all of E").
struct PsiSpec {
  enum class Kind { kZero, kL1, kBox, kBall, kSimplex };

  Kind kind = Kind::kZero;
  double lambda = 0.0;   ///< l1 weight
  Vec lo, hi;            ///< box bounds
  Vec ball_center;
  double ball_radius = 0.0;  ///< ball in the geometry norm

  static PsiSpec zero();
  static PsiSpec l1(double lambda);
  static PsiSpec box(Vec lo, Vec hi);
  static PsiSpec ball(Vec center, double radius);
  static PsiSpec simplex();

  bool is_indicator() const { return kind != Kind::kL1; }

  /// Finite part of the regularizer (0 for indicators and outside checks).
  double finite_value(const Vec& x) const;

  /// Whether x lies in dom Psi up to an absolute tolerance.
  bool feasible(const Vec& x, const ProxGeometry& geom,
                double tol = 1e-9) const;

  /// Full value: finite part, or +inf outside the domain.
  double value(const Vec& x, const ProxGeometry& geom) const;

  std::string describe() const;
};

}  // namespace ucopt
