#pragma once

#include <optional>

#include "ucopt/geometry.hpp"

namespace ucopt {

/// Minimizes <c, y> + M * beta_d(z, y) + w * psi(y) over y in dom psi
/// (intersected with dom d for the entropy geometry).  Closed form for the
/// supported geometry/regularizer pairs, CapabilityError otherwise.
/// Requires M > 0 and w >= 0; w scales only the finite part of psi,
/// indicator domains are always enforced.
Vec solve_composite_prox(const ProxGeometry& geom, const PsiSpec& psi,
                         const Vec& z, const Vec& c, double M, double w);

/// Euclidean projection onto {x >= 0, sum x = 1}; exact sort-based scheme,
/// ties resolved by coordinate index, deterministic.
Vec project_simplex(const Vec& v);

/// Nearest point of dom psi (used for probe generation and feasibility
/// repair; identity for free-domain regularizers).
Vec nearest_feasible(const ProxGeometry& geom, const PsiSpec& psi,
                     const Vec& x);

/// min over y in dom psi of <c, y> + w * psi_finite(y); nullopt when the
/// linear part makes the problem unbounded below.
std::optional<double> linear_psi_min(const ProxGeometry& geom,
                                     const PsiSpec& psi, const Vec& c,
                                     double w);

}  // namespace ucopt
