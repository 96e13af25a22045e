#pragma once

#include <vector>

#include "ucopt/curvature.hpp"
#include "ucopt/problem.hpp"

namespace ucopt {

/// Samples the curvature of the smooth part of p over its sampling box and
/// returns a lower-estimate curve on the given radius grid.
///
/// Per grid radius t: pairs_per_bin point pairs are drawn (midpoint uniform
/// in the box, direction uniform on the sphere, separation uniform in
/// (0, t]; draws leaving the box are skipped), and for each pair the
/// normalized chord gap is evaluated on the interior alpha grid
/// {1/(A+1), ..., A/(A+1)}.  The per-bin maxima are made non-decreasing
/// across bins (running maximum), a (0, 0) anchor is prepended, and
/// quotients below the local roundoff floor are reported as exactly 0.
///
/// Deterministic for a fixed seed.  Requires dim <= 10 (sampling at desk
/// scale), an increasing positive grid, pairs_per_bin >= 1 and
/// alphas_per_pair >= 1; throws OracleError when f is non-finite at a
/// sampled point.
EmpiricalCurve estimate_gcb(const CompositeProblem& p,
                            const std::vector<double>& t_grid,
                            long pairs_per_bin, int alphas_per_pair,
                            unsigned long seed);

}  // namespace ucopt
