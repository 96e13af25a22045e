#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ucopt/geometry.hpp"

namespace ucopt {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SolverConfig {
  double eps = 0;    ///< target accuracy (required by the accuracy methods)
  double delta = 0;  ///< target mapped-gradient norm (constrained smooth method)
  double l0 = 0;     ///< initial curvature guess; 0 picks the method default
  long max_iters = 200000;
  int max_doublings_per_iter = 60;
  bool aggressive_l = false;    ///< fast method: halve-on-accept update
  bool proof_indexing = false;  ///< dual method: test at the estimate minimizer
  double check_tol = 1e-9;      ///< relative tolerance of online certificates
  std::optional<double> d_hint; ///< beta(x0, x*) when known externally
};

/// One committed iteration.  NaN marks a column the method does not fill;
/// those serialize as empty CSV fields.
struct IterationRecord {
  long k = -1;
  int i_k = 0;          ///< doublings spent in this iteration's line search
  double L = kNaN;      ///< curvature constant after the update rule
  double f = kNaN;
  double f_tilde = kNaN;
  double grad_map_norm = kNaN;
  double tau = kNaN;
  double a = kNaN;
  double A = kNaN;
  double phi_star = kNaN;
  double step_norm = kNaN;
};

struct Trace {
  std::vector<IterationRecord> rows;
};

/// CSV header: k,i_k,L,f,f_tilde,grad_map_norm,tau,a,A,phi_star,step_norm
/// Full-precision decimals; non-applicable fields empty.
void write_trace_csv(const std::string& path, const Trace& trace);
Trace read_trace_csv(const std::string& path);

enum class StopReason {
  kAccuracyCertified,  ///< certified objective gap <= eps
  kGradientNorm,       ///< mapped-gradient norm <= delta
  kMaxIters,
};

std::string to_string(StopReason r);

struct RunReport {
  std::string method;
  std::string problem;
  double eps = 0;
  double delta = 0;
  StopReason reason = StopReason::kMaxIters;
  long iterations = 0;   ///< iteration bodies executed
  long achieved_k = -1;  ///< k index at which the stop condition fired
  long oracle_calls = 0;
  long total_doublings = 0;  ///< sum of i_k over committed iterations
  double l0 = 0;
  double l_final = 0;  ///< curvature constant after the last committed update
  Vec x_out;
  double f_out = kNaN;
  double f_tilde_out = kNaN;
  double grad_map_norm_out = kNaN;  ///< constrained smooth method only
  double m_bar = kNaN;              ///< constant attached to its output point
  double certified_gap = kNaN;      ///< accuracy methods: proven gap at x_out
  double d_used = kNaN;             ///< distance value used by certificates
  Trace trace;
};

}  // namespace ucopt
