#include "ucopt/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "ucopt/errors.hpp"

namespace ucopt {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_radius(double t, double limit, const char* who) {
  if (!(t >= 0) || !std::isfinite(t)) {
    throw DomainError(std::string(who) + ": radius must be finite and >= 0, got " + fmt(t));
  }
  if (t > limit) {
    throw DomainError(std::string(who) + ": radius " + fmt(t) +
                      " exceeds the model's radius limit " + fmt(limit));
  }
}

// Monotone scalar inversion: smallest r with f(r) == eps for non-decreasing f
// with f(0) = 0.  Doubling bracket from rel_tol, then bisection until the
// value matches eps to rel_tol relative accuracy.
double invert_monotone(const std::function<double(double)>& f, double eps,
                       double radius_limit, const GaugeConfig& cfg,
                       const char* who) {
  if (!(eps > 0) || !std::isfinite(eps)) {
    throw DomainError(std::string(who) + ": accuracy must be finite and > 0, got " + fmt(eps));
  }
  double hi = cfg.rel_tol;
  if (std::isfinite(radius_limit)) {
    double top = f(radius_limit);
    if (top < eps) {
      if (top >= eps * (1.0 - cfg.rel_tol)) return radius_limit;
      throw UnattainableAccuracyError(
          std::string(who) + ": value " + fmt(eps) +
          " is not reached within the radius limit (max " + fmt(top) + ")");
    }
    hi = std::min(hi, radius_limit);
  }
  double lo = 0.0;
  while (f(hi) < eps) {
    lo = hi;
    hi *= 2;
    if (hi >= radius_limit) {
      hi = radius_limit;
      break;
    }
    if (hi > 1e300) {
      throw UnattainableAccuracyError(std::string(who) + ": value " + fmt(eps) +
                                      " is never reached (curve stagnates)");
    }
  }
  for (int step = 0; step < cfg.max_bisection_steps; ++step) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return hi;  // bracket collapsed to adjacent floats
    double v = f(mid);
    if (std::abs(v - eps) <= cfg.rel_tol * eps) return mid;
    if (v < eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw NumericalError(std::string(who) + ": bisection did not reach tolerance " +
                       fmt(cfg.rel_tol) + " in " + fmt(cfg.max_bisection_steps) + " steps");
}

}  // namespace

CurvatureModel CurvatureModel::quadratic(double L, double radius_limit,
                                         bool convex_full_domain) {
  if (!(L > 0) || !std::isfinite(L)) {
    throw ConfigError("quadratic curvature: L must be finite and > 0, got " + fmt(L));
  }
  if (!(radius_limit > 0)) {
    throw ConfigError("quadratic curvature: radius limit must be > 0");
  }
  CurvatureModel m;
  m.kind_ = Kind::kQuadratic;
  m.l_ = L;
  m.radius_limit_ = radius_limit;
  m.convex_ = convex_full_domain;
  return m;
}

CurvatureModel CurvatureModel::hoelder(double nu, double L, double radius_limit,
                                       bool convex_full_domain) {
  if (!(nu >= 0) || !(nu <= 1)) {
    throw ConfigError("hoelder curvature: exponent must lie in [0, 1], got " + fmt(nu));
  }
  if (!(L > 0) || !std::isfinite(L)) {
    throw ConfigError("hoelder curvature: L must be finite and > 0, got " + fmt(L));
  }
  if (!(radius_limit > 0)) {
    throw ConfigError("hoelder curvature: radius limit must be > 0");
  }
  CurvatureModel m;
  m.kind_ = Kind::kHoelder;
  m.l_ = L;
  m.nu_ = nu;
  m.radius_limit_ = radius_limit;
  m.convex_ = convex_full_domain;
  return m;
}

CurvatureModel CurvatureModel::sum(std::vector<CurvatureModel> parts) {
  if (parts.empty()) throw ConfigError("sum curvature: needs at least one part");
  CurvatureModel m;
  m.kind_ = Kind::kSum;
  m.radius_limit_ = kUnbounded;
  m.convex_ = true;
  for (const auto& p : parts) {
    m.radius_limit_ = std::min(m.radius_limit_, p.radius_limit());
    m.convex_ = m.convex_ && p.convex_full_domain();
  }
  m.parts_ = std::move(parts);
  return m;
}

CurvatureModel CurvatureModel::empirical(EmpiricalCurve curve,
                                         bool convex_full_domain) {
  CurvatureModel m = table(curve.t, curve.mu, convex_full_domain);
  auto data = std::make_shared<TableData>(*m.table_);
  data->provenance = std::move(curve);
  data->is_empirical = true;
  m.table_ = std::move(data);
  return m;
}

// Node validation plus the closed-form integral companion at every node.
// Between nodes the curve is linear in the squared radius u = t^2; that is
// the interpolation that keeps both monotonicity and the beta^2 radius
// scaling of valid node data intact (plain linear-in-t chords break the
// scaling between widely spaced nodes).
CurvatureModel CurvatureModel::table(std::vector<double> t,
                                     std::vector<double> mu,
                                     bool convex_full_domain) {
  if (t.size() != mu.size()) {
    throw ConfigError("curvature table: radius and value columns differ in length");
  }
  if (t.size() < 2) throw ConfigError("curvature table: needs at least two nodes");
  if (t.front() < 0) throw ConfigError("curvature table: radii must be >= 0");
  if (t.front() > 0) {  // forgive a missing anchor
    t.insert(t.begin(), 0.0);
    mu.insert(mu.begin(), 0.0);
  }
  if (mu.front() != 0.0) {
    throw ConfigError("curvature table: value at radius 0 must be 0, got " + fmt(mu.front()));
  }
  auto data = std::make_shared<TableData>();
  data->t = std::move(t);
  data->mu = std::move(mu);
  data->sigma.assign(data->t.size(), 0.0);
  for (size_t i = 1; i < data->t.size(); ++i) {
    double t0 = data->t[i - 1], t1 = data->t[i];
    double m0 = data->mu[i - 1], m1 = data->mu[i];
    if (!(t1 > t0)) {
      throw ConfigError("curvature table: radii must be strictly increasing (node " +
                        fmt(t1) + " after " + fmt(t0) + ")");
    }
    if (m1 < m0) {
      throw ConfigError("curvature table: values must be non-decreasing (node " +
                        fmt(m1) + " after " + fmt(m0) + ")");
    }
    if (!std::isfinite(t1) || !std::isfinite(m1)) {
      throw ConfigError("curvature table: nodes must be finite");
    }
    // mu(tau) = A + B tau^2 on [t0, t1]; A = 0 on the first segment.
    double B = (m1 - m0) / (t1 * t1 - t0 * t0);
    double A = m0 - B * t0 * t0;
    double seg = (t0 == 0.0) ? 0.5 * B * t1 * t1
                             : A * std::log(t1 / t0) + 0.5 * B * (t1 * t1 - t0 * t0);
    data->sigma[i] = data->sigma[i - 1] + seg;
  }
  CurvatureModel m;
  m.kind_ = Kind::kTable;
  m.radius_limit_ = data->t.back();
  m.convex_ = convex_full_domain;
  m.table_ = std::move(data);
  return m;
}

double CurvatureModel::mu_hat(double t) const {
  check_radius(t, radius_limit_, "mu_hat");
  switch (kind_) {
    case Kind::kQuadratic:
      return 0.5 * l_ * t * t;
    case Kind::kHoelder:
      return l_ * std::pow(t, 1.0 + nu_) / (1.0 + nu_);
    case Kind::kSum: {
      double s = 0;
      for (const auto& p : parts_) s += p.mu_hat(t);
      return s;
    }
    case Kind::kTable: {
      const auto& d = *table_;
      auto it = std::lower_bound(d.t.begin(), d.t.end(), t);
      size_t i = static_cast<size_t>(it - d.t.begin());
      if (i < d.t.size() && d.t[i] == t) return d.mu[i];
      double t0 = d.t[i - 1], t1 = d.t[i];
      double B = (d.mu[i] - d.mu[i - 1]) / (t1 * t1 - t0 * t0);
      return d.mu[i - 1] + B * (t * t - t0 * t0);
    }
  }
  return 0;  // unreachable
}

double CurvatureModel::sigma_hat(double r) const {
  check_radius(r, radius_limit_, "sigma_hat");
  switch (kind_) {
    case Kind::kQuadratic:
      return 0.25 * l_ * r * r;
    case Kind::kHoelder:
      return l_ * std::pow(r, 1.0 + nu_) / ((1.0 + nu_) * (1.0 + nu_));
    case Kind::kSum: {
      double s = 0;
      for (const auto& p : parts_) s += p.sigma_hat(r);
      return s;
    }
    case Kind::kTable: {
      const auto& d = *table_;
      auto it = std::lower_bound(d.t.begin(), d.t.end(), r);
      size_t i = static_cast<size_t>(it - d.t.begin());
      if (i < d.t.size() && d.t[i] == r) return d.sigma[i];
      double t0 = d.t[i - 1], t1 = d.t[i];
      double B = (d.mu[i] - d.mu[i - 1]) / (t1 * t1 - t0 * t0);
      double A = d.mu[i - 1] - B * t0 * t0;
      double part = (t0 == 0.0) ? 0.5 * B * r * r
                                : A * std::log(r / t0) + 0.5 * B * (r * r - t0 * t0);
      return d.sigma[i - 1] + part;
    }
  }
  return 0;  // unreachable
}

std::pair<double, double> CurvatureModel::delta_plus_and_lip(double r) const {
  if (!(r > 0)) throw DomainError("delta_plus_and_lip: radius must be > 0, got " + fmt(r));
  double mu = mu_hat(r);
  double sg = sigma_hat(r);
  double dp = 2.0 * sg - mu;
  if (dp < 0) dp = 0;  // non-negative for any valid curve; absorb roundoff
  return {dp, 2.0 * mu / (r * r)};
}

double CurvatureModel::invert_mu(double eps, const GaugeConfig& cfg) const {
  return invert_monotone([this](double t) { return mu_hat(t); }, eps,
                         radius_limit_, cfg, "invert_mu");
}

double CurvatureModel::invert_sigma(double eps, const GaugeConfig& cfg) const {
  return invert_monotone([this](double r) { return sigma_hat(r); }, eps,
                         radius_limit_, cfg, "invert_sigma");
}

double CurvatureModel::gamma_simple(double t, const GaugeConfig& cfg) const {
  if (!(t > 0)) throw DomainError("gamma_simple: accuracy must be > 0, got " + fmt(t));
  double s = invert_mu(0.5 * t, cfg);
  return t / (s * s);
}

double CurvatureModel::gamma_hat(double t, const GaugeConfig& cfg) const {
  if (!(t > 0)) throw DomainError("gamma_hat: accuracy must be > 0, got " + fmt(t));
  double s = invert_sigma(0.5 * t, cfg);
  return 2.0 * t / (s * s);
}

const EmpiricalCurve* CurvatureModel::curve() const {
  if (kind_ == Kind::kTable && table_->is_empirical) return &table_->provenance;
  return nullptr;
}

std::string CurvatureModel::describe() const {
  char buf[128];
  switch (kind_) {
    case Kind::kQuadratic:
      std::snprintf(buf, sizeof buf, "quadratic(L=%g)", l_);
      return buf;
    case Kind::kHoelder:
      std::snprintf(buf, sizeof buf, "hoelder(nu=%g,L=%g)", nu_, l_);
      return buf;
    case Kind::kSum: {
      std::string s = "sum[";
      for (size_t i = 0; i < parts_.size(); ++i) {
        if (i) s += " + ";
        s += parts_[i].describe();
      }
      return s + "]";
    }
    case Kind::kTable:
      std::snprintf(buf, sizeof buf, "%s(nodes=%zu,rmax=%g)",
                    table_->is_empirical ? "empirical" : "table",
                    table_->t.size(), radius_limit_);
      return buf;
  }
  return "?";
}

double sum_class_radius(double L0, double L1, double eps) {
  if (!(L0 >= 0) || !(L1 >= 0) || L0 + L1 <= 0) {
    throw DomainError("sum_class_radius: needs L0, L1 >= 0 with L0 + L1 > 0");
  }
  if (!(eps > 0)) throw DomainError("sum_class_radius: accuracy must be > 0");
  return 2.0 * eps / (L0 + std::sqrt(2.0 * eps * L1 + L0 * L0));
}

void write_curve_csv(const std::string& path, const EmpiricalCurve& curve) {
  if (curve.t.size() != curve.mu.size()) {
    throw ConfigError("write_curve_csv: column lengths differ");
  }
  std::ofstream out(path);
  if (!out) throw Error("write_curve_csv: cannot open " + path);
  out << "t,mu_hat\n";
  char buf[96];
  for (size_t i = 0; i < curve.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", curve.t[i], curve.mu[i]);
    out << buf;
  }
  if (!out) throw Error("write_curve_csv: write failed for " + path);
}

EmpiricalCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_curve_csv: cannot open " + path);
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError("read_curve_csv: empty file", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,mu_hat") {
    throw ParseError("read_curve_csv: expected header 't,mu_hat', got '" + line + "'", lineno);
  }
  EmpiricalCurve curve;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw ParseError("read_curve_csv: expected two fields", lineno);
    }
    size_t pos = 0;
    double t = 0, mu = 0;
    try {
      t = std::stod(a, &pos);
      if (pos != a.size()) throw std::invalid_argument(a);
      mu = std::stod(b, &pos);
      if (pos != b.size()) throw std::invalid_argument(b);
    } catch (const std::exception&) {
      throw ParseError("read_curve_csv: bad number in '" + line + "'", lineno);
    }
    if (!curve.t.empty()) {
      if (t <= curve.t.back()) {
        throw ParseError("read_curve_csv: radii must be strictly increasing", lineno);
      }
      if (mu < curve.mu.back()) {
        throw ParseError("read_curve_csv: values must be non-decreasing", lineno);
      }
    }
    curve.t.push_back(t);
    curve.mu.push_back(mu);
  }
  if (curve.t.size() < 2) throw ParseError("read_curve_csv: needs at least two rows", lineno);
  return curve;
}

}  // namespace ucopt
