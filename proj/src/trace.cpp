#include "ucopt/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ucopt/errors.hpp"

namespace ucopt {

namespace {

constexpr const char* kHeader = "k,i_k,L,f,f_tilde,grad_map_norm,tau,a,A,phi_star,step_norm";

void append_field(std::string& row, double v) {
  row.push_back(',');
  if (std::isnan(v)) return;  // non-applicable column
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  row += buf;
}

double parse_field(const std::string& s, long line) {
  if (s.empty()) return kNaN;
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("trace: bad number '" + s + "'", line);
  }
  if (pos != s.size()) throw ParseError("trace: bad number '" + s + "'", line);
  return v;
}

}  // namespace

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kAccuracyCertified:
      return "accuracy-certified";
    case StopReason::kGradientNorm:
      return "gradient-norm-reached";
    case StopReason::kMaxIters:
      return "max-iterations";
  }
  return "?";
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("write_trace_csv: cannot open " + path);
  out << kHeader << "\n";
  for (const auto& r : trace.rows) {
    std::string row = std::to_string(r.k);
    row.push_back(',');
    row += std::to_string(r.i_k);
    append_field(row, r.L);
    append_field(row, r.f);
    append_field(row, r.f_tilde);
    append_field(row, r.grad_map_norm);
    append_field(row, r.tau);
    append_field(row, r.a);
    append_field(row, r.A);
    append_field(row, r.phi_star);
    append_field(row, r.step_norm);
    out << row << "\n";
  }
  if (!out) throw Error("write_trace_csv: write failed for " + path);
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_trace_csv: cannot open " + path);
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError("trace: empty file", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw ParseError(std::string("trace: expected header '") + kHeader + "'", lineno);
  }
  Trace trace;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 11) {
      throw ParseError("trace: expected 11 fields, got " + std::to_string(fields.size()),
                       lineno);
    }
    IterationRecord r;
    double kv = parse_field(fields[0], lineno);
    double iv = parse_field(fields[1], lineno);
    if (std::isnan(kv) || kv != std::floor(kv) || std::isnan(iv) || iv != std::floor(iv)) {
      throw ParseError("trace: k and i_k must be integers", lineno);
    }
    r.k = static_cast<long>(kv);
    r.i_k = static_cast<int>(iv);
    r.L = parse_field(fields[2], lineno);
    r.f = parse_field(fields[3], lineno);
    r.f_tilde = parse_field(fields[4], lineno);
    r.grad_map_norm = parse_field(fields[5], lineno);
    r.tau = parse_field(fields[6], lineno);
    r.a = parse_field(fields[7], lineno);
    r.A = parse_field(fields[8], lineno);
    r.phi_star = parse_field(fields[9], lineno);
    r.step_norm = parse_field(fields[10], lineno);
    trace.rows.push_back(r);
  }
  return trace;
}

}  // namespace ucopt
