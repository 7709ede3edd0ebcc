#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "convbound/linalg.hpp"
#include "convbound/regressor.hpp"

namespace convbound {

struct TraceStep {
  long t = 0;
  Vector y, u, phi, z1, w, r, d;
  double m = 0.0;  // unmodelled-dynamics state m(t), 0 when absent
  int sigma = 0;   // active estimator index, 0 when the controller does not switch
  Matrix theta_star;
  std::vector<Vector> theta_hat;  // per estimator, flattened row-major
  std::vector<Vector> errors;     // per estimator e_i(t); zero at t0
};

struct ClosedLoopTrace {
  RegressorLayout layout;
  long t0 = 0;
  Regressor initial_window;
  std::vector<TraceStep> steps;
  bool has_umd = false;
  bool diverged = false;
  std::optional<long> divergence_time;
  std::vector<std::string> events;

  // Chronological y and u histories, including the pre-t0 samples carried by phi0.
  // Returns the index of t0 inside the histories.
  std::size_t histories(std::vector<Vector>& y_hist, std::vector<Vector>& u_hist) const {
    const std::size_t back = std::max(layout.n_y, layout.n_u) > 0 ? std::max(layout.n_y, layout.n_u) - 1 : 0;
    y_hist.assign(back, Vector::Zero(static_cast<Eigen::Index>(layout.r)));
    u_hist.assign(back, Vector::Zero(static_cast<Eigen::Index>(layout.m)));
    for (std::size_t k = 1; k <= back; ++k) {
      if (k < layout.n_y) y_hist[back - k] = initial_window.y(k);
      if (k < layout.n_u) u_hist[back - k] = initial_window.u(k);
    }
    for (const auto& s : steps) {
      y_hist.push_back(s.y);
      u_hist.push_back(s.u);
    }
    return back;
  }
};

enum class StateKind { phi_z1, phi_z1_m };

inline std::string to_string(StateKind k) { return k == StateKind::phi_z1 ? "phi_z1" : "phi_z1_m"; }

inline StateKind state_kind_from_string(const std::string& s) {
  if (s == "phi_z1") return StateKind::phi_z1;
  if (s == "phi_z1_m") return StateKind::phi_z1_m;
  throw ParameterError("unknown state kind '" + s + "' (expected phi_z1 or phi_z1_m)");
}

// ||[phi; z1]|| or ||[phi; z1; m]||.
inline double state_norm(const TraceStep& s, StateKind kind) {
  double sq = s.phi.squaredNorm() + s.z1.squaredNorm();
  if (kind == StateKind::phi_z1_m) sq += s.m * s.m;
  return std::sqrt(sq);
}

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// One row per step: t, y_*, u_*, w_*, r_*, sigma, m_umd, norm_phi_z1.
inline void write_trace_csv(std::ostream& os, const ClosedLoopTrace& trace) {
  const std::size_t ry = trace.layout.r, mu = trace.layout.m;
  const std::size_t rr = trace.steps.empty() ? ry : static_cast<std::size_t>(trace.steps.front().r.size());
  os << "t";
  for (std::size_t i = 0; i < ry; ++i) os << ",y_" << i;
  for (std::size_t i = 0; i < mu; ++i) os << ",u_" << i;
  for (std::size_t i = 0; i < ry; ++i) os << ",w_" << i;
  for (std::size_t i = 0; i < rr; ++i) os << ",r_" << i;
  os << ",sigma,m_umd,norm_phi_z1\n";
  for (const auto& s : trace.steps) {
    os << s.t;
    for (Eigen::Index i = 0; i < s.y.size(); ++i) os << ',' << detail::fmt17(s.y(i));
    for (Eigen::Index i = 0; i < s.u.size(); ++i) os << ',' << detail::fmt17(s.u(i));
    for (Eigen::Index i = 0; i < s.w.size(); ++i) os << ',' << detail::fmt17(s.w(i));
    for (Eigen::Index i = 0; i < s.r.size(); ++i) os << ',' << detail::fmt17(s.r(i));
    os << ',' << s.sigma << ',' << detail::fmt17(s.m) << ','
       << detail::fmt17(state_norm(s, StateKind::phi_z1)) << '\n';
  }
}

/// Columns of a trace CSV keyed by header name.
struct TraceTable {
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.begin()->second.size(); }
  const std::vector<double>& col(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) throw ParameterError("trace CSV has no column '" + name + "'");
    return it->second;
  }
  // All columns whose name starts with prefix (e.g. "w_"), in header order.
  std::vector<const std::vector<double>*> group(const std::string& prefix) const {
    std::vector<const std::vector<double>*> out;
    for (const auto& h : header)
      if (h.rfind(prefix, 0) == 0) out.push_back(&columns.at(h));
    return out;
  }
};

inline TraceTable read_trace_csv(std::istream& is) {
  TraceTable table;
  std::string line;
  if (!std::getline(is, line)) throw ParameterError("trace CSV is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      table.header.push_back(cell);
      table.columns[cell];
    }
  }
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= table.header.size()) throw ParameterError("trace CSV row " + std::to_string(row) + " is too long");
      table.columns[table.header[k++]].push_back(std::stod(cell));
    }
    if (k != table.header.size()) throw ParameterError("trace CSV row " + std::to_string(row) + " is too short");
  }
  return table;
}

}  // namespace convbound
