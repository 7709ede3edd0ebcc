#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "convbound/errors.hpp"
#include "convbound/trace.hpp"

namespace convbound {

/// Per-step norms needed by the bound: state ||x(t)||, exogenous ||r(t)||+||w(t)||
/// and ||r(t)|| alone.
struct BoundSeries {
  long t0 = 0;
  std::vector<double> state;
  std::vector<double> exo;
  std::vector<double> ref;

  std::size_t size() const { return state.size(); }

  static BoundSeries from_trace(const ClosedLoopTrace& trace, StateKind kind) {
    BoundSeries s;
    s.t0 = trace.t0;
    for (const auto& step : trace.steps) {
      const double rn = step.r.size() ? step.r.norm() : 0.0;
      s.state.push_back(state_norm(step, kind));
      s.exo.push_back(rn + (step.w.size() ? step.w.norm() : 0.0));
      s.ref.push_back(rn);
    }
    return s;
  }

  // From an exported trace CSV (norm_phi_z1, m_umd, w_*, r_* columns).
  static BoundSeries from_table(const TraceTable& table, StateKind kind) {
    BoundSeries s;
    const auto& t = table.col("t");
    const auto& nx = table.col("norm_phi_z1");
    const auto& m = table.col("m_umd");
    const auto ws = table.group("w_");
    const auto rs = table.group("r_");
    s.t0 = t.empty() ? 0 : static_cast<long>(t.front());
    for (std::size_t k = 0; k < table.rows(); ++k) {
      double wn = 0.0, rn = 0.0;
      for (const auto* c : ws) wn += (*c)[k] * (*c)[k];
      for (const auto* c : rs) rn += (*c)[k] * (*c)[k];
      rn = std::sqrt(rn);
      const double x = kind == StateKind::phi_z1 ? nx[k] : std::sqrt(nx[k] * nx[k] + m[k] * m[k]);
      s.state.push_back(x);
      s.exo.push_back(rn + std::sqrt(wn));
      s.ref.push_back(rn);
    }
    return s;
  }
};

struct BoundCertificate {
  double c = 1.0;
  double lambda = 0.5;
  StateKind state_kind = StateKind::phi_z1;
  bool verified = false;
  double max_slack = -std::numeric_limits<double>::infinity();  // max of LHS - RHS over pairs
  std::pair<long, long> worst_pair{0, 0};                         // (tau, t)
};

enum class TauRange { all, initial_only };

namespace detail {

inline void check_decay(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in (0, 1)");
}

// Calls fn(k_tau, k_t, D) for every pair with D the bound's right side at c = 1:
// D = lambda^{t-tau} x(tau) + sum_{j=tau}^{t-1} lambda^{t-j-1} exo(j) + ref(t).
template <class Fn>
void for_each_pair(const BoundSeries& s, double lambda, TauRange range, Fn&& fn) {
  const std::size_t n = s.size();
  const std::size_t tau_end = range == TauRange::all ? n : std::min<std::size_t>(n, 1);
  for (std::size_t a = 0; a < tau_end; ++a) {
    double g = s.state[a];
    for (std::size_t b = a; b < n; ++b) {
      fn(a, b, g + s.ref[b]);
      g = lambda * g + s.exo[b];
    }
  }
}

inline double trace_scale(const BoundSeries& s) {
  double m = 0.0;
  for (double x : s.state) m = std::max(m, x);
  return m;
}

}  // namespace detail

/// Checks ||x(t)|| <= c lambda^{t-tau} ||x(tau)|| + sum_{j=tau}^{t-1} c lambda^{t-j-1}
/// (||r(j)|| + ||w(j)||) + c ||r(t)|| for all t >= tau, in O(T^2).
/// Pairs pass when LHS <= RHS (1 + 1e-9) + 1e-12 max ||x||.
inline BoundCertificate check_convolution_bound(const BoundSeries& s, double c, double lambda, StateKind kind,
                                                TauRange range = TauRange::all) {
  detail::check_decay(lambda);
  if (!(c >= 1.0) || !std::isfinite(c)) throw ParameterError("c must be finite and >= 1");
  BoundCertificate cert{c, lambda, kind, true};
  const double abs_tol = 1e-12 * detail::trace_scale(s);
  detail::for_each_pair(s, lambda, range, [&](std::size_t a, std::size_t b, double d) {
    const double rhs = c * d;
    const double lhs = s.state[b];
    const double slack = lhs - rhs;
    if (slack > cert.max_slack) {
      cert.max_slack = slack;
      cert.worst_pair = {s.t0 + static_cast<long>(a), s.t0 + static_cast<long>(b)};
    }
    if (!(lhs <= rhs * (1.0 + 1e-9) + abs_tol)) cert.verified = false;
  });
  if (s.size() == 0) cert.max_slack = 0.0;
  return cert;
}

inline BoundCertificate check_convolution_bound(const ClosedLoopTrace& trace, double c, double lambda,
                                                StateKind kind, TauRange range = TauRange::all) {
  return check_convolution_bound(BoundSeries::from_trace(trace, kind), c, lambda, kind, range);
}

struct GainFit {
  double lambda = 0.5;
  double c_min = 1.0;
  std::pair<long, long> worst_pair{0, 0};
};

/// Smallest c >= 1 for which the bound holds on every pair: max ||x(t)|| / D(tau, t).
inline GainFit fit_minimal_gain(const BoundSeries& s, double lambda, TauRange range = TauRange::all) {
  detail::check_decay(lambda);
  GainFit fit{lambda, 1.0, {s.t0, s.t0}};
  double best = 0.0;
  detail::for_each_pair(s, lambda, range, [&](std::size_t a, std::size_t b, double d) {
    const double x = s.state[b];
    const long ta = s.t0 + static_cast<long>(a), tb = s.t0 + static_cast<long>(b);
    if (d <= 0.0) {
      if (x > 0.0)
        throw UnfittableError("state is nonzero at t=" + std::to_string(tb) +
                                  " while the bound's right side vanishes from tau=" + std::to_string(ta),
                              ta, tb);
      return;
    }
    const double ratio = x / d;
    if (ratio > best) {
      best = ratio;
      fit.worst_pair = {ta, tb};
    }
  });
  fit.c_min = std::max(1.0, best);
  return fit;
}

inline GainFit fit_minimal_gain(const ClosedLoopTrace& trace, double lambda, StateKind kind) {
  return fit_minimal_gain(BoundSeries::from_trace(trace, kind), lambda);
}

/// c_min over a lambda grid, sorted by lambda. c_min can only fall as lambda grows.
inline std::vector<GainFit> fit_gain_decay_frontier(const BoundSeries& s, std::vector<double> lambda_grid) {
  if (lambda_grid.empty()) throw ParameterError("lambda grid is empty");
  std::sort(lambda_grid.begin(), lambda_grid.end());
  std::vector<GainFit> out;
  for (double l : lambda_grid) {
    out.push_back(fit_minimal_gain(s, l));
    if (out.size() > 1) {
      const double prev = out[out.size() - 2].c_min;
      if (out.back().c_min > prev * (1.0 + 1e-12))
        throw ConvergenceError("fitted gain increased with lambda; the pair evaluation is inconsistent");
    }
  }
  return out;
}

/// Bound on ||[phi; z1; m]|| from t0 only, with gain c2 and decay lambda2.
inline BoundCertificate check_umd_closed_loop_bound(const ClosedLoopTrace& trace, double c2, double lambda2) {
  return check_convolution_bound(trace, c2, lambda2, StateKind::phi_z1_m, TauRange::initial_only);
}

}  // namespace convbound
