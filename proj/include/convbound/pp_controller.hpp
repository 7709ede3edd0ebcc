#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "convbound/controller.hpp"
#include "convbound/estimator.hpp"
#include "convbound/parameter_set.hpp"
#include "convbound/polynomial.hpp"

namespace convbound {

/// r_2(t) = sum_j p_j y*(t-j+1) with p = (p_1..p_n) frozen at the epoch start.
/// y_star_hist is chronological and ends at y*(t).
inline double pp_filtered_reference(std::span<const double> p, std::span<const double> y_star_hist) {
  if (y_star_hist.size() < p.size())
    throw InitializationError("filtered reference needs " + std::to_string(p.size()) + " reference samples");
  double r2 = 0.0;
  const std::size_t last = y_star_hist.size() - 1;
  for (std::size_t j = 0; j < p.size(); ++j) r2 += p[j] * y_star_hist[last - j];
  return r2;
}

/// Worst normalised prediction error over one epoch: max over phi(j) != 0 of
/// |e(j+1)| / ||phi(j)||, and 0 when every regressor of the epoch is zero.
inline double pp_performance(std::span<const Vector> errors, std::span<const Vector> regressors) {
  if (errors.size() != regressors.size()) throw DimensionError("errors and regressors differ in count");
  double j_max = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (is_zero_regressor(regressors[k])) continue;
    j_max = std::max(j_max, errors[k].norm() / regressors[k].norm());
  }
  return j_max;
}

inline int pp_switch(double j1, double j2, int sigma_prev) {
  if (j1 < j2) return 1;
  if (j2 < j1) return 2;
  return sigma_prev;
}

// u(t) = K phi(t-1) + r_2(t-1)
inline double pp_control(const Vector& gains, const Vector& phi_prev, double r2_prev) {
  require_size(phi_prev, gains.size(), "previous regressor");
  return gains.dot(phi_prev) + r2_prev;
}

struct PpConfig {
  std::size_t n = 1;
  std::array<ParameterSet, 2> sets;
  std::array<Vector, 2> initial;  // [a_1..a_n, b_1..b_n]
  int sigma0 = 1;
  std::size_t period = 2;  // N >= 2n
};

struct PpControllerState {
  std::size_t n = 1;
  std::size_t period = 2;
  std::array<EstimatorState, 2> est;
  int sigma = 1;
  long epoch_start = 0;
  std::array<Vector, 2> gains;
  std::array<bool, 2> has_gains{false, false};
  std::array<double, 2> perf{0.0, 0.0};  // running J_i over the current epoch
  Vector p_snapshot;                      // p_1..p_n of the active index
  std::vector<std::string> events;
};

/// Recomputes both gain vectors from the current estimates at an epoch start
/// and snapshots p for the active index. A near-singular Diophantine system
/// keeps the previous gains (logged); without previous gains it propagates.
inline PpControllerState pp_epoch_refresh(PpControllerState st, const Vector& theta1, const Vector& theta2,
                                          long t_hat) {
  const std::array<const Vector*, 2> thetas{&theta1, &theta2};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto [a, b] = plant_polynomials(*thetas[i], st.n);
    try {
      st.gains[i] = deadbeat_gains(solve_deadbeat_diophantine(a, b, st.n), st.n);
      st.has_gains[i] = true;
    } catch (const NearSingularError& e) {
      if (!st.has_gains[i]) throw;
      st.events.push_back("t=" + std::to_string(t_hat) + ": estimator " + std::to_string(i + 1) +
                          " kept previous gains (" + e.what() + ")");
    }
  }
  st.epoch_start = t_hat;
  st.p_snapshot = -st.gains[static_cast<std::size_t>(st.sigma - 1)].head(static_cast<Eigen::Index>(st.n));
  return st;
}

/// Two projection estimators, deadbeat pole placement, gains and switching
/// index frozen over epochs of N steps. r(t) = r_2(t).
class PpController {
 public:
  explicit PpController(PpConfig cfg) : sets_(std::move(cfg.sets)) {
    if (cfg.n == 0) throw ConfigurationError("plant order must be >= 1");
    if (cfg.period < 2 * cfg.n) throw ConfigurationError("switching period N must be >= 2n");
    if (cfg.sigma0 != 1 && cfg.sigma0 != 2) throw ConfigurationError("initial switching index must be 1 or 2");
    st_.n = cfg.n;
    st_.period = cfg.period;
    st_.sigma = cfg.sigma0;
    for (std::size_t i = 0; i < 2; ++i) {
      if (!sets_[i].is_convex()) throw ConfigurationError("estimator sets must be convex");
      if (sets_[i].dim() != 2 * cfg.n) throw DimensionError("estimator set dimension must be 2n");
      require_size(cfg.initial[i], static_cast<Eigen::Index>(2 * cfg.n), "initial estimate");
      if (sets_[i].distance(cfg.initial[i]) > 1e-9)
        throw ConfigurationError("initial estimate " + std::to_string(i + 1) + " lies outside its set");
      st_.est[i] = EstimatorState{cfg.initial[i], static_cast<int>(i + 1)};
      err_[i] = Vector::Zero(1);
    }
  }

  bool reads_current_input() const { return false; }
  bool input_from_initial_window() const { return true; }

  Vector begin_step(long t, const Signal& ref) {
    if (!t0_) t0_ = t;
    const long since = t - *t0_;
    if (since % static_cast<long>(st_.period) == 0) {
      if (since > 0) {
        st_.sigma = pp_switch(st_.perf[0], st_.perf[1], st_.sigma);
        st_.perf = {0.0, 0.0};
      }
      const Vector th1 = st_.est[0].theta_hat;
      const Vector th2 = st_.est[1].theta_hat;
      st_ = pp_epoch_refresh(std::move(st_), th1, th2, t);
    }
    r2_ = filtered_reference(st_.p_snapshot, ref, t);
    return Vector::Constant(1, r2_);
  }

  Vector control(const Regressor&, const Vector&) {
    if (!pending_) throw InitializationError("pole-placement control needs phi(t-1); u(t0) comes from phi0");
    return Vector::Constant(1, *pending_);
  }

  void observe(const Regressor& phi, const Vector&, const Vector& y_next) {
    const Vector& x = phi.flat();
    const bool nonzero = !is_zero_regressor(x);
    for (std::size_t i = 0; i < 2; ++i) {
      err_[i] = prediction_error(st_.est[i].theta_hat, x, y_next);
      if (nonzero) st_.perf[i] = std::max(st_.perf[i], err_[i].norm() / x.norm());
    }
    // u(t+1) uses the gains and index in force at t.
    pending_ = pp_control(st_.gains[static_cast<std::size_t>(st_.sigma - 1)], x, r2_);
    for (std::size_t i = 0; i < 2; ++i) st_.est[i] = projection_update(st_.est[i], x, err_[i], sets_[i]);
  }

  ControllerSnapshot snapshot() const {
    return {Vector(), st_.sigma, {st_.est[0].theta_hat, st_.est[1].theta_hat}, {err_[0], err_[1]}};
  }
  std::vector<std::string> events() const { return st_.events; }

  const PpControllerState& state() const { return st_; }
  const ParameterSet& set(int i) const { return sets_.at(static_cast<std::size_t>(i - 1)); }

  static double filtered_reference(const Vector& p, const Signal& ref, long t) {
    std::vector<double> hist;
    for (long k = t - static_cast<long>(p.size()) + 1; k <= t; ++k) hist.push_back(ref(k)(0));
    return pp_filtered_reference(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), hist);
  }

 private:
  std::array<ParameterSet, 2> sets_;
  PpControllerState st_;
  std::array<Vector, 2> err_;
  std::optional<long> t0_;
  std::optional<double> pending_;
  double r2_ = 0.0;
};

/// Pole placement at the true parameter: fixed deadbeat gains, no estimation.
class DeadbeatController {
 public:
  DeadbeatController(const Vector& theta_star, std::size_t n) : n_(n) {
    const auto [a, b] = plant_polynomials(theta_star, n);
    const auto sol = solve_deadbeat_diophantine(a, b, n);
    gains_ = deadbeat_gains(sol, n);
    p_ = -gains_.head(static_cast<Eigen::Index>(n));
  }

  bool reads_current_input() const { return false; }
  bool input_from_initial_window() const { return true; }

  Vector begin_step(long t, const Signal& ref) {
    r2_ = PpController::filtered_reference(p_, ref, t);
    return Vector::Constant(1, r2_);
  }

  Vector control(const Regressor&, const Vector&) {
    if (!pending_) throw InitializationError("deadbeat control needs phi(t-1); u(t0) comes from phi0");
    return Vector::Constant(1, *pending_);
  }

  void observe(const Regressor& phi, const Vector&, const Vector&) { pending_ = pp_control(gains_, phi.flat(), r2_); }

  ControllerSnapshot snapshot() const { return {}; }
  std::vector<std::string> events() const { return {}; }
  const Vector& gains() const { return gains_; }
  std::size_t order() const { return n_; }

 private:
  std::size_t n_;
  Vector gains_;
  Vector p_;
  std::optional<double> pending_;
  double r2_ = 0.0;
};

static_assert(ClosedLoopController<PpController>);
static_assert(ClosedLoopController<DeadbeatController>);

}  // namespace convbound
