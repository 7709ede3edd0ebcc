#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "convbound/controller.hpp"
#include "convbound/estimator.hpp"
#include "convbound/parameter_set.hpp"

namespace convbound {

// |b_hat| below this cannot be inverted by the certainty-equivalence law.
inline constexpr double kMinInputGain = 1e-12;

/// u(t) = -(a_hat / b_hat) y(t) + y*(t+1) / b_hat, for theta_hat = (a_hat, b_hat).
inline double osa_control(const Vector& theta_hat, double y, double y_star_next) {
  require_size(theta_hat, 2, "first-order estimate");
  const double b = theta_hat(1);
  if (std::abs(b) < kMinInputGain)
    throw ConfigurationError("estimated input gain is zero; the estimator set must exclude b = 0");
  return -(theta_hat(0) / b) * y + y_star_next / b;
}

// Index (1 or 2) of the smaller prediction error; exact ties keep the previous index.
inline int osa_switch(double e1_next, double e2_next, int sigma_prev) {
  const double a1 = std::abs(e1_next), a2 = std::abs(e2_next);
  if (a1 < a2) return 1;
  if (a2 < a1) return 2;
  return sigma_prev;
}

struct OsaConfig {
  std::array<ParameterSet, 2> sets;
  std::array<Vector, 2> initial;  // theta_hat_i(t0) = (a, b)
  int sigma0 = 1;
};

/// Two projection estimators (one per convex set) with switching on the
/// smaller one-step prediction error. r(t) = y*(t+1).
class OsaController {
 public:
  explicit OsaController(OsaConfig cfg) : sets_(std::move(cfg.sets)), sigma_(cfg.sigma0) {
    if (sigma_ != 1 && sigma_ != 2) throw ConfigurationError("initial switching index must be 1 or 2");
    for (int i = 0; i < 2; ++i) {
      if (sets_[i].dim() != 2) throw DimensionError("first-order estimator sets must be two-dimensional");
      if (!sets_[i].is_convex()) throw ConfigurationError("estimator sets must be convex");
      require_size(cfg.initial[i], 2, "initial estimate");
      if (sets_[i].distance(cfg.initial[i]) > 1e-9)
        throw ConfigurationError("initial estimate " + std::to_string(i + 1) + " lies outside its set");
      const auto [blo, bhi] = sets_[i].coordinate_range(1);
      if (blo <= 0.0 && bhi >= 0.0)
        throw ConfigurationError("estimator set " + std::to_string(i + 1) + " contains b = 0");
      est_[i] = EstimatorState{cfg.initial[i], i + 1};
      err_[i] = Vector::Zero(1);
    }
  }

  bool reads_current_input() const { return false; }
  bool input_from_initial_window() const { return false; }

  Vector begin_step(long t, const Signal& ref) { return ref(t + 1); }

  Vector control(const Regressor& phi_pre, const Vector& r) {
    return Vector::Constant(1, osa_control(est_[sigma_ - 1].theta_hat, phi_pre.y(0)(0), r(0)));
  }

  void observe(const Regressor& phi, const Vector&, const Vector& y_next) {
    for (int i = 0; i < 2; ++i) {
      err_[i] = prediction_error(est_[i].theta_hat, phi.flat(), y_next);
      est_[i] = projection_update(est_[i], phi.flat(), err_[i], sets_[i]);
    }
    sigma_ = osa_switch(err_[0](0), err_[1](0), sigma_);
  }

  ControllerSnapshot snapshot() const {
    return {Vector(), sigma_, {est_[0].theta_hat, est_[1].theta_hat}, {err_[0], err_[1]}};
  }
  std::vector<std::string> events() const { return {}; }

  int sigma() const { return sigma_; }
  const EstimatorState& estimator(int i) const { return est_.at(static_cast<std::size_t>(i - 1)); }
  const ParameterSet& set(int i) const { return sets_.at(static_cast<std::size_t>(i - 1)); }

 private:
  std::array<ParameterSet, 2> sets_;
  std::array<EstimatorState, 2> est_;
  std::array<Vector, 2> err_;
  int sigma_;
};

static_assert(ClosedLoopController<OsaController>);

}  // namespace convbound
