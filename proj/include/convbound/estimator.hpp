#pragma once

#include "convbound/linalg.hpp"
#include "convbound/parameter_set.hpp"

namespace convbound {

// Regressors with ||phi||^2 below this are treated as exactly zero (underflow guard only).
inline constexpr double kZeroRegressorSquaredNorm = 1e-300;

inline bool is_zero_regressor(const Vector& phi) { return phi.squaredNorm() < kZeroRegressorSquaredNorm; }

/// Estimate of one projection-algorithm estimator; theta_hat is p x r.
struct EstimatorState {
  Matrix theta_hat;
  int set_index = 1;
};

// e_i(t+1) = y(t+1) - theta_hat_i(t)^T phi(t)
inline Vector prediction_error(const Matrix& theta_hat, const Vector& phi, const Vector& y_next) {
  require_size(phi, theta_hat.rows(), "regressor");
  require_size(y_next, theta_hat.cols(), "y(t+1)");
  return y_next - theta_hat.transpose() * phi;
}

/// One projection-algorithm step: theta_check = theta_hat + phi e^T / ||phi||^2,
/// then projection onto the estimator's convex set. phi = 0 leaves the state as is.
inline EstimatorState projection_update(const EstimatorState& state, const Vector& phi,
                                        const Vector& e_next, const ParameterSet& set) {
  require_size(phi, state.theta_hat.rows(), "regressor");
  require_size(e_next, state.theta_hat.cols(), "prediction error");
  if (is_zero_regressor(phi)) return state;
  const Matrix check = state.theta_hat + (phi * e_next.transpose()) / phi.squaredNorm();
  const Vector projected = set.project(flatten_row_major(check));
  return {unflatten_row_major(projected, check.rows(), check.cols()), state.set_index};
}

}  // namespace convbound
