#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "convbound/controller.hpp"
#include "convbound/errors.hpp"
#include "convbound/plant.hpp"
#include "convbound/regressor.hpp"
#include "convbound/signals.hpp"
#include "convbound/time_variation.hpp"
#include "convbound/trace.hpp"
#include "convbound/umd.hpp"

namespace convbound {

struct SimulationOptions {
  double overflow_threshold = 1e12;  // on ||phi(t)||
};

struct UmdConfig {
  UnmodelledDynamicsSpec spec;
  DirectionSource direction;
};

/// Closed-loop recursion over t = t0 .. t0+T. At each t the controller sees
/// the regressor with u(t) masked, picks u(t), the completed phi(t) drives the
/// plant, then the controller observes y(t+1). A regressor norm above the
/// overflow threshold (or a non-finite value) ends the run and marks divergence.
template <ClosedLoopController C>
ClosedLoopTrace run_closed_loop(const PlantSpec& plant, C& controller, const ParameterTrajectory& theta,
                                const Signal& w, const Signal& ref, std::optional<UmdConfig> umd, long t0,
                                long horizon, const Regressor& phi0, SimulationOptions opts = {}) {
  plant.validate();
  if (controller.reads_current_input())
    throw ConfigurationError("controller reads u(t) from phi(t); the loop is not well posed");
  if (horizon < 0) throw ParameterError("horizon must be >= 0");
  if (!(phi0.layout() == plant.layout)) throw DimensionError("initial window layout differs from plant layout");
  if (!all_finite(phi0.flat())) throw InitializationError("initial window must be finite");
  if (theta.t0() > t0 || theta.t_last() < t0 + horizon)
    throw InitializationError("parameter trajectory does not cover [t0, t0+T]");
  if (w.dim() != plant.layout.r) throw DimensionError("disturbance dimension differs from output dimension");
  if (umd) umd->spec.validate();

  ClosedLoopTrace trace;
  trace.layout = plant.layout;
  trace.t0 = t0;
  trace.initial_window = phi0;
  trace.has_umd = umd.has_value();
  trace.steps.reserve(static_cast<std::size_t>(horizon) + 1);

  const auto r_dim = static_cast<Eigen::Index>(plant.layout.r);
  UmdState m_state{umd ? umd->spec.m0 : 0.0};
  Regressor phi = phi0;

  for (long t = t0; t <= t0 + horizon; ++t) {
    const Vector r = controller.begin_step(t, ref);
    Vector u = (t == t0 && controller.input_from_initial_window())
                   ? phi0.u(0)
                   : controller.control(phi.masked_current_input(), r);
    const Regressor full = phi.with_current_input(u);
    const Vector w_t = w(t);
    const Vector y_now = plant.layout.n_y > 0 ? full.y(0) : Vector::Zero(r_dim);

    Vector d = Vector::Zero(r_dim);
    if (umd) {
      const auto dist = umd_disturbance(umd->spec, m_state, full.flat(), umd->direction.next(y_now));
      d = dist.d;
      if (dist.clamped) trace.events.push_back("t=" + std::to_string(t) + ": direction clamped to unit norm");
    }

    const ControllerSnapshot snap = controller.snapshot();
    TraceStep step;
    step.t = t;
    step.y = y_now;
    step.u = u;
    step.phi = full.flat();
    step.z1 = snap.z1;
    step.w = w_t;
    step.r = r;
    step.d = d;
    step.m = m_state.m;
    step.sigma = snap.sigma;
    step.theta_star = theta.at(t);
    step.theta_hat = snap.estimates;
    step.errors = snap.errors;
    trace.steps.push_back(std::move(step));

    const bool finite = all_finite(full.flat()) && all_finite(r) && all_finite(d);
    if (!finite || full.norm() > opts.overflow_threshold) {
      trace.diverged = true;
      trace.divergence_time = t;
      trace.events.push_back("t=" + std::to_string(t) + ": regressor norm exceeded the overflow threshold");
      break;
    }
    if (t == t0 + horizon) break;

    const Vector y_next = plant_step(plant, theta.at(t), full, w_t, d);
    controller.observe(full, r, y_next);
    if (umd) m_state = umd_step(umd->spec, m_state, full.flat());
    phi = full.advance(y_next);
  }

  for (auto& e : controller.events()) trace.events.push_back(std::move(e));
  return trace;
}

}  // namespace convbound
