#pragma once

#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "convbound/linalg.hpp"
#include "convbound/regressor.hpp"
#include "convbound/signals.hpp"

namespace convbound {

/// Observable part of a controller state (z1, switching index, estimator z2 parts).
struct ControllerSnapshot {
  Vector z1;
  int sigma = 0;
  std::vector<Vector> estimates;
  std::vector<Vector> errors;
};

/// A controller z1(t+1) = g1(...), z2(t+1) = g2(...), u(t) = h(...), split into
/// the calls the simulator makes at each time t:
///   begin_step(t, ref)         -> r(t), the exogenous signal the controller sees
///   control(phi_pre, r)        -> u(t); phi_pre has the u(t) slot masked
///   observe(phi, r, y_next)    -> advance the state once y(t+1) is known
template <class C>
concept ClosedLoopController =
    requires(C c, const C cc, long t, const Signal& ref, const Regressor& phi, const Vector& v) {
      { cc.reads_current_input() } -> std::convertible_to<bool>;
      { cc.input_from_initial_window() } -> std::convertible_to<bool>;
      { c.begin_step(t, ref) } -> std::convertible_to<Vector>;
      { c.control(phi, v) } -> std::convertible_to<Vector>;
      { c.observe(phi, v, v) };
      { cc.snapshot() } -> std::convertible_to<ControllerSnapshot>;
      { cc.events() } -> std::convertible_to<std::vector<std::string>>;
    };

// u(t) = 0 with r(t) = ref(t); the open-loop baseline.
class ZeroInputController {
 public:
  explicit ZeroInputController(std::size_t input_dim) : m_(input_dim) {}

  bool reads_current_input() const { return false; }
  bool input_from_initial_window() const { return false; }
  Vector begin_step(long t, const Signal& ref) { return ref(t); }
  Vector control(const Regressor&, const Vector&) { return Vector::Zero(static_cast<Eigen::Index>(m_)); }
  void observe(const Regressor&, const Vector&, const Vector&) {}
  ControllerSnapshot snapshot() const { return {}; }
  std::vector<std::string> events() const { return {}; }

 private:
  std::size_t m_;
};

}  // namespace convbound
