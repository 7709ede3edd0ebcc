#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "convbound/gain_map.hpp"
#include "convbound/linalg.hpp"
#include "convbound/trace.hpp"

namespace convbound {

/// m(t+1) = beta m(t) + beta |g(phi(t))|,  ||d(t)|| <= mu m(t) + mu |g(phi(t))|.
struct UnmodelledDynamicsSpec {
  double beta = 0.5;
  double mu = 0.0;
  GainBoundedMap g;
  double m0 = 0.0;

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw ParameterError("mu must be finite and >= 0");
    if (g.out_dim() != 1) throw DimensionError("g must be scalar-valued");
    if (!(m0 >= 0.0)) throw ParameterError("m0 must be >= 0");
  }
};

struct UmdState {
  double m = 0.0;
};

inline double umd_magnitude(const UnmodelledDynamicsSpec& spec, const UmdState& s, const Vector& phi) {
  return spec.mu * s.m + spec.mu * std::abs(spec.g(phi)(0));
}

inline UmdState umd_step(const UnmodelledDynamicsSpec& spec, const UmdState& s, const Vector& phi) {
  return {spec.beta * s.m + spec.beta * std::abs(spec.g(phi)(0))};
}

struct UmdDisturbance {
  Vector d;
  bool clamped = false;  // direction had norm > 1 and was rescaled
};

/// Bound-saturating realisation d = mu (m + |g(phi)|) dir with ||dir|| <= 1.
inline UmdDisturbance umd_disturbance(const UnmodelledDynamicsSpec& spec, const UmdState& s,
                                      const Vector& phi, Vector dir) {
  UmdDisturbance out;
  const double nd = dir.norm();
  if (nd > 1.0) {
    dir /= nd;
    out.clamped = true;
  }
  out.d = umd_magnitude(spec, s, phi) * dir;
  return out;
}

enum class DirectionMode { constant, random, adversarial };

inline DirectionMode direction_mode_from_string(const std::string& s) {
  if (s == "constant") return DirectionMode::constant;
  if (s == "random") return DirectionMode::random;
  if (s == "adversarial") return DirectionMode::adversarial;
  throw ParameterError("unknown direction mode '" + s + "'");
}

/// Directions for d: a fixed unit vector, seeded random unit vectors, or the
/// sign/direction of the current output (pushes y away from zero).
class DirectionSource {
 public:
  DirectionSource(DirectionMode mode, std::size_t dim, std::uint64_t seed = 0)
      : mode_(mode), dim_(dim), rng_(seed) {}

  Vector next(const Vector& y_now) {
    const auto n = static_cast<Eigen::Index>(dim_);
    Vector e0 = Vector::Zero(n);
    if (n > 0) e0(0) = 1.0;
    switch (mode_) {
      case DirectionMode::constant: return e0;
      case DirectionMode::random: {
        std::normal_distribution<double> normal;
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng_);
        const double nv = v.norm();
        return nv > 0.0 ? Vector(v / nv) : e0;
      }
      case DirectionMode::adversarial: {
        const double ny = y_now.norm();
        return ny > 0.0 ? Vector(y_now / ny) : e0;
      }
    }
    return e0;
  }

  DirectionMode mode() const { return mode_; }

 private:
  DirectionMode mode_;
  std::size_t dim_;
  std::mt19937_64 rng_;
};

struct UmdCheck {
  bool ok = true;                           // bound holds at every step with recomputed m
  std::optional<long> first_violation;
  bool state_consistent = true;             // recomputed m matches the recorded m
  std::optional<long> first_state_mismatch;
};

/// Rechecks the bound at every recorded step with m(t) recomputed from m0 and phi.
inline UmdCheck verify_umd_bound(const ClosedLoopTrace& trace, const UnmodelledDynamicsSpec& spec) {
  constexpr double rel = 1e-12;
  UmdCheck out;
  UmdState s{spec.m0};
  for (const auto& step : trace.steps) {
    if (std::abs(s.m - step.m) > rel * (1.0 + std::abs(s.m)) && out.state_consistent) {
      out.state_consistent = false;
      out.first_state_mismatch = step.t;
    }
    const double bound = umd_magnitude(spec, s, step.phi);
    const double dn = step.d.size() ? step.d.norm() : 0.0;
    if (dn > bound * (1.0 + rel) && out.ok) {
      out.ok = false;
      out.first_violation = step.t;
    }
    s = umd_step(spec, s, step.phi);
  }
  return out;
}

}  // namespace convbound
