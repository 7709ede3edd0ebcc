#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "convbound/gain_map.hpp"
#include "convbound/linalg.hpp"
#include "convbound/parameter_set.hpp"
#include "convbound/regressor.hpp"

namespace convbound {

/// y(t+1) = theta(t)^T f(phi(t)) + w(t) + d(t), theta in R^{p x r}.
struct PlantSpec {
  RegressorLayout layout;
  std::size_t p = 0;
  GainBoundedMap f;
  ParameterSet parameter_set;

  void validate() const {
    if (f.in_dim() != layout.size())
      throw DimensionError("feature map expects input of length " + std::to_string(f.in_dim()) +
                           " but the regressor has length " + std::to_string(layout.size()));
    if (f.out_dim() != p)
      throw DimensionError("feature map output length " + std::to_string(f.out_dim()) +
                           " differs from p = " + std::to_string(p));
    if (parameter_set.dim() != p * layout.r)
      throw DimensionError("parameter set dimension " + std::to_string(parameter_set.dim()) +
                           " differs from p*r = " + std::to_string(p * layout.r));
  }
};

// Scalar n-th order plant with theta = [a_1..a_n, b_1..b_n] and f = identity.
inline PlantSpec linear_siso_plant(std::size_t n, ParameterSet set) {
  const RegressorLayout layout{n, n, 1, 1};
  PlantSpec spec{layout, 2 * n, GainBoundedMap::identity(2 * n), std::move(set)};
  spec.validate();
  return spec;
}

inline Vector plant_step(const PlantSpec& spec, const Matrix& theta, const Vector& phi,
                         const Vector& w, const Vector& d) {
  const auto r = static_cast<Eigen::Index>(spec.layout.r);
  if (theta.rows() != static_cast<Eigen::Index>(spec.p) || theta.cols() != r)
    throw DimensionError("parameter matrix must be " + std::to_string(spec.p) + "x" +
                         std::to_string(spec.layout.r));
  require_size(phi, static_cast<Eigen::Index>(spec.layout.size()), "regressor");
  require_size(w, r, "disturbance w");
  require_size(d, r, "unmodelled dynamics d");
  return theta.transpose() * spec.f(phi) + w + d;
}

inline Vector plant_step(const PlantSpec& spec, const Matrix& theta, const Regressor& phi,
                         const Vector& w, const Vector& d) {
  if (!(phi.layout() == spec.layout)) throw DimensionError("regressor layout differs from plant layout");
  return plant_step(spec, theta, phi.flat(), w, d);
}

}  // namespace convbound
