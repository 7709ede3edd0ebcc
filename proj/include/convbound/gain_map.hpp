#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>

#include "convbound/linalg.hpp"

namespace convbound {

/// A map x -> Gamma(x) together with a declared gain nu, ||Gamma(x)|| <= nu ||x||.
class GainBoundedMap {
 public:
  using Fn = std::function<Vector(const Vector&)>;

  GainBoundedMap(std::size_t in_dim, std::size_t out_dim, double gain, Fn fn,
                 std::string name = "custom")
      : in_(in_dim), out_(out_dim), gain_(gain), fn_(std::move(fn)), name_(std::move(name)) {
    if (!(gain_ >= 0.0) || !std::isfinite(gain_))
      throw ParameterError("declared gain must be finite and nonnegative");
  }

  Vector operator()(const Vector& x) const {
    require_size(x, static_cast<Eigen::Index>(in_), "gain-bounded map input");
    Vector y = fn_(x);
    require_size(y, static_cast<Eigen::Index>(out_), "gain-bounded map output");
    return y;
  }

  double gain() const { return gain_; }
  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }
  const std::string& name() const { return name_; }

  static GainBoundedMap identity(std::size_t n) {
    return {n, n, 1.0, [](const Vector& x) { return x; }, "identity"};
  }

  static GainBoundedMap linear(Matrix a) {
    const double g = induced_norm(a);
    const auto in = static_cast<std::size_t>(a.cols());
    const auto out = static_cast<std::size_t>(a.rows());
    return {in, out, g, [a = std::move(a)](const Vector& x) -> Vector { return a * x; }, "linear"};
  }

  // |sin(s)| <= |s| componentwise.
  static GainBoundedMap elementwise_sin(std::size_t n) {
    return {n, n, 1.0, [](const Vector& x) -> Vector { return x.array().sin().matrix(); }, "sin"};
  }

  // tanh(k s), gain k.
  static GainBoundedMap elementwise_tanh(std::size_t n, double k) {
    return {n, n, std::abs(k),
            [k](const Vector& x) -> Vector { return (k * x.array()).tanh().matrix(); }, "tanh"};
  }

  // Scalar nu * ||x||.
  static GainBoundedMap scaled_norm(std::size_t n, double nu) {
    return {n, 1, std::abs(nu),
            [nu](const Vector& x) -> Vector { return Vector::Constant(1, std::abs(nu) * x.norm()); },
            "norm"};
  }

  // Scalar v . x, gain ||v||.
  static GainBoundedMap linear_functional(Vector v) {
    const double g = v.norm();
    const auto n = static_cast<std::size_t>(v.size());
    return {n, 1, g, [v = std::move(v)](const Vector& x) -> Vector {
              return Vector::Constant(1, v.dot(x));
            },
            "linear_functional"};
  }

 private:
  std::size_t in_;
  std::size_t out_;
  double gain_;
  Fn fn_;
  std::string name_;
};

/// Largest observed ||Gamma(x)|| / ||x|| over random x spread across scales.
inline double spot_check_gain(const GainBoundedMap& map, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> log_scale(-6.0, 6.0);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vector x(static_cast<Eigen::Index>(map.in_dim()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    x *= std::pow(10.0, log_scale(rng));
    const double nx = x.norm();
    if (nx == 0.0) continue;
    worst = std::max(worst, map(x).norm() / nx);
  }
  return worst;
}

}  // namespace convbound
