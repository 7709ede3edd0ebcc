#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "convbound/linalg.hpp"

namespace convbound {

// Per-source seed from a master seed and a fixed label ("theta", "w", "r", "dir", ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (const char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  std::mt19937_64 gen(seq);
  return gen();
}

enum class SignalKind { zero, constant, sinusoid, uniform };

struct SignalSpec {
  SignalKind kind = SignalKind::zero;
  double amplitude = 0.0;
  double period = 50.0;  // sinusoid, in steps
  double phase = 0.0;    // sinusoid, radians
};

inline std::string to_string(SignalKind k) {
  switch (k) {
    case SignalKind::zero: return "zero";
    case SignalKind::constant: return "constant";
    case SignalKind::sinusoid: return "sinusoid";
    case SignalKind::uniform: return "uniform";
  }
  return "?";
}

/// Exogenous sequence sampled at integer times. Noise is drawn once over
/// [t_first, t_last]; deterministic signals are defined for every t.
class Signal {
 public:
  Signal(SignalSpec spec, std::size_t dim, std::uint64_t seed, long t_first, long t_last)
      : spec_(spec), dim_(dim), t_first_(t_first), t_last_(t_last) {
    if (t_last < t_first) throw ParameterError("signal range is empty");
    if (spec.kind == SignalKind::sinusoid && !(spec.period > 0.0))
      throw ParameterError("sinusoid period must be positive");
    if (spec.kind == SignalKind::uniform) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> dist(-std::abs(spec.amplitude), std::abs(spec.amplitude));
      const auto count = static_cast<std::size_t>(t_last - t_first + 1) * dim;
      samples_.resize(count);
      for (auto& s : samples_) s = spec.amplitude == 0.0 ? 0.0 : dist(rng);
    }
  }

  static Signal zero(std::size_t dim) { return Signal({}, dim, 0, 0, 0); }

  static Signal from_samples(std::vector<Vector> values, long t_first) {
    if (values.empty()) throw ParameterError("sampled signal needs at least one value");
    Signal s({SignalKind::uniform, 0.0}, static_cast<std::size_t>(values.front().size()), 0, t_first,
             t_first + static_cast<long>(values.size()) - 1);
    std::size_t k = 0;
    for (const auto& v : values) {
      require_size(v, static_cast<Eigen::Index>(s.dim_), "signal sample");
      for (Eigen::Index i = 0; i < v.size(); ++i) s.samples_[k++] = v(i);
    }
    return s;
  }

  Vector operator()(long t) const {
    const auto n = static_cast<Eigen::Index>(dim_);
    switch (spec_.kind) {
      case SignalKind::zero: return Vector::Zero(n);
      case SignalKind::constant: return Vector::Constant(n, spec_.amplitude);
      case SignalKind::sinusoid: {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
          v(i) = spec_.amplitude *
                 std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / spec_.period + spec_.phase +
                          0.5 * static_cast<double>(i));
        return v;
      }
      case SignalKind::uniform: {
        if (t < t_first_ || t > t_last_)
          throw InitializationError("signal sample at t=" + std::to_string(t) + " outside [" +
                                    std::to_string(t_first_) + ", " + std::to_string(t_last_) + "]");
        const auto base = static_cast<std::size_t>(t - t_first_) * dim_;
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = samples_[base + static_cast<std::size_t>(i)];
        return v;
      }
    }
    return Vector::Zero(n);
  }

  std::size_t dim() const { return dim_; }
  const SignalSpec& spec() const { return spec_; }

 private:
  SignalSpec spec_;
  std::size_t dim_;
  long t_first_;
  long t_last_;
  std::vector<double> samples_;
};

}  // namespace convbound
