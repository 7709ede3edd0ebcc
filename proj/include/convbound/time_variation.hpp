#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "convbound/linalg.hpp"
#include "convbound/parameter_set.hpp"
#include "convbound/trace.hpp"

namespace convbound {

/// Trajectories confined to a set whose total variation over any window
/// [t1, t2) is at most c0 + epsilon (t2 - t1).
struct TimeVariationClass {
  ParameterSet parameter_set;
  double c0 = 0.0;
  double epsilon = 0.0;

  void validate() const {
    if (!(c0 >= 0.0) || !std::isfinite(c0)) throw ParameterError("c0 must be finite and >= 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be finite and >= 0");
  }
};

/// theta*(t) for t in [t0, t0 + size() - 1].
class ParameterTrajectory {
 public:
  ParameterTrajectory() = default;
  ParameterTrajectory(long t0, std::vector<Matrix> values) : t0_(t0), values_(std::move(values)) {
    for (const auto& v : values_)
      if (v.rows() != values_.front().rows() || v.cols() != values_.front().cols())
        throw DimensionError("parameter trajectory entries differ in shape");
  }

  static ParameterTrajectory constant(const Matrix& theta, long t0, long horizon) {
    return ParameterTrajectory(t0, std::vector<Matrix>(static_cast<std::size_t>(horizon + 1), theta));
  }

  long t0() const { return t0_; }
  long t_last() const { return t0_ + static_cast<long>(values_.size()) - 1; }
  std::size_t size() const { return values_.size(); }
  const std::vector<Matrix>& values() const { return values_; }

  const Matrix& at(long t) const {
    if (t < t0_ || t > t_last())
      throw InitializationError("parameter trajectory undefined at t=" + std::to_string(t));
    return values_[static_cast<std::size_t>(t - t0_)];
  }

 private:
  long t0_ = 0;
  std::vector<Matrix> values_;
};

enum class VariationMode { constant, drift, jumps, drift_jumps };

inline VariationMode variation_mode_from_string(const std::string& s) {
  if (s == "constant") return VariationMode::constant;
  if (s == "drift") return VariationMode::drift;
  if (s == "jumps") return VariationMode::jumps;
  if (s == "drift+jumps" || s == "drift_jumps") return VariationMode::drift_jumps;
  throw ParameterError("unknown variation mode '" + s + "'");
}

struct GenerationOptions {
  Eigen::Index rows = 0;  // p; 0 means the set dimension (r = 1)
  Eigen::Index cols = 1;  // r
  std::optional<Vector> initial;  // flattened theta*(t0); random point of the set otherwise
  std::size_t member = 0;         // convex member used when the set is a union
  std::size_t jump_count = 2;
  std::optional<double> jump_size;  // default c0 / jump_count
};

namespace detail {

// Moves theta by exactly `size` towards some random point of the set, staying on the segment.
template <class Rng>
Vector jump_from(const Vector& theta, double size, const ParameterSet& set, Rng& rng) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    const Vector target = set.sample(rng);
    const double dist = (target - theta).norm();
    if (dist >= size && dist > 0.0) return theta + (size / dist) * (target - theta);
  }
  throw GenerationError("no point of the set lies at distance " + std::to_string(size) +
                        " from the current parameter");
}

}  // namespace detail

/// Random member of the class on [t0, t0 + horizon]. Drift steps have norm
/// epsilon (shorter only when a waypoint is reached); jumps are isolated,
/// at least two steps apart, and spend at most c0 in total.
inline ParameterTrajectory generate_tv_trajectory(const TimeVariationClass& cls, VariationMode mode,
                                                  std::uint64_t seed, long t0, long horizon,
                                                  const GenerationOptions& opts = {}) {
  cls.validate();
  if (horizon < 1) throw ParameterError("trajectory horizon must be >= 1");
  const ParameterSet& set = cls.parameter_set.is_convex()
                                ? cls.parameter_set
                                : cls.parameter_set.members().at(opts.member);
  const Eigen::Index rows = opts.rows > 0 ? opts.rows : static_cast<Eigen::Index>(set.dim());
  if (rows * opts.cols != static_cast<Eigen::Index>(set.dim()))
    throw DimensionError("trajectory shape does not match the parameter set dimension");

  std::mt19937_64 rng(seed);
  Vector theta = opts.initial ? *opts.initial : set.sample(rng);
  require_size(theta, static_cast<Eigen::Index>(set.dim()), "initial parameter");
  if (!set.contains(theta)) throw GenerationError("initial parameter lies outside the set");

  const bool drift = (mode == VariationMode::drift || mode == VariationMode::drift_jumps) && cls.epsilon > 0.0;
  const bool jumps = (mode == VariationMode::jumps || mode == VariationMode::drift_jumps) && opts.jump_count > 0 &&
                     (cls.c0 > 0.0 || opts.jump_size.value_or(0.0) > 0.0);

  std::vector<long> jump_times;
  double jump = 0.0;
  if (jumps) {
    jump = opts.jump_size.value_or(cls.c0 / static_cast<double>(opts.jump_count));
    if (jump < 0.0) throw GenerationError("jump size must be >= 0");
    if (static_cast<double>(opts.jump_count) * jump > cls.c0 * (1.0 + 1e-12))
      throw GenerationError("jump budget exceeds c0");
    if (jump > set.diameter()) throw GenerationError("jump size exceeds the diameter of the set");
    if (static_cast<long>(2 * opts.jump_count) > horizon) throw GenerationError("horizon too short for the jumps");
    // Isolated jump steps t -> t+1, spaced by at least two.
    std::vector<long> slots;
    for (long k = 0; k + 1 < horizon; k += 2) slots.push_back(k);
    std::shuffle(slots.begin(), slots.end(), rng);
    slots.resize(std::min(slots.size(), opts.jump_count));
    std::sort(slots.begin(), slots.end());
    for (long k : slots) jump_times.push_back(t0 + k);
  }

  std::vector<Matrix> values;
  values.reserve(static_cast<std::size_t>(horizon + 1));
  values.push_back(unflatten_row_major(theta, rows, opts.cols));
  Vector waypoint = set.sample(rng);
  std::size_t next_jump = 0;
  for (long t = t0; t < t0 + horizon; ++t) {
    if (next_jump < jump_times.size() && jump_times[next_jump] == t) {
      theta = detail::jump_from(theta, jump, set, rng);
      ++next_jump;
    } else if (drift) {
      for (int guard = 0; guard < 64; ++guard) {
        const double dist = (waypoint - theta).norm();
        if (dist > 0.0) break;
        waypoint = set.sample(rng);
      }
      const Vector delta = waypoint - theta;
      const double dist = delta.norm();
      if (dist <= cls.epsilon) {
        theta = waypoint;
        waypoint = set.sample(rng);
      } else {
        theta += (cls.epsilon / dist) * delta;
      }
    }
    values.push_back(unflatten_row_major(theta, rows, opts.cols));
  }
  return ParameterTrajectory(t0, std::move(values));
}

struct MembershipReport {
  bool member = false;
  bool inside_set = false;
  std::optional<long> first_outside;
  // max over windows [t1, t2) of sum ||dtheta|| - epsilon (t2 - t1), clamped below at 0
  double max_violation = 0.0;
  long window_begin = 0;  // [window_begin, window_end); empty when the clamp is active
  long window_end = 0;
};

/// Exact window check in O(T): maximum-subarray scan over ||dtheta(t)|| - epsilon.
inline MembershipReport verify_tv_membership(const ParameterTrajectory& traj, const TimeVariationClass& cls) {
  MembershipReport rep;
  rep.inside_set = true;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (!cls.parameter_set.contains(flatten_row_major(traj.values()[k]))) {
      rep.inside_set = false;
      rep.first_outside = traj.t0() + static_cast<long>(k);
      break;
    }
  }

  double best = 0.0;  // empty window
  long best_b = traj.t0(), best_e = traj.t0();
  double run = -std::numeric_limits<double>::infinity();
  long run_b = traj.t0();
  double total_steps = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const long t = traj.t0() + static_cast<long>(k);
    const double d = induced_norm(traj.values()[k + 1] - traj.values()[k]) - cls.epsilon;
    total_steps += 1.0;
    if (run + d < d) {
      run = d;
      run_b = t;
    } else {
      run += d;
    }
    if (run > best) {
      best = run;
      best_b = run_b;
      best_e = t + 1;
    }
  }
  rep.max_violation = best;
  rep.window_begin = best_b;
  rep.window_end = best_e;
  const double slack = 1e-12 * (1.0 + cls.c0 + cls.epsilon * total_steps);
  rep.member = rep.inside_set && rep.max_violation <= cls.c0 + slack;
  return rep;
}

/// CSV with header t,theta_<i>_<j>,...; entries in row-major order.
inline void write_trajectory_csv(std::ostream& os, const ParameterTrajectory& traj) {
  if (traj.size() == 0) return;
  const auto rows = traj.values().front().rows(), cols = traj.values().front().cols();
  os << "t";
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) os << ",theta_" << i << '_' << j;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << traj.t0() + static_cast<long>(k);
    const Vector flat = flatten_row_major(traj.values()[k]);
    for (Eigen::Index i = 0; i < flat.size(); ++i) os << ',' << detail::fmt17(flat(i));
    os << '\n';
  }
}

inline ParameterTrajectory read_trajectory_csv(std::istream& is) {
  const TraceTable table = read_trace_csv(is);
  if (table.header.size() < 2 || table.header.front() != "t")
    throw ParameterError("trajectory CSV must start with a t column");
  // Shape from the last header entry theta_<p-1>_<r-1>.
  const std::string& last = table.header.back();
  const auto us1 = last.find('_'), us2 = last.rfind('_');
  if (last.rfind("theta_", 0) != 0 || us1 == us2) throw ParameterError("malformed trajectory header '" + last + "'");
  const long rows = std::stol(last.substr(us1 + 1, us2 - us1 - 1)) + 1;
  const long cols = std::stol(last.substr(us2 + 1)) + 1;
  if (static_cast<std::size_t>(rows * cols) + 1 != table.header.size())
    throw ParameterError("trajectory header does not describe a full matrix");

  const auto& tcol = table.col("t");
  std::vector<Matrix> values;
  for (std::size_t k = 0; k < table.rows(); ++k) {
    if (k > 0 && tcol[k] != tcol[k - 1] + 1.0) throw ParameterError("trajectory times must be contiguous");
    Vector flat(rows * cols);
    for (Eigen::Index i = 0; i < flat.size(); ++i)
      flat(i) = table.columns.at(table.header[static_cast<std::size_t>(i) + 1])[k];
    values.push_back(unflatten_row_major(flat, rows, cols));
  }
  if (values.empty()) throw ParameterError("trajectory CSV has no rows");
  return ParameterTrajectory(static_cast<long>(tcol.front()), std::move(values));
}

}  // namespace convbound
