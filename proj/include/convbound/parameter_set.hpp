#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "convbound/linalg.hpp"

namespace convbound {

struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius = 0.0;
};

// { x : normals.row(i) . x <= offsets(i) }, bounded and nonempty.
struct Polytope {
  Matrix normals;
  Vector offsets;
  std::vector<Vector> vertices;  // filled at construction
};

struct DykstraOptions {
  int max_iterations = 10'000;
  double tolerance = 1e-10;
};

namespace detail {

inline double halfspace_violation(const Matrix& a, const Vector& b, const Vector& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double nrm = a.row(i).norm();
    if (nrm == 0.0) {
      worst = std::max(worst, -b(i));
      continue;
    }
    worst = std::max(worst, (a.row(i).dot(x) - b(i)) / nrm);
  }
  return worst;
}

// Exact projection of x0 onto {a_i x = b_i, i in active}, accepted (written to x)
// only if it satisfies every halfspace and has nonnegative multipliers, i.e. it
// is the projection onto the whole intersection.
inline bool polish_with(const Matrix& a, const Vector& b, const Vector& x0, const std::vector<Eigen::Index>& active,
                        Vector& x) {
  if (active.empty()) return false;
  Matrix aa(static_cast<Eigen::Index>(active.size()), a.cols());
  Vector bb(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    aa.row(static_cast<Eigen::Index>(k)) = a.row(active[k]);
    bb(static_cast<Eigen::Index>(k)) = b(active[k]);
  }
  const Matrix gram = aa * aa.transpose();
  const Vector nu = gram.completeOrthogonalDecomposition().solve(aa * x0 - bb);
  if ((nu.array() < -1e-12 * (1.0 + nu.cwiseAbs().maxCoeff())).any()) return false;
  const Vector z = x0 - aa.transpose() * nu;
  const double scale = 1.0 + z.norm();
  if (halfspace_violation(a, b, z) > 1e-12 * scale) return false;
  x = z;
  return true;
}

// Polish using the constraints that are (nearly) tight at x.
inline bool polish_active_set(const Matrix& a, const Vector& b, const Vector& x0, Vector& x) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double nrm = a.row(i).norm();
    if (nrm == 0.0) continue;
    if ((a.row(i).dot(x) - b(i)) / nrm >= -1e-8 * (1.0 + std::abs(b(i)) / nrm)) active.push_back(i);
  }
  return polish_with(a, b, x0, active, x);
}

}  // namespace detail

/// Euclidean projection onto an intersection of halfspaces by Dykstra's
/// alternating projections, finished with an active-set polish.
inline Vector project_halfspaces(const Vector& x0, const Matrix& a, const Vector& b,
                                 const DykstraOptions& opts = {}) {
  require_size(x0, a.cols(), "point to project");
  require_size(b, a.rows(), "halfspace offsets");
  if (a.rows() == 0 || detail::halfspace_violation(a, b, x0) <= 0.0) return x0;

  const Eigen::Index nc = a.rows();
  std::vector<Vector> increments(static_cast<std::size_t>(nc), Vector::Zero(x0.size()));
  Vector x = x0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vector prev = x;
    for (Eigen::Index i = 0; i < nc; ++i) {
      Vector& p = increments[static_cast<std::size_t>(i)];
      const Vector y = x + p;
      const double nrm2 = a.row(i).squaredNorm();
      const double excess = a.row(i).dot(y) - b(i);
      x = (excess > 0.0 && nrm2 > 0.0) ? Vector(y - (excess / nrm2) * a.row(i).transpose()) : y;
      p = y - x;
    }
    // Nonzero Dykstra increments mark the constraints carrying multipliers;
    // once they identify the active set the exact solution can be verified.
    std::vector<Eigen::Index> carrying;
    for (Eigen::Index i = 0; i < nc; ++i)
      if (increments[static_cast<std::size_t>(i)].squaredNorm() > 0.0) carrying.push_back(i);
    if (detail::polish_with(a, b, x0, carrying, x)) return x;
    const double scale = 1.0 + x.norm();
    if ((x - prev).norm() <= opts.tolerance * scale &&
        detail::halfspace_violation(a, b, x) <= opts.tolerance * scale) {
      detail::polish_active_set(a, b, x0, x);
      return x;
    }
  }
  throw ConvergenceError("Dykstra projection did not converge in " +
                         std::to_string(opts.max_iterations) + " iterations");
}

/// Bounded parameter set: a box, ball or polytope, or a union of those.
class ParameterSet {
 public:
  using Convex = std::variant<Box, Ball, Polytope>;

  static ParameterSet box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) throw DimensionError("box bounds differ in length");
    if (lower.size() == 0) throw ParameterError("box must have positive dimension");
    if ((lower.array() > upper.array()).any()) throw ParameterError("box lower bound exceeds upper bound");
    if (!lower.allFinite() || !upper.allFinite()) throw ParameterError("box bounds must be finite");
    return ParameterSet(Convex(Box{std::move(lower), std::move(upper)}));
  }

  static ParameterSet ball(Vector center, double radius) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ParameterError("ball radius must be >= 0");
    if (center.size() == 0) throw ParameterError("ball must have positive dimension");
    return ParameterSet(Convex(Ball{std::move(center), radius}));
  }

  static ParameterSet polytope(Matrix normals, Vector offsets);

  static ParameterSet set_union(std::vector<ParameterSet> members) {
    if (members.empty()) throw ParameterError("union needs at least one member");
    for (const auto& s : members) {
      if (!s.is_convex()) throw ParameterError("union members must be convex");
      if (s.dim() != members.front().dim()) throw DimensionError("union members differ in dimension");
    }
    ParameterSet out;
    out.members_ = std::move(members);
    return out;
  }

  bool is_convex() const { return members_.empty(); }
  const Convex& convex() const {
    if (!is_convex()) throw ConfigurationError("set is a union, not a convex member");
    return convex_;
  }
  const std::vector<ParameterSet>& members() const { return members_; }

  std::size_t dim() const {
    if (!is_convex()) return members_.front().dim();
    return std::visit(
        [](const auto& s) -> std::size_t {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) return static_cast<std::size_t>(s.lower.size());
          else if constexpr (std::is_same_v<T, Ball>) return static_cast<std::size_t>(s.center.size());
          else return static_cast<std::size_t>(s.normals.cols());
        },
        convex_);
  }

  std::string kind() const {
    if (!is_convex()) return "union";
    static constexpr const char* names[] = {"box", "ball", "polytope"};
    return names[convex_.index()];
  }

  Vector project(const Vector& x, const DykstraOptions& opts = {}) const {
    if (!is_convex()) throw ConfigurationError("projection onto a union of sets is not defined");
    require_size(x, static_cast<Eigen::Index>(dim()), "point to project");
    return std::visit(
        [&](const auto& s) -> Vector {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) {
            return x.cwiseMax(s.lower).cwiseMin(s.upper);
          } else if constexpr (std::is_same_v<T, Ball>) {
            const Vector d = x - s.center;
            const double nd = d.norm();
            if (nd <= s.radius) return x;
            return s.center + (s.radius / nd) * d;
          } else {
            return project_halfspaces(x, s.normals, s.offsets, opts);
          }
        },
        convex_);
  }

  bool contains(const Vector& x, double tol = 1e-9) const {
    if (x.size() != static_cast<Eigen::Index>(dim())) return false;
    if (!is_convex())
      return std::any_of(members_.begin(), members_.end(),
                         [&](const ParameterSet& s) { return s.contains(x, tol); });
    return std::visit(
        [&](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) {
            return ((x.array() >= s.lower.array() - tol) && (x.array() <= s.upper.array() + tol)).all();
          } else if constexpr (std::is_same_v<T, Ball>) {
            return (x - s.center).norm() <= s.radius + tol;
          } else {
            return detail::halfspace_violation(s.normals, s.offsets, x) <= tol;
          }
        },
        convex_);
  }

  double distance(const Vector& x) const {
    if (!is_convex()) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : members_) best = std::min(best, s.distance(x));
      return best;
    }
    return (x - project(x)).norm();
  }

  // ||S|| = sup ||x|| over the set; exact for every variant.
  double norm_bound() const {
    if (!is_convex()) {
      double best = 0.0;
      for (const auto& s : members_) best = std::max(best, s.norm_bound());
      return best;
    }
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) return s.lower.cwiseAbs().cwiseMax(s.upper.cwiseAbs()).norm();
          else if constexpr (std::is_same_v<T, Ball>) return s.center.norm() + s.radius;
          else {
            double best = 0.0;
            for (const auto& v : s.vertices) best = std::max(best, v.norm());
            return best;
          }
        },
        convex_);
  }

  double diameter() const {
    if (!is_convex()) {
      const auto [lo, hi] = bounding_box();
      return (hi - lo).norm();
    }
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) return (s.upper - s.lower).norm();
          else if constexpr (std::is_same_v<T, Ball>) return 2.0 * s.radius;
          else {
            double best = 0.0;
            for (std::size_t i = 0; i < s.vertices.size(); ++i)
              for (std::size_t j = i + 1; j < s.vertices.size(); ++j)
                best = std::max(best, (s.vertices[i] - s.vertices[j]).norm());
            return best;
          }
        },
        convex_);
  }

  // [min, max] of coordinate k over the set.
  std::pair<double, double> coordinate_range(std::size_t k) const {
    if (k >= dim()) throw DimensionError("coordinate index out of range");
    if (!is_convex()) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& s : members_) {
        const auto [a, b] = s.coordinate_range(k);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
      return {lo, hi};
    }
    const auto i = static_cast<Eigen::Index>(k);
    return std::visit(
        [i](const auto& s) -> std::pair<double, double> {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) return {s.lower(i), s.upper(i)};
          else if constexpr (std::is_same_v<T, Ball>) return {s.center(i) - s.radius, s.center(i) + s.radius};
          else {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& v : s.vertices) {
              lo = std::min(lo, v(i));
              hi = std::max(hi, v(i));
            }
            return {lo, hi};
          }
        },
        convex_);
  }

  std::pair<Vector, Vector> bounding_box() const {
    const auto n = dim();
    Vector lo(static_cast<Eigen::Index>(n)), hi(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const auto [a, b] = coordinate_range(k);
      lo(static_cast<Eigen::Index>(k)) = a;
      hi(static_cast<Eigen::Index>(k)) = b;
    }
    return {lo, hi};
  }

  // A random point of the set (not uniform for polytopes or unions).
  template <class Rng>
  Vector sample(Rng& rng) const {
    if (!is_convex()) {
      std::uniform_int_distribution<std::size_t> pick(0, members_.size() - 1);
      return members_[pick(rng)].sample(rng);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;
    return std::visit(
        [&](const auto& s) -> Vector {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) {
            Vector x(s.lower.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = s.lower(i) + unit(rng) * (s.upper(i) - s.lower(i));
            return x;
          } else if constexpr (std::is_same_v<T, Ball>) {
            Vector d(s.center.size());
            for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = normal(rng);
            const double nd = d.norm();
            if (nd == 0.0) return s.center;
            const double rad = s.radius * std::pow(unit(rng), 1.0 / static_cast<double>(d.size()));
            return s.center + (rad / nd) * d;
          } else {
            std::exponential_distribution<double> expo(1.0);
            Vector x = Vector::Zero(s.normals.cols());
            double total = 0.0;
            for (const auto& v : s.vertices) {
              const double w = expo(rng);
              x += w * v;
              total += w;
            }
            return x / total;
          }
        },
        convex_);
  }

 private:
  ParameterSet() = default;
  explicit ParameterSet(Convex c) : convex_(std::move(c)) {}

  Convex convex_{Box{}};
  std::vector<ParameterSet> members_;
};

namespace detail {

// Vertices of a bounded polyhedron by enumerating n-subsets of constraints.
inline std::vector<Vector> enumerate_vertices(const Matrix& a, const Vector& b) {
  const auto n = a.cols();
  const auto mrows = a.rows();
  std::vector<Vector> verts;
  if (mrows < n) return verts;

  double combos = 1.0;
  for (Eigen::Index k = 0; k < n; ++k)
    combos *= static_cast<double>(mrows - k) / static_cast<double>(k + 1);
  if (combos > 2e6) throw ConfigurationError("polytope has too many constraint subsets to enumerate");

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = k;
  Matrix sub(n, n);
  Vector rhs(n);
  while (true) {
    for (Eigen::Index k = 0; k < n; ++k) {
      sub.row(k) = a.row(idx[static_cast<std::size_t>(k)]);
      rhs(k) = b(idx[static_cast<std::size_t>(k)]);
    }
    Eigen::FullPivLU<Matrix> lu(sub);
    if (lu.rank() == n) {
      const Vector v = lu.solve(rhs);
      if (v.allFinite() && halfspace_violation(a, b, v) <= 1e-9 * (1.0 + v.norm())) {
        const bool dup = std::any_of(verts.begin(), verts.end(), [&](const Vector& w) {
          return (w - v).norm() <= 1e-12 * (1.0 + v.norm());
        });
        if (!dup) verts.push_back(v);
      }
    }
    // next combination
    Eigen::Index k = n - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == mrows - n + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (Eigen::Index j = k + 1; j < n; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return verts;
}

}  // namespace detail

inline ParameterSet ParameterSet::polytope(Matrix normals, Vector offsets) {
  if (normals.rows() != offsets.size()) throw DimensionError("polytope normals/offsets mismatch");
  if (normals.cols() == 0) throw ParameterError("polytope must have positive dimension");
  if (!normals.allFinite() || !offsets.allFinite()) throw ParameterError("polytope data must be finite");

  // Bounded iff the recession cone {d : A d <= 0} is {0}; probe it along +-e_k.
  const Eigen::Index n = normals.cols();
  const Vector zero = Vector::Zero(normals.rows());
  for (Eigen::Index k = 0; k < n; ++k) {
    for (const double sgn : {1.0, -1.0}) {
      Vector e = Vector::Zero(n);
      e(k) = sgn;
      const Vector d = project_halfspaces(e, normals, zero);
      if (d.norm() > 1e-8)
        throw ConfigurationError("polytope is unbounded along coordinate " + std::to_string(k));
    }
  }
  auto verts = detail::enumerate_vertices(normals, offsets);
  if (verts.empty()) throw ConfigurationError("polytope is empty");
  return ParameterSet(Convex(Polytope{std::move(normals), std::move(offsets), std::move(verts)}));
}

inline Vector project(const Vector& x, const ParameterSet& set) { return set.project(x); }

}  // namespace convbound
