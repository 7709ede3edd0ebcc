#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>

#include "convbound/linalg.hpp"

namespace convbound {

// Window lengths and signal dimensions of a regressor.
struct RegressorLayout {
  std::size_t n_y = 1;  // output lags
  std::size_t n_u = 1;  // input lags
  std::size_t r = 1;    // output dimension
  std::size_t m = 1;    // input dimension

  std::size_t size() const { return n_y * r + n_u * m; }
  std::size_t input_offset() const { return n_y * r; }
  bool operator==(const RegressorLayout&) const = default;
};

/// Stacked data window [y(t); ...; y(t-n_y+1); u(t); ...; u(t-n_u+1)].
class Regressor {
 public:
  Regressor() = default;
  Regressor(RegressorLayout layout, Vector flat) : layout_(layout), data_(std::move(flat)) {
    require_size(data_, static_cast<Eigen::Index>(layout_.size()), "regressor");
  }

  static Regressor zeros(RegressorLayout layout) {
    return Regressor(layout, Vector::Zero(static_cast<Eigen::Index>(layout.size())));
  }

  const RegressorLayout& layout() const { return layout_; }
  const Vector& flat() const { return data_; }
  double norm() const { return data_.norm(); }

  // y(t-k)
  Vector y(std::size_t k) const {
    check_lag(k, layout_.n_y, "output");
    return data_.segment(static_cast<Eigen::Index>(k * layout_.r),
                         static_cast<Eigen::Index>(layout_.r));
  }

  // u(t-k)
  Vector u(std::size_t k) const {
    check_lag(k, layout_.n_u, "input");
    return data_.segment(static_cast<Eigen::Index>(layout_.input_offset() + k * layout_.m),
                         static_cast<Eigen::Index>(layout_.m));
  }

  // Same window with the u(t) slot filled with NaN; anything computed from it poisons.
  Regressor masked_current_input() const {
    Regressor out = *this;
    if (layout_.n_u > 0)
      out.data_.segment(static_cast<Eigen::Index>(layout_.input_offset()),
                        static_cast<Eigen::Index>(layout_.m))
          .setConstant(std::numeric_limits<double>::quiet_NaN());
    return out;
  }

  Regressor with_current_input(const Vector& u_now) const {
    Regressor out = *this;
    if (layout_.n_u == 0) return out;
    require_size(u_now, static_cast<Eigen::Index>(layout_.m), "u(t)");
    out.data_.segment(static_cast<Eigen::Index>(layout_.input_offset()),
                      static_cast<Eigen::Index>(layout_.m)) = u_now;
    return out;
  }

  // phi(t+1) with y(t+1) inserted and the new u(t+1) slot masked.
  Regressor advance(const Vector& y_next) const {
    require_size(y_next, static_cast<Eigen::Index>(layout_.r), "y(t+1)");
    Vector next(data_.size());
    const auto r = static_cast<Eigen::Index>(layout_.r);
    const auto m = static_cast<Eigen::Index>(layout_.m);
    const auto ny = static_cast<Eigen::Index>(layout_.n_y);
    const auto nu = static_cast<Eigen::Index>(layout_.n_u);
    if (ny > 0) {
      next.head(r) = y_next;
      next.segment(r, (ny - 1) * r) = data_.head((ny - 1) * r);
    }
    const auto off = static_cast<Eigen::Index>(layout_.input_offset());
    if (nu > 0) {
      next.segment(off, m).setConstant(std::numeric_limits<double>::quiet_NaN());
      next.segment(off + m, (nu - 1) * m) = data_.segment(off, (nu - 1) * m);
    }
    return Regressor(layout_, std::move(next));
  }

 private:
  static void check_lag(std::size_t k, std::size_t n, const char* what) {
    if (k >= n)
      throw DimensionError(std::string(what) + " lag " + std::to_string(k) +
                           " outside window of length " + std::to_string(n));
  }

  RegressorLayout layout_{};
  Vector data_{};
};

/// Builds phi(t) from chronological histories whose element at index t is the
/// sample at time t.
inline Regressor assemble_regressor(std::span<const Vector> y_hist,
                                    std::span<const Vector> u_hist, std::size_t t,
                                    RegressorLayout layout) {
  if (layout.n_y > 0 && (t >= y_hist.size() || t + 1 < layout.n_y))
    throw InitializationError("output history too short for window of length " +
                              std::to_string(layout.n_y));
  if (layout.n_u > 0 && (t >= u_hist.size() || t + 1 < layout.n_u))
    throw InitializationError("input history too short for window of length " +
                              std::to_string(layout.n_u));

  Vector flat(static_cast<Eigen::Index>(layout.size()));
  Eigen::Index k = 0;
  for (std::size_t j = 0; j < layout.n_y; ++j) {
    const Vector& y = y_hist[t - j];
    require_size(y, static_cast<Eigen::Index>(layout.r), "y history sample");
    flat.segment(k, y.size()) = y;
    k += y.size();
  }
  for (std::size_t j = 0; j < layout.n_u; ++j) {
    const Vector& u = u_hist[t - j];
    require_size(u, static_cast<Eigen::Index>(layout.m), "u history sample");
    flat.segment(k, u.size()) = u;
    k += u.size();
  }
  return Regressor(layout, std::move(flat));
}

}  // namespace convbound
