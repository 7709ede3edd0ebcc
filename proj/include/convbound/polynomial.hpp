#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "convbound/linalg.hpp"

namespace convbound {

/// Polynomial in z^{-1}; coeff(k) multiplies z^{-k}.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
  }

  static Polynomial one() { return Polynomial({1.0}); }

  // 1 - a_1 z^{-1} - ... - a_n z^{-n}
  static Polynomial from_a(std::span<const double> a) {
    std::vector<double> c{1.0};
    for (double v : a) c.push_back(-v);
    return Polynomial(std::move(c));
  }

  // b_1 z^{-1} + ... + b_n z^{-n}
  static Polynomial from_b(std::span<const double> b) {
    std::vector<double> c{0.0};
    c.insert(c.end(), b.begin(), b.end());
    return Polynomial(std::move(c));
  }

  double coeff(std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
  std::size_t size() const { return c_.size(); }
  const std::vector<double>& coeffs() const { return c_; }

  std::size_t degree() const {
    std::size_t d = c_.size() - 1;
    while (d > 0 && c_[d] == 0.0) --d;
    return d;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(k) + b.coeff(k);
    return Polynomial(std::move(c));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(k) - b.coeff(k);
    return Polynomial(std::move(c));
  }

 private:
  std::vector<double> c_;
};

inline constexpr double kMaxSylvesterCondition = 1e12;

struct DiophantineSolution {
  Polynomial l;  // 1 + l_1 z^{-1} + ... + l_n z^{-n}
  Polynomial p;  // p_1 z^{-1} + ... + p_n z^{-n}
  double condition = 0.0;
  double residual = 0.0;  // max |coeff| of A L + B P - 1
};

/// Solves A L + B P = 1 (all closed-loop poles at the origin) for degree-n A, B.
/// The 2n unknowns [l_1..l_n, p_1..p_n] solve a Sylvester-structured system.
inline DiophantineSolution solve_deadbeat_diophantine(const Polynomial& a, const Polynomial& b, std::size_t n) {
  if (n == 0) throw ParameterError("plant order must be >= 1");
  if (a.coeff(0) != 1.0) throw ParameterError("A must have constant term 1");
  if (b.coeff(0) != 0.0) throw ParameterError("B must have zero constant term");
  for (std::size_t k = n + 1; k < std::max(a.size(), b.size()); ++k)
    if (a.coeff(k) != 0.0 || b.coeff(k) != 0.0) throw ParameterError("A and B must have degree <= n");

  const auto nn = static_cast<Eigen::Index>(n);
  Matrix sylv = Matrix::Zero(2 * nn, 2 * nn);
  Vector rhs = Vector::Zero(2 * nn);
  // Row k-1 holds the z^{-k} coefficient, k = 1..2n.
  for (Eigen::Index k = 1; k <= 2 * nn; ++k) {
    for (Eigen::Index j = 1; j <= nn; ++j) {
      if (k - j >= 0) {
        sylv(k - 1, j - 1) = a.coeff(static_cast<std::size_t>(k - j));
        sylv(k - 1, nn + j - 1) = b.coeff(static_cast<std::size_t>(k - j));
      }
    }
    rhs(k - 1) = -a.coeff(static_cast<std::size_t>(k));
  }

  Eigen::JacobiSVD<Matrix> svd(sylv);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxSylvesterCondition))
    throw NearSingularError("Sylvester matrix is near singular (A and B nearly share a root); condition ~ " +
                                std::to_string(cond),
                            cond);

  const Vector x = sylv.fullPivLu().solve(rhs);
  std::vector<double> lc{1.0}, pc{0.0};
  for (Eigen::Index j = 0; j < nn; ++j) {
    lc.push_back(x(j));
    pc.push_back(x(nn + j));
  }
  DiophantineSolution sol{Polynomial(std::move(lc)), Polynomial(std::move(pc)), cond, 0.0};
  sol.residual = (a * sol.l + b * sol.p - Polynomial::one()).max_abs_coeff();
  return sol;
}

// K = [-p_1 .. -p_n, -l_1 .. -l_n], acting on [y(t-1)..y(t-n), u(t-1)..u(t-n)].
inline Vector deadbeat_gains(const DiophantineSolution& sol, std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  Vector k(2 * nn);
  for (Eigen::Index j = 0; j < nn; ++j) {
    k(j) = -sol.p.coeff(static_cast<std::size_t>(j + 1));
    k(nn + j) = -sol.l.coeff(static_cast<std::size_t>(j + 1));
  }
  return k;
}

// Polynomials of theta = [a_1..a_n, b_1..b_n].
inline std::pair<Polynomial, Polynomial> plant_polynomials(const Vector& theta, std::size_t n) {
  require_size(theta, static_cast<Eigen::Index>(2 * n), "plant parameter");
  std::vector<double> a(theta.data(), theta.data() + n), b(theta.data() + n, theta.data() + 2 * n);
  return {Polynomial::from_a(a), Polynomial::from_b(b)};
}

}  // namespace convbound
