#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "convbound/errors.hpp"
#include "convbound/linalg.hpp"

namespace convbound {

// Slow-variation tolerance from a nominal (c, lambda) bound: windows of m^2 steps,
// drift rate eps = c0 / m^2.
struct SlowVariationMargins {
  long m = 1;
  double epsilon = 0.0;
  double gamma3 = 1.0;  // 1 + 2 c ||f|| ||S||
  double n1 = 0.0;      // number of windows with large parameter change, 4 c0 c ||f|| / (lambda1 - lambda)
  double m_bound = 0.0; // right side of the m inequality
};

// Jump-plus-drift margins: eps independent of c0, epoch count N_bar depending on c0.
struct JumpMargins {
  long m = 1;
  double lambda2 = 0.0;
  double epsilon = 0.0;
  double lambda3 = 0.0;
  long n_bar = 1;
  double lambda4 = 0.0;
  double gamma3 = 1.0;
};

// Unmodelled-dynamics margin from the 2x2 comparison system.
struct UmdMargins {
  double mu_bar = 0.0;
  double spectral_radius = 0.0;  // of the comparison matrix at mu_bar
  double gamma1 = 1.0;           // sup_k ||A^k|| / lambda2^k (certified upper bound)
  long gamma1_horizon = 0;       // powers evaluated explicitly
  double gamma1_tail = 0.0;      // bound on the ratio for all k beyond the horizon
  double c2 = 1.0;               // gain of the extended-state bound
};

namespace detail {
inline void check_bound_inputs(double c, double lambda, double lambda1, double f_gain, double s_norm) {
  if (!(c >= 1.0) || !std::isfinite(c)) throw ParameterError("c must be finite and >= 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in (0, 1)");
  if (!(lambda1 > lambda && lambda1 < 1.0)) throw ParameterError("lambda1 must satisfy lambda < lambda1 < 1");
  if (!(f_gain > 0.0) || !std::isfinite(f_gain)) throw ParameterError("||f|| must be finite and > 0");
  if (!(s_norm >= 0.0) || !std::isfinite(s_norm)) throw ParameterError("||S|| must be finite and >= 0");
}
}  // namespace detail

inline SlowVariationMargins thm1_margins(double c, double lambda, double lambda1, double c0, double f_gain,
                                         double s_norm) {
  detail::check_bound_inputs(c, lambda, lambda1, f_gain, s_norm);
  if (!(c0 > 0.0) || !std::isfinite(c0)) throw ParameterError("c0 must be finite and > 0");
  SlowVariationMargins out;
  out.gamma3 = 1.0 + 2.0 * c * f_gain * s_norm;
  out.n1 = 4.0 * c0 * c * f_gain / (lambda1 - lambda);
  const double num = std::log(c) + out.n1 * (std::log(out.gamma3) + std::numbers::ln2 - std::log(lambda + lambda1));
  const double den = std::log(2.0 * lambda1) - std::log(lambda + lambda1);
  out.m_bound = num / den;
  if (!std::isfinite(out.m_bound) || out.m_bound > 1e15) throw ParameterError("window length m overflows");
  out.m = std::max(1L, static_cast<long>(std::ceil(out.m_bound)));
  out.epsilon = c0 / (static_cast<double>(out.m) * static_cast<double>(out.m));
  return out;
}

inline JumpMargins thm2_margins(double c, double lambda, double lambda1, double c0, double f_gain, double s_norm) {
  detail::check_bound_inputs(c, lambda, lambda1, f_gain, s_norm);
  if (!(c0 >= 0.0) || !std::isfinite(c0)) throw ParameterError("c0 must be finite and >= 0");
  constexpr double target = 1.0 - 1e-6;
  JumpMargins out;
  out.gamma3 = 1.0 + 2.0 * c * f_gain * s_norm;
  const double half = (lambda1 + lambda) / 2.0;
  out.m = static_cast<long>(std::floor(std::log(c) / (std::numbers::ln2 - std::log(lambda1 + lambda)))) + 1;
  auto lambda2_of = [&](long m) { return c * std::pow(half, static_cast<double>(m)); };
  while (lambda2_of(out.m) > target) ++out.m;
  out.lambda2 = lambda2_of(out.m);

  const double base = 2.0 * out.gamma3 / (lambda1 + lambda);
  const double kappa = 2.0 * c * f_gain / (lambda1 - lambda);
  const double m2 = static_cast<double>(out.m) * static_cast<double>(out.m);
  auto lambda3_of = [&](double eps) { return std::pow(base, kappa * eps * m2) * out.lambda2; };
  double eps = std::log(target / out.lambda2) / (kappa * m2 * std::log(base));
  while (lambda3_of(eps) > target) eps *= 1.0 - 1e-12;
  out.epsilon = eps;
  out.lambda3 = lambda3_of(eps);

  const double n_bound = 2.0 * c * c0 * static_cast<double>(out.m) * f_gain *
                         (std::log(2.0 * out.gamma3) - std::log(lambda1 + lambda)) /
                         ((lambda - lambda1) * std::log(out.lambda3));
  if (!std::isfinite(n_bound) || n_bound > 1e15) throw ParameterError("epoch count overflows");
  out.n_bar = static_cast<long>(std::floor(n_bound)) + 1;
  out.lambda4 = std::pow(base, kappa * c0 * static_cast<double>(out.m)) *
                std::pow(out.lambda3, static_cast<double>(out.n_bar));
  return out;
}

// [[lambda1 + c1 g mu, c1 mu], [beta g, beta]]
inline Eigen::Matrix2d thm3_closed_loop_matrix(double c1, double lambda1, double beta, double g_gain, double mu) {
  Eigen::Matrix2d a;
  a << lambda1 + c1 * g_gain * mu, c1 * mu, beta * g_gain, beta;
  return a;
}

// Perron root of a 2x2 matrix with nonnegative off-diagonal product.
inline double spectral_radius_2x2(const Eigen::Matrix2d& a) {
  const double half_tr = 0.5 * (a(0, 0) + a(1, 1));
  const double half_gap = 0.5 * (a(0, 0) - a(1, 1));
  const double disc = half_gap * half_gap + a(0, 1) * a(1, 0);
  if (disc < 0.0) return std::hypot(half_tr, std::sqrt(-disc));
  return std::max(std::abs(half_tr + std::sqrt(disc)), std::abs(half_tr - std::sqrt(disc)));
}

inline UmdMargins thm3_analysis(double c1, double lambda1, double beta, double g_gain, double lambda2) {
  if (!(c1 > 0.0) || !std::isfinite(c1)) throw ParameterError("c1 must be finite and > 0");
  if (!(g_gain > 0.0) || !std::isfinite(g_gain)) throw ParameterError("||g|| must be finite and > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
  if (!(lambda1 > 0.0 && lambda1 < 1.0)) throw ParameterError("lambda1 must lie in (0, 1)");
  if (!(lambda2 > std::max(lambda1, beta) && lambda2 < 1.0))
    throw ParameterError("lambda2 must satisfy max(lambda1, beta) < lambda2 < 1");
  const double target = lambda2 * (1.0 - 1e-9);
  if (!(std::max(lambda1, beta) < target)) throw ParameterError("lambda2 too close to max(lambda1, beta)");

  auto rho = [&](double mu) { return spectral_radius_2x2(thm3_closed_loop_matrix(c1, lambda1, beta, g_gain, mu)); };
  double lo = 0.0, hi = 1.0;
  while (rho(hi) <= target) {
    hi *= 2.0;
    if (hi > 1e300) throw ConvergenceError("no upper bracket for mu_bar");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rho(mid) <= target ? lo : hi) = mid;
  }

  UmdMargins out;
  out.mu_bar = lo;
  const Eigen::Matrix2d a = thm3_closed_loop_matrix(c1, lambda1, beta, g_gain, lo);
  out.spectral_radius = rho(lo);

  // ||A^k|| <= cond(V) rho^k with A = V D V^{-1}; the eigenvalues are real and
  // distinct whenever mu > 0.
  Eigen::EigenSolver<Eigen::Matrix2d> es(a);
  const Eigen::Matrix2d v = es.eigenvectors().real();
  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(v);
  const double cond_v = svd.singularValues()(0) / svd.singularValues()(1);
  const double q = out.spectral_radius / lambda2;

  constexpr long max_horizon = 10000;
  // Powers of A / lambda2 directly; dividing by lambda2^k would underflow.
  const Eigen::Matrix2d scaled = a / lambda2;
  Eigen::Matrix2d power = Eigen::Matrix2d::Identity();
  double best = 1.0;
  long k = 0;
  double tail = std::isfinite(cond_v) ? cond_v * q : std::numeric_limits<double>::infinity();
  while (k < max_horizon && !(tail <= best)) {
    ++k;
    power = power * scaled;
    best = std::max(best, induced_norm(Matrix(power)));
    tail *= q;
  }
  out.gamma1_horizon = k;
  out.gamma1_tail = tail;
  out.gamma1 = std::max(best, tail);
  if (!std::isfinite(out.gamma1)) throw ConvergenceError("power bound for the comparison system is not finite");
  out.c2 = std::numbers::sqrt2 * std::max(c1, 1.0) * out.gamma1;
  return out;
}

}  // namespace convbound
