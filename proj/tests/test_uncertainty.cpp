#include <catch_amalgamated.hpp>

#include <sstream>

#include "test_support.hpp"

using namespace cbtest;
using Catch::Approx;

namespace {

ParameterSet unit_box(std::size_t n) { return ParameterSet::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0)); }

ParameterTrajectory random_walk(std::mt19937_64& rng, std::size_t n, long len, double scale) {
  std::normal_distribution<double> g;
  std::bernoulli_distribution big(0.05);
  std::vector<Matrix> v{Matrix::Zero(static_cast<Eigen::Index>(n), 1)};
  for (long k = 0; k < len; ++k) {
    Matrix step(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) step(static_cast<Eigen::Index>(i), 0) = g(rng) * scale * (big(rng) ? 20 : 1);
    v.push_back(v.back() + step);
  }
  return ParameterTrajectory(0, v);
}

}  // namespace

TEST_CASE("constant trajectories are members of every class") {
  const Matrix theta = Matrix(vec({0.2, -0.3}));
  const auto traj = ParameterTrajectory::constant(theta, 0, 100);
  for (double c0 : {0.0, 0.5})
    for (double eps : {0.0, 1e-3}) {
      const auto rep = verify_tv_membership(traj, {unit_box(2), c0, eps});
      CHECK(rep.member);
      CHECK(rep.max_violation == 0.0);
    }
}

TEST_CASE("single jump is a member iff J - eps <= c0") {
  const double J = 0.4;
  std::vector<Matrix> v(10, Matrix(vec({0.0, 0.0})));
  for (std::size_t k = 5; k < v.size(); ++k) v[k] = Matrix(vec({J, 0.0}));
  const ParameterTrajectory traj(0, v);
  CHECK(verify_tv_membership(traj, {unit_box(2), 0.39, 0.01}).member);
  CHECK(verify_tv_membership(traj, {unit_box(2), 0.4, 0.0}).member);
  CHECK_FALSE(verify_tv_membership(traj, {unit_box(2), 0.38, 0.01}).member);
  const auto rep = verify_tv_membership(traj, {unit_box(2), 0.0, 0.01});
  CHECK(rep.max_violation == Approx(J - 0.01));
  CHECK(rep.window_begin == 4);
  CHECK(rep.window_end == 5);
}

TEST_CASE("window scan equals all-windows enumeration") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  for (int trial = 0; trial < 100; ++trial) {
    const long len = 2 + trial % 199;
    const auto traj = random_walk(rng, 1 + trial % 3, len, 0.01);
    const double eps = u(rng);
    const auto rep = verify_tv_membership(traj, {ParameterSet::ball(Vector::Zero(1 + trial % 3), 100.0), 0.1, eps});
    CHECK(rep.max_violation == Approx(brute_force_window_max(traj, eps)).epsilon(1e-12).margin(1e-14));
  }
}

TEST_CASE("matrix-valued trajectories use the induced norm") {
  Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
  b << 1, 1, 1, 1;  // induced 2-norm 2, Frobenius 2, max-abs-row-sum 2; use a rank-one check
  b *= 0.25;
  const ParameterTrajectory traj(0, {a, b});
  const auto rep = verify_tv_membership(traj, {ParameterSet::box(Vector::Constant(4, -1), Vector::Constant(4, 1)), 0, 0});
  CHECK(rep.max_violation == Approx(0.5));
}

TEST_CASE("generated trajectories verify for their own class") {
  const auto set = ParameterSet::box(vec({-2, 0.5}), vec({2, 2}));
  const std::vector<VariationMode> modes{VariationMode::constant, VariationMode::drift, VariationMode::jumps,
                                         VariationMode::drift_jumps};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TimeVariationClass cls{set, 0.05 + 0.01 * static_cast<double>(seed % 7), 1e-3 * static_cast<double>(seed % 5)};
    const auto mode = modes[seed % modes.size()];
    const auto traj = generate_tv_trajectory(cls, mode, seed, 0, 300);
    REQUIRE(traj.size() == 301);
    const auto rep = verify_tv_membership(traj, cls);
    CHECK(rep.member);
    CHECK(rep.inside_set);
  }
}

TEST_CASE("drift spends exactly epsilon per step") {
  const TimeVariationClass cls{ParameterSet::ball(Vector::Zero(2), 1.0), 0.0, 1e-3};
  GenerationOptions opts;
  opts.initial = vec({-0.9, 0.0});
  const auto traj = generate_tv_trajectory(cls, VariationMode::drift, 3, 0, 200, opts);
  const auto rep = verify_tv_membership(traj, cls);
  CHECK(rep.member);
  CHECK(rep.max_violation <= 1e-15);
  const TimeVariationClass tighter{cls.parameter_set, 0.0, 0.9e-3};
  CHECK_FALSE(verify_tv_membership(traj, tighter).member);
}

TEST_CASE("jumps are isolated and spend at most c0") {
  const TimeVariationClass cls{ParameterSet::box(vec({-2, 0.5}), vec({2, 2})), 0.3, 0.0};
  GenerationOptions opts;
  opts.jump_count = 3;
  const auto traj = generate_tv_trajectory(cls, VariationMode::jumps, 5, 0, 100, opts);
  double total = 0.0;
  long last = -10;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double d = (traj.values()[k + 1] - traj.values()[k]).norm();
    if (d > 0) {
      CHECK(static_cast<long>(k) - last >= 2);
      last = static_cast<long>(k);
      CHECK(d == Approx(0.1));
      total += d;
    }
  }
  CHECK(total <= 0.3 + 1e-12);
}

TEST_CASE("infeasible generation requests are reported") {
  const auto small = ParameterSet::ball(Vector::Zero(2), 0.1);
  GenerationOptions opts;
  opts.jump_count = 1;
  CHECK_THROWS_AS(generate_tv_trajectory({small, 1.0, 0.0}, VariationMode::jumps, 1, 0, 50, opts), GenerationError);
  opts.jump_count = 40;
  CHECK_THROWS_AS(generate_tv_trajectory({small, 0.01, 0.0}, VariationMode::jumps, 1, 0, 50, opts), GenerationError);
  CHECK_THROWS_AS(TimeVariationClass({small, -1.0, 0.0}).validate(), ParameterError);
}

TEST_CASE("trajectory CSV round trip") {
  GenerationOptions shape;
  shape.rows = 2;
  shape.cols = 2;
  const auto traj = generate_tv_trajectory({unit_box(4), 0.2, 1e-3}, VariationMode::drift_jumps, 8, 3, 40, shape);
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  CHECK(ss.str().substr(0, ss.str().find('\n')) == "t,theta_0_0,theta_0_1,theta_1_0,theta_1_1");
  const auto back = read_trajectory_csv(ss);
  REQUIRE(back.size() == traj.size());
  CHECK(back.t0() == 3);
  for (std::size_t k = 0; k < traj.size(); ++k) CHECK(back.values()[k] == traj.values()[k]);
}

TEST_CASE("unmodelled dynamics state update and disturbance") {
  const UnmodelledDynamicsSpec spec{0.5, 0.1, GainBoundedMap::linear_functional(vec({1.0, 0.0})), 0.0};
  CHECK(umd_step(spec, {2.0}, vec({1.0, 0.0})).m == 1.5);
  CHECK(umd_step(spec, {0.0}, vec({0.0, 3.0})).m == 0.0);
  CHECK(umd_disturbance(spec, {1.0}, vec({1.0, 0.0}), vec({1.0})).d(0) == Approx(0.2));
  const UnmodelledDynamicsSpec off{0.5, 0.0, spec.g, 0.0};
  CHECK(umd_disturbance(off, {3.0}, vec({1.0, 2.0}), vec({1.0})).d(0) == 0.0);
  const auto clamped = umd_disturbance(spec, {1.0}, vec({1.0, 0.0}), vec({3.0}));
  CHECK(clamped.clamped);
  CHECK(clamped.d(0) == Approx(0.2));
}

TEST_CASE("m(t) stays below the geometric-series limit") {
  const UnmodelledDynamicsSpec spec{0.7, 0.1, GainBoundedMap::scaled_norm(2, 1.0), 5.0};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  const double G = std::sqrt(2.0);
  UmdState s{spec.m0};
  double limit_tail = 0.0;
  for (int t = 0; t < 400; ++t) {
    s = umd_step(spec, s, vec({u(rng), u(rng)}));
    CHECK(s.m >= 0.0);
    if (t > 200) limit_tail = std::max(limit_tail, s.m);
  }
  CHECK(limit_tail <= spec.beta * G / (1 - spec.beta) + 1e-12);
}

namespace {
ClosedLoopTrace umd_trace(DirectionMode mode, double mu, double m0 = 0.2) {
  const auto plant = osa_plant();
  auto ctrl = make_osa(vec({0.5, 1.0}), vec({0.5, -1.0}));
  const UnmodelledDynamicsSpec spec{0.6, mu, GainBoundedMap::scaled_norm(2, 0.5), m0};
  const Signal w(SignalSpec{SignalKind::uniform, 0.1}, 1, 4, 0, 200);
  const Signal ref(SignalSpec{SignalKind::sinusoid, 1.0, 25.0}, 1, 0, -2, 202);
  return run_closed_loop(plant, ctrl, ParameterTrajectory::constant(Matrix(vec({1.1, 0.9})), 0, 200), w, ref,
                         UmdConfig{spec, DirectionSource(mode, 1, 77)}, 0, 200,
                         Regressor(plant.layout, vec({0.5, 0.0})));
}
}  // namespace

TEST_CASE("simulated disturbances satisfy the bound at every step") {
  const UnmodelledDynamicsSpec spec{0.6, 0.05, GainBoundedMap::scaled_norm(2, 0.5), 0.2};
  for (auto mode : {DirectionMode::constant, DirectionMode::random, DirectionMode::adversarial}) {
    const auto trace = umd_trace(mode, 0.05);
    const auto check = verify_umd_bound(trace, spec);
    CHECK(check.ok);
    CHECK(check.state_consistent);
    for (const auto& s : trace.steps) CHECK(s.m >= 0.0);
  }
}

TEST_CASE("a unit direction saturates the bound exactly") {
  const UnmodelledDynamicsSpec spec{0.6, 0.05, GainBoundedMap::scaled_norm(2, 0.5), 0.2};
  const auto trace = umd_trace(DirectionMode::constant, 0.05);
  for (const auto& s : trace.steps)
    CHECK(s.d.norm() == Approx(spec.mu * s.m + spec.mu * std::abs(spec.g(s.phi)(0))).epsilon(1e-14));
}

TEST_CASE("tampered traces are caught") {
  const UnmodelledDynamicsSpec spec{0.6, 0.05, GainBoundedMap::scaled_norm(2, 0.5), 0.2};
  auto trace = umd_trace(DirectionMode::constant, 0.05);
  auto doubled = trace;
  for (auto& s : doubled.steps) s.d *= 2.0;
  const auto c1 = verify_umd_bound(doubled, spec);
  CHECK_FALSE(c1.ok);
  REQUIRE(c1.first_violation);
  CHECK(*c1.first_violation == 0);

  const UnmodelledDynamicsSpec wrong_m0{0.6, 0.05, spec.g, 0.0};
  const auto c2 = verify_umd_bound(trace, wrong_m0);
  CHECK_FALSE(c2.state_consistent);
  REQUIRE(c2.first_state_mismatch);
  CHECK(*c2.first_state_mismatch == 0);
}
