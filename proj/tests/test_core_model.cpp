#include <catch_amalgamated.hpp>

#include <sstream>

#include "test_support.hpp"

using namespace cbtest;
using Catch::Approx;

TEST_CASE("assemble_regressor stacks newest first") {
  const RegressorLayout l11{1, 1, 1, 1};
  std::vector<Vector> y{vec({3.0})}, u{vec({-1.0})};
  CHECK(assemble_regressor(y, u, 0, l11).flat().isApprox(vec({3.0, -1.0})));

  const RegressorLayout l21{2, 1, 1, 1};
  std::vector<Vector> y2{vec({7.0}), vec({1.0}), vec({2.0})}, u2{vec({9.0}), vec({4.0}), vec({5.0})};
  CHECK(assemble_regressor(y2, u2, 2, l21).flat() == vec({2.0, 1.0, 5.0}));

  std::vector<Vector> short_y{vec({1.0})};
  CHECK_THROWS_AS(assemble_regressor(short_y, u2, 0, l21), InitializationError);
}

TEST_CASE("regressor masking and advance") {
  const RegressorLayout l{2, 2, 1, 1};
  const Regressor phi(l, vec({1.0, 2.0, 3.0, 4.0}));
  const Regressor masked = phi.masked_current_input();
  CHECK(std::isnan(masked.flat()(2)));
  CHECK(masked.flat()(3) == 4.0);
  const Regressor full = masked.with_current_input(vec({5.0}));
  CHECK(full.flat() == vec({1.0, 2.0, 5.0, 4.0}));
  const Regressor next = full.advance(vec({8.0}));
  CHECK(next.y(0)(0) == 8.0);
  CHECK(next.y(1)(0) == 1.0);
  CHECK(std::isnan(next.u(0)(0)));
  CHECK(next.u(1)(0) == 5.0);
  CHECK_THROWS_AS(phi.y(2), DimensionError);
}

TEST_CASE("plant_step arithmetic") {
  const auto plant = linear_siso_plant(1, ParameterSet::box(vec({-2, -2}), vec({2, 2})));
  const Regressor phi(plant.layout, vec({2.0, 1.0}));
  CHECK(plant_step(plant, Matrix(vec({0.5, 1.0})), phi, vec({0.1}), vec({0.0}))(0) == Approx(2.1).epsilon(1e-15));
  CHECK(plant_step(plant, Matrix(vec({0.0, 0.0})), phi, vec({0.7}), vec({0.0}))(0) == 0.7);
  CHECK_THROWS_AS(plant_step(plant, Matrix(vec({0.5})), phi, vec({0.1}), vec({0.0})), DimensionError);
  CHECK_THROWS_AS(plant_step(plant, Matrix(vec({0.5, 1.0})), phi, vec({0.1, 0.2}), vec({0.0})), DimensionError);
}

TEST_CASE("plant_step is linear in theta and additive in disturbances") {
  const auto plant = linear_siso_plant(2, ParameterSet::box(Vector::Constant(4, -5), Vector::Constant(4, 5)));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int k = 0; k < 50; ++k) {
    Vector t1(4), t2(4), x(4);
    for (int i = 0; i < 4; ++i) {
      t1(i) = n(rng);
      t2(i) = n(rng);
      x(i) = n(rng);
    }
    const Vector w = vec({n(rng)}), d = vec({n(rng)}), z = vec({0.0});
    const double sum = plant_step(plant, Matrix(t1 + t2), x, z, z)(0);
    CHECK(sum == Approx(plant_step(plant, Matrix(t1), x, z, z)(0) + plant_step(plant, Matrix(t2), x, z, z)(0))
                     .margin(1e-12));
    CHECK(plant_step(plant, Matrix(t1), x, w, d)(0) - plant_step(plant, Matrix(t1), x, z, z)(0) ==
          Approx(w(0) + d(0)).margin(1e-12));
  }
}

TEST_CASE("nonlinear feature map respects its declared gain in the plant") {
  const RegressorLayout layout{1, 1, 1, 1};
  const ParameterSet set = ParameterSet::ball(vec({0.0, 0.0}), 1.5);
  const PlantSpec plant{layout, 2, GainBoundedMap::elementwise_tanh(2, 0.8), set};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int k = 0; k < 500; ++k) {
    Vector x(2);
    x << n(rng), n(rng);
    x /= x.norm();
    const Vector theta = set.sample(rng);
    const double y = plant_step(plant, Matrix(theta), x, vec({0.0}), vec({0.0})).norm();
    CHECK(y <= set.norm_bound() * 0.8 + 1e-12);
  }
}

TEST_CASE("gain maps pass their spot check and vanish at zero") {
  Matrix a(2, 3);
  a << 1, 2, 0, -1, 0.5, 3;
  const std::vector<GainBoundedMap> maps{GainBoundedMap::identity(3), GainBoundedMap::linear(a),
                                         GainBoundedMap::elementwise_sin(3), GainBoundedMap::elementwise_tanh(3, 2.0),
                                         GainBoundedMap::scaled_norm(3, 0.7),
                                         GainBoundedMap::linear_functional(vec({1, -2, 2}))};
  for (const auto& m : maps) {
    CHECK(spot_check_gain(m, 2000, 3) <= m.gain() * (1 + 1e-12));
    CHECK(m(Vector::Zero(3)).norm() == 0.0);
  }
  CHECK_THROWS_AS(GainBoundedMap::identity(3)(Vector::Zero(2)), DimensionError);
}

TEST_CASE("zero initial window and zero signals give an identically zero trace") {
  const auto plant = osa_plant();
  auto ctrl = make_osa(vec({0.5, 1.0}), vec({0.5, -1.0}));
  const auto trace = run_closed_loop(plant, ctrl, ParameterTrajectory::constant(Matrix(vec({0.9, 1.2})), 0, 50),
                                     Signal::zero(1), Signal::zero(1), std::nullopt, 0, 50,
                                     Regressor::zeros(plant.layout));
  REQUIRE(trace.steps.size() == 51);
  for (const auto& s : trace.steps) {
    CHECK(s.phi.norm() == 0.0);
    CHECK(s.u.norm() == 0.0);
  }
}

TEST_CASE("recorded regressors match the recorded histories") {
  std::mt19937_64 rng(2);
  const Vector theta = random_coprime_plant(2, rng);
  const auto plant = linear_siso_plant(2, ParameterSet::box(Vector::Constant(4, -1), Vector::Constant(4, 1)));
  PpController ctrl(PpConfig{2,
                             {ParameterSet::box(Vector::Constant(4, -1), Vector::Constant(4, 1)),
                              ParameterSet::ball(Vector::Zero(4), 1.0)},
                             {Vector::Constant(4, 0.1), vec({0.2, 0.1, 0.5, 0.3})},
                             1,
                             5});
  const Signal w(SignalSpec{SignalKind::uniform, 0.1}, 1, 9, 0, 80);
  const Signal ref(SignalSpec{SignalKind::sinusoid, 1.0, 20.0}, 1, 0, -5, 100);
  const auto trace = run_closed_loop(plant, ctrl, ParameterTrajectory::constant(Matrix(theta), 0, 80), w, ref,
                                     std::nullopt, 0, 80, Regressor(plant.layout, vec({0.3, -0.2, 0.1, 0.4})));
  std::vector<Vector> yh, uh;
  const std::size_t base = trace.histories(yh, uh);
  for (std::size_t k = 0; k < trace.steps.size(); ++k)
    CHECK(assemble_regressor(yh, uh, base + k, trace.layout).flat() == trace.steps[k].phi);
}

namespace {
struct ReadsCurrentInput : ZeroInputController {
  ReadsCurrentInput() : ZeroInputController(1) {}
  bool reads_current_input() const { return true; }
};
}  // namespace

TEST_CASE("simulator rejects controllers that read u(t)") {
  const auto plant = osa_plant();
  ReadsCurrentInput ctrl;
  CHECK_THROWS_AS(run_closed_loop(plant, ctrl, ParameterTrajectory::constant(Matrix(vec({0.5, 1.0})), 0, 5),
                                  Signal::zero(1), Signal::zero(1), std::nullopt, 0, 5,
                                  Regressor::zeros(plant.layout)),
                  ConfigurationError);
}

TEST_CASE("unstable open loop is recorded as divergence, not thrown") {
  const auto trace = scalar_trace(2.0, std::vector<double>(200, 0.0), 1.0);
  CHECK(trace.diverged);
  REQUIRE(trace.divergence_time);
  CHECK(*trace.divergence_time == trace.steps.back().t);
  CHECK(trace.steps.back().phi.norm() > 1e12);
  CHECK(trace.steps[trace.steps.size() - 2].phi.norm() <= 1e12);
}

TEST_CASE("trace CSV has the documented header and round-trips at full precision") {
  const auto trace = scalar_trace(0.5, {0.1, -0.3, 1.0 / 3.0, 0.0}, 1.0 / 7.0);
  std::ostringstream os;
  write_trace_csv(os, trace);
  const std::string text = os.str();
  CHECK(text.substr(0, text.find('\n')) == "t,y_0,u_0,w_0,r_0,sigma,m_umd,norm_phi_z1");
  std::istringstream is(text);
  const TraceTable table = read_trace_csv(is);
  REQUIRE(table.rows() == trace.steps.size());
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    CHECK(table.col("y_0")[k] == trace.steps[k].y(0));
    CHECK(table.col("w_0")[k] == trace.steps[k].w(0));
  }
}

TEST_CASE("signals are deterministic per seed and bounded by their amplitude") {
  const Signal a(SignalSpec{SignalKind::uniform, 0.2}, 2, 42, 0, 100);
  const Signal b(SignalSpec{SignalKind::uniform, 0.2}, 2, 42, 0, 100);
  for (long t = 0; t <= 100; ++t) {
    CHECK(a(t) == b(t));
    CHECK(a(t).cwiseAbs().maxCoeff() <= 0.2);
  }
  CHECK_THROWS_AS(a(101), InitializationError);
  CHECK(derive_seed(7, "w") != derive_seed(7, "r"));
  CHECK(derive_seed(7, "w") == derive_seed(7, "w"));
  const Signal s(SignalSpec{SignalKind::sinusoid, 2.0, 8.0}, 1, 0, 0, 0);
  CHECK(s(2)(0) == Approx(2.0));
}
