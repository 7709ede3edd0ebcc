#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "convbound/certificate.hpp"
#include "convbound/harness/json_io.hpp"
#include "convbound/osa_controller.hpp"
#include "convbound/pp_controller.hpp"
#include "convbound/simulator.hpp"

namespace convbound::harness {

inline constexpr const char* kScenarioSchema = "convbound.scenario/1";

struct ThetaSource {
  bool varying = false;
  Vector value;  // fixed theta*, flattened
  VariationMode mode = VariationMode::constant;
  double c0 = 0.0;
  double epsilon = 0.0;
  std::optional<Vector> initial;
  std::size_t member = 0;
  std::size_t jump_count = 2;
};

struct UmdSource {
  double beta = 0.5;
  double mu = 0.0;
  double m0 = 0.0;
  std::string g_kind = "norm";  // norm | linear
  double g_gain = 1.0;
  Vector g_weights;
  DirectionMode direction = DirectionMode::constant;
};

/// A fully parsed and validated experiment description. The raw JSON is kept so
/// sweeps can rewrite single fields and re-parse.
struct Scenario {
  json raw;
  std::uint64_t seed = 0;
  long t0 = 0;
  long horizon = 200;
  std::size_t order = 1;
  std::string feature_map = "identity";  // identity | sin | tanh
  double feature_gain = 1.0;
  std::optional<ParameterSet> plant_set;
  std::string controller = "osa";  // osa | pp | deadbeat | zero
  std::vector<ParameterSet> estimator_sets;
  std::vector<Vector> initial_estimates;
  int sigma0 = 1;
  std::size_t period = 2;
  ThetaSource theta;
  SignalSpec disturbance;
  SignalSpec reference;
  std::optional<UmdSource> umd;
  Vector initial_window;
  std::vector<double> lambda_grid{0.9, 0.95, 0.99};
  StateKind state_kind = StateKind::phi_z1;
};

namespace detail {

class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  const json* child(const json& j, const std::string& key, const std::string& path, bool required) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return nullptr;
    }
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) fail(path + "." + key, "missing");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& j, const std::string& key, const std::string& path, double fallback, bool required = false) {
    const json* v = child(j, key, path, required);
    if (!v) return fallback;
    if (!v->is_number()) {
      fail(path + "." + key, "expected a number");
      return fallback;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) fail(path + "." + key, "must be finite");
    return d;
  }

  long integer(const json& j, const std::string& key, const std::string& path, long fallback, bool required = false) {
    const json* v = child(j, key, path, required);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return fallback;
    }
    return v->get<long>();
  }

  std::uint64_t seed(const json& j, const std::string& path) {
    const json* v = child(j, "seed", path, false);
    if (!v) return 0;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (!v->is_number_integer()) fail(path + ".seed", "expected an integer");
    else if (v->get<long long>() >= 0) return static_cast<std::uint64_t>(v->get<long long>());
    else fail(path + ".seed", "must be >= 0");
    return 0;
  }

  std::string text(const json& j, const std::string& key, const std::string& path, std::string fallback,
                   bool required = false) {
    const json* v = child(j, key, path, required);
    if (!v) return fallback;
    if (!v->is_string()) {
      fail(path + "." + key, "expected a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  std::optional<Vector> vector(const json& v, const std::string& path) {
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number() || !std::isfinite(v[k].get<double>())) {
        fail(path + "[" + std::to_string(k) + "]", "expected a finite number");
        return std::nullopt;
      }
      out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
    }
    return out;
  }

  std::optional<Matrix> matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) {
      fail(path, "expected a nonempty array of rows");
      return std::nullopt;
    }
    std::optional<Matrix> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto row = vector(v[i], path + "[" + std::to_string(i) + "]");
      if (!row) return std::nullopt;
      if (!out) out = Matrix(static_cast<Eigen::Index>(v.size()), row->size());
      if (row->size() != out->cols()) {
        fail(path, "rows differ in length");
        return std::nullopt;
      }
      out->row(static_cast<Eigen::Index>(i)) = row->transpose();
    }
    return out;
  }

  std::optional<ParameterSet> set(const json& j, const std::string& path) {
    const std::string kind = text(j, "kind", path, "", true);
    try {
      if (kind == "box") {
        const json* lo = child(j, "lower", path, true);
        const json* hi = child(j, "upper", path, true);
        if (!lo || !hi) return std::nullopt;
        auto l = vector(*lo, path + ".lower");
        auto u = vector(*hi, path + ".upper");
        if (!l || !u) return std::nullopt;
        return ParameterSet::box(*l, *u);
      }
      if (kind == "ball") {
        const json* c = child(j, "center", path, true);
        if (!c) return std::nullopt;
        auto center = vector(*c, path + ".center");
        const double radius = number(j, "radius", path, 0.0, true);
        if (!center) return std::nullopt;
        return ParameterSet::ball(*center, radius);
      }
      if (kind == "polytope") {
        const json* a = child(j, "normals", path, true);
        const json* b = child(j, "offsets", path, true);
        if (!a || !b) return std::nullopt;
        auto normals = matrix(*a, path + ".normals");
        auto offsets = vector(*b, path + ".offsets");
        if (!normals || !offsets) return std::nullopt;
        return ParameterSet::polytope(*normals, *offsets);
      }
      if (kind == "union") {
        const json* ms = child(j, "members", path, true);
        if (!ms) return std::nullopt;
        if (!ms->is_array() || ms->empty()) {
          fail(path + ".members", "expected a nonempty array of sets");
          return std::nullopt;
        }
        std::vector<ParameterSet> members;
        for (std::size_t k = 0; k < ms->size(); ++k) {
          auto m = set((*ms)[k], path + ".members[" + std::to_string(k) + "]");
          if (!m) return std::nullopt;
          members.push_back(std::move(*m));
        }
        return ParameterSet::set_union(std::move(members));
      }
      if (!kind.empty()) fail(path + ".kind", "unknown set kind '" + kind + "' (box, ball, polytope, union)");
    } catch (const Error& e) {
      fail(path, e.what());
    }
    return std::nullopt;
  }

  SignalSpec signal(const json& root, const std::string& key) {
    SignalSpec spec;
    const json* j = child(root, key, "scenario", false);
    if (!j) return spec;
    const std::string path = "scenario." + key;
    const std::string kind = text(*j, "kind", path, "zero");
    if (kind == "zero") spec.kind = SignalKind::zero;
    else if (kind == "constant") spec.kind = SignalKind::constant;
    else if (kind == "sinusoid") spec.kind = SignalKind::sinusoid;
    else if (kind == "uniform") spec.kind = SignalKind::uniform;
    else fail(path + ".kind", "unknown signal kind '" + kind + "' (zero, constant, sinusoid, uniform)");
    spec.amplitude = number(*j, "amplitude", path, 0.0);
    spec.period = number(*j, "period", path, 50.0);
    spec.phase = number(*j, "phase", path, 0.0);
    if (spec.kind == SignalKind::sinusoid && !(spec.period > 0.0)) fail(path + ".period", "must be > 0");
    if (spec.kind == SignalKind::uniform && spec.amplitude < 0.0) fail(path + ".amplitude", "must be >= 0");
    return spec;
  }
};

inline bool excludes_zero_input_gain(const ParameterSet& s) {
  if (!s.is_convex()) {
    for (const auto& m : s.members())
      if (!excludes_zero_input_gain(m)) return false;
    return true;
  }
  const auto [lo, hi] = s.coordinate_range(1);
  return lo > 0.0 || hi < 0.0;
}

}  // namespace detail

/// Parses a scenario; every problem found is collected instead of stopping at
/// the first one. Returns the scenario only when the list is empty.
inline std::pair<std::optional<Scenario>, std::vector<std::string>> parse_scenario(const json& j) {
  detail::Reader rd;
  Scenario s;
  s.raw = j;
  const std::string root = "scenario";
  if (!j.is_object()) return {std::nullopt, {"scenario: expected a JSON object"}};

  const std::string schema = rd.text(j, "schema", root, "", true);
  if (!schema.empty() && schema != kScenarioSchema)
    rd.fail(root + ".schema", "expected '" + std::string(kScenarioSchema) + "', got '" + schema + "'");
  s.seed = rd.seed(j, root);
  s.t0 = rd.integer(j, "t0", root, 0);
  s.horizon = rd.integer(j, "horizon", root, 200);
  if (s.horizon < 1) rd.fail(root + ".horizon", "must be >= 1");

  // plant
  if (const json* p = rd.child(j, "plant", root, true)) {
    const long order = rd.integer(*p, "order", root + ".plant", 1);
    if (order < 1 || order > 8) rd.fail(root + ".plant.order", "must lie in [1, 8]");
    else s.order = static_cast<std::size_t>(order);
    if (const json* f = rd.child(*p, "feature_map", root + ".plant", false)) {
      s.feature_map = rd.text(*f, "kind", root + ".plant.feature_map", "identity");
      s.feature_gain = rd.number(*f, "gain", root + ".plant.feature_map", 1.0);
      if (s.feature_map != "identity" && s.feature_map != "sin" && s.feature_map != "tanh")
        rd.fail(root + ".plant.feature_map.kind", "unknown feature map '" + s.feature_map + "' (identity, sin, tanh)");
    }
    if (const json* ps = rd.child(*p, "parameter_set", root + ".plant", true))
      s.plant_set = rd.set(*ps, root + ".plant.parameter_set");
  }
  const std::size_t dim = 2 * s.order;
  if (s.plant_set && s.plant_set->dim() != dim)
    rd.fail(root + ".plant.parameter_set", "dimension " + std::to_string(s.plant_set->dim()) + " differs from 2n = " +
                                              std::to_string(dim));

  // controller
  if (const json* c = rd.child(j, "controller", root, true)) {
    const std::string path = root + ".controller";
    s.controller = rd.text(*c, "kind", path, "", true);
    const bool adaptive = s.controller == "osa" || s.controller == "pp";
    if (!adaptive && s.controller != "deadbeat" && s.controller != "zero" && !s.controller.empty())
      rd.fail(path + ".kind", "unknown controller '" + s.controller + "' (osa, pp, deadbeat, zero)");
    if (s.controller != "zero" && s.feature_map != "identity")
      rd.fail(root + ".plant.feature_map", "the " + s.controller + " controller needs a linear plant (identity)");
    if (s.controller == "osa" && s.order != 1) rd.fail(root + ".plant.order", "the osa controller needs order 1");
    s.sigma0 = static_cast<int>(rd.integer(*c, "sigma0", path, 1));
    if (adaptive && s.sigma0 != 1 && s.sigma0 != 2) rd.fail(path + ".sigma0", "must be 1 or 2");
    const long period = rd.integer(*c, "period", path, static_cast<long>(2 * s.order));
    if (s.controller == "pp" && period < static_cast<long>(2 * s.order))
      rd.fail(path + ".period", "switching period N must be >= 2n = " + std::to_string(2 * s.order));
    s.period = static_cast<std::size_t>(std::max(1L, period));
    if (adaptive) {
      const json* sets = rd.child(*c, "sets", path, true);
      const json* init = rd.child(*c, "initial", path, true);
      if (sets && (!sets->is_array() || sets->size() != 2)) rd.fail(path + ".sets", "expected exactly two sets");
      else if (sets)
        for (std::size_t i = 0; i < 2; ++i) {
          const std::string sp = path + ".sets[" + std::to_string(i) + "]";
          auto set = rd.set((*sets)[i], sp);
          if (!set) continue;
          if (!set->is_convex()) rd.fail(sp, "estimator sets must be convex");
          else if (set->dim() != dim) rd.fail(sp, "dimension must be 2n = " + std::to_string(dim));
          else {
            if (s.controller == "osa" && !detail::excludes_zero_input_gain(*set))
              rd.fail(sp, "set contains points with b = 0");
            s.estimator_sets.push_back(std::move(*set));
          }
        }
      if (init && (!init->is_array() || init->size() != 2)) rd.fail(path + ".initial", "expected two initial estimates");
      else if (init)
        for (std::size_t i = 0; i < 2; ++i) {
          const std::string ip = path + ".initial[" + std::to_string(i) + "]";
          auto v = rd.vector((*init)[i], ip);
          if (!v) continue;
          if (static_cast<std::size_t>(v->size()) != dim) {
            rd.fail(ip, "length must be 2n = " + std::to_string(dim));
            continue;
          }
          s.initial_estimates.push_back(*v);
        }
      if (s.estimator_sets.size() == 2 && s.initial_estimates.size() == 2)
        for (std::size_t i = 0; i < 2; ++i)
          if (s.estimator_sets[i].distance(s.initial_estimates[i]) > 1e-9)
            rd.fail(path + ".initial[" + std::to_string(i) + "]", "initial estimate lies outside its set");
    }
  }

  // theta*
  if (const json* t = rd.child(j, "theta", root, true)) {
    const std::string path = root + ".theta";
    const std::string source = rd.text(*t, "source", path, "fixed");
    if (source == "fixed") {
      if (const json* v = rd.child(*t, "value", path, true))
        if (auto vec = rd.vector(*v, path + ".value")) {
          s.theta.value = *vec;
          if (static_cast<std::size_t>(vec->size()) != dim) rd.fail(path + ".value", "length must be 2n");
          else if (s.plant_set && !s.plant_set->contains(*vec)) rd.fail(path + ".value", "lies outside the plant set");
        }
    } else if (source == "tv") {
      s.theta.varying = true;
      try {
        s.theta.mode = variation_mode_from_string(rd.text(*t, "mode", path, "constant"));
      } catch (const Error& e) {
        rd.fail(path + ".mode", e.what());
      }
      s.theta.c0 = rd.number(*t, "c0", path, 0.0);
      s.theta.epsilon = rd.number(*t, "epsilon", path, 0.0);
      if (s.theta.c0 < 0.0) rd.fail(path + ".c0", "must be >= 0");
      if (s.theta.epsilon < 0.0) rd.fail(path + ".epsilon", "must be >= 0");
      const long member = rd.integer(*t, "member", path, 0);
      const long jumps = rd.integer(*t, "jump_count", path, 2);
      if (member < 0) rd.fail(path + ".member", "must be >= 0");
      if (jumps < 0) rd.fail(path + ".jump_count", "must be >= 0");
      s.theta.member = static_cast<std::size_t>(std::max(0L, member));
      s.theta.jump_count = static_cast<std::size_t>(std::max(0L, jumps));
      if (s.plant_set && !s.plant_set->is_convex() && s.theta.member >= s.plant_set->members().size())
        rd.fail(path + ".member", "no such member of the plant set");
      if (const json* v = rd.child(*t, "initial", path, false))
        if (auto vec = rd.vector(*v, path + ".initial")) {
          s.theta.initial = *vec;
          if (static_cast<std::size_t>(vec->size()) != dim) rd.fail(path + ".initial", "length must be 2n");
          else if (s.plant_set && !s.plant_set->contains(*vec))
            rd.fail(path + ".initial", "lies outside the plant set");
        }
    } else {
      rd.fail(path + ".source", "unknown source '" + source + "' (fixed, tv)");
    }
  }

  s.disturbance = rd.signal(j, "disturbance");
  s.reference = rd.signal(j, "reference");

  if (const json* u = rd.child(j, "umd", root, false)) {
    const std::string path = root + ".umd";
    UmdSource umd;
    umd.beta = rd.number(*u, "beta", path, 0.5);
    umd.mu = rd.number(*u, "mu", path, 0.0);
    umd.m0 = rd.number(*u, "m0", path, 0.0);
    if (!(umd.beta > 0.0 && umd.beta < 1.0)) rd.fail(path + ".beta", "must lie in (0, 1)");
    if (umd.mu < 0.0) rd.fail(path + ".mu", "must be >= 0");
    if (umd.m0 < 0.0) rd.fail(path + ".m0", "must be >= 0");
    try {
      umd.direction = direction_mode_from_string(rd.text(*u, "direction", path, "constant"));
    } catch (const Error& e) {
      rd.fail(path + ".direction", e.what());
    }
    if (const json* g = rd.child(*u, "g", path, false)) {
      umd.g_kind = rd.text(*g, "kind", path + ".g", "norm");
      umd.g_gain = rd.number(*g, "gain", path + ".g", 1.0);
      if (umd.g_kind == "linear") {
        if (const json* w = rd.child(*g, "weights", path + ".g", true))
          if (auto v = rd.vector(*w, path + ".g.weights")) {
            umd.g_weights = *v;
            if (static_cast<std::size_t>(v->size()) != dim) rd.fail(path + ".g.weights", "length must be 2n");
          }
      } else if (umd.g_kind != "norm") {
        rd.fail(path + ".g.kind", "unknown map '" + umd.g_kind + "' (norm, linear)");
      }
      if (umd.g_gain < 0.0) rd.fail(path + ".g.gain", "must be >= 0");
    }
    s.umd = umd;
  }

  if (const json* w = rd.child(j, "initial_window", root, false)) {
    if (auto v = rd.vector(*w, root + ".initial_window")) {
      if (static_cast<std::size_t>(v->size()) != dim)
        rd.fail(root + ".initial_window", "length must be 2n = " + std::to_string(dim));
      else s.initial_window = *v;
    }
  } else {
    s.initial_window = Vector::Zero(static_cast<Eigen::Index>(dim));
  }

  if (const json* c = rd.child(j, "certify", root, false)) {
    const std::string path = root + ".certify";
    if (const json* g = rd.child(*c, "lambda_grid", path, false))
      if (auto v = rd.vector(*g, path + ".lambda_grid")) {
        s.lambda_grid.assign(v->data(), v->data() + v->size());
        if (s.lambda_grid.empty()) rd.fail(path + ".lambda_grid", "must be nonempty");
        for (double l : s.lambda_grid)
          if (!(l > 0.0 && l < 1.0)) rd.fail(path + ".lambda_grid", "values must lie in (0, 1)");
      }
    try {
      s.state_kind = state_kind_from_string(rd.text(*c, "state_kind", path, "phi_z1"));
    } catch (const Error& e) {
      rd.fail(path + ".state_kind", e.what());
    }
  }

  if (!rd.errors.empty()) return {std::nullopt, std::move(rd.errors)};
  return {std::move(s), {}};
}

inline std::vector<std::string> validate_scenario(const json& j) { return parse_scenario(j).second; }

inline Scenario load_scenario(const json& j) {
  auto [s, errors] = parse_scenario(j);
  if (!s) throw ValidationError(std::move(errors));
  return std::move(*s);
}

struct ScenarioRun {
  ClosedLoopTrace trace;
  std::optional<ParameterTrajectory> trajectory;
  std::optional<MembershipReport> membership;
  std::optional<UmdCheck> umd_check;
  std::vector<GainFit> frontier;
  std::vector<BoundCertificate> certificates;
  std::vector<std::string> notes;  // fit failures and similar non-fatal outcomes
};

inline GainBoundedMap make_feature_map(const Scenario& s) {
  const std::size_t n = 2 * s.order;
  if (s.feature_map == "sin") return GainBoundedMap::elementwise_sin(n);
  if (s.feature_map == "tanh") return GainBoundedMap::elementwise_tanh(n, s.feature_gain);
  return GainBoundedMap::identity(n);
}

inline PlantSpec make_plant(const Scenario& s) {
  const RegressorLayout layout{s.order, s.order, 1, 1};
  PlantSpec spec{layout, 2 * s.order, make_feature_map(s), *s.plant_set};
  spec.validate();
  return spec;
}

inline std::optional<UnmodelledDynamicsSpec> make_umd_spec(const Scenario& s) {
  if (!s.umd) return std::nullopt;
  const std::size_t n = 2 * s.order;
  GainBoundedMap g = s.umd->g_kind == "linear" ? GainBoundedMap::linear_functional(s.umd->g_weights)
                                               : GainBoundedMap::scaled_norm(n, s.umd->g_gain);
  return UnmodelledDynamicsSpec{s.umd->beta, s.umd->mu, std::move(g), s.umd->m0};
}

/// Deterministic in the scenario (and its seed): builds theta*, w, y*, the
/// optional unmodelled dynamics, runs the loop and fits/checks the bound.
inline ScenarioRun run_scenario(const Scenario& s) {
  const PlantSpec plant = make_plant(s);
  ScenarioRun out;

  ParameterTrajectory traj = [&] {
    if (!s.theta.varying) return ParameterTrajectory::constant(Matrix(s.theta.value), s.t0, s.horizon);
    const TimeVariationClass cls{*s.plant_set, s.theta.c0, s.theta.epsilon};
    GenerationOptions go;
    go.initial = s.theta.initial;
    go.member = s.theta.member;
    go.jump_count = s.theta.jump_count;
    auto generated = generate_tv_trajectory(cls, s.theta.mode, derive_seed(s.seed, "theta"), s.t0, s.horizon, go);
    out.membership = verify_tv_membership(generated, cls);
    return generated;
  }();

  const Signal w(s.disturbance, 1, derive_seed(s.seed, "w"), s.t0, s.t0 + s.horizon);
  const Signal ref(s.reference, 1, derive_seed(s.seed, "r"), s.t0 - static_cast<long>(s.order) - 1,
                   s.t0 + s.horizon + 1);
  const auto umd_spec = make_umd_spec(s);
  std::optional<UmdConfig> umd;
  if (umd_spec) umd = UmdConfig{*umd_spec, DirectionSource(s.umd->direction, 1, derive_seed(s.seed, "dir"))};
  const Regressor phi0(plant.layout, s.initial_window);

  auto run = [&](auto& controller) {
    return run_closed_loop(plant, controller, traj, w, ref, umd, s.t0, s.horizon, phi0);
  };
  if (s.controller == "osa") {
    OsaController c(OsaConfig{{s.estimator_sets[0], s.estimator_sets[1]},
                              {s.initial_estimates[0], s.initial_estimates[1]},
                              s.sigma0});
    out.trace = run(c);
  } else if (s.controller == "pp") {
    PpController c(PpConfig{s.order,
                            {s.estimator_sets[0], s.estimator_sets[1]},
                            {s.initial_estimates[0], s.initial_estimates[1]},
                            s.sigma0,
                            s.period});
    out.trace = run(c);
  } else if (s.controller == "deadbeat") {
    DeadbeatController c(flatten_row_major(traj.at(s.t0)), s.order);
    out.trace = run(c);
  } else {
    ZeroInputController c(1);
    out.trace = run(c);
  }
  out.trajectory = std::move(traj);
  if (umd_spec) out.umd_check = verify_umd_bound(out.trace, *umd_spec);

  if (!out.trace.diverged) {
    const BoundSeries series = BoundSeries::from_trace(out.trace, s.state_kind);
    for (double l : s.lambda_grid) {
      try {
        const GainFit fit = fit_minimal_gain(series, l);
        out.frontier.push_back(fit);
        out.certificates.push_back(check_convolution_bound(series, fit.c_min, l, s.state_kind));
      } catch (const UnfittableError& e) {
        out.notes.push_back(std::string("lambda=") + convbound::detail::fmt17(l) + ": " + e.what());
      }
    }
  }
  return out;
}

inline json summary_json(const Scenario& s, const ScenarioRun& run) {
  double max_state = 0.0;
  for (const auto& st : run.trace.steps) max_state = std::max(max_state, state_norm(st, s.state_kind));
  json j = {{"schema", "convbound.summary/1"},
            {"seed", s.seed},
            {"controller", s.controller},
            {"steps", run.trace.steps.size()},
            {"diverged", run.trace.diverged},
            {"divergence_time", run.trace.divergence_time ? json(*run.trace.divergence_time) : json(nullptr)},
            {"max_state_norm", number(max_state)},
            {"state_kind", to_string(s.state_kind)},
            {"events", run.trace.events},
            {"notes", run.notes}};
  j["frontier"] = json::array();
  for (const auto& f : run.frontier) j["frontier"].push_back(to_json(f));
  j["certificates"] = json::array();
  for (const auto& c : run.certificates) j["certificates"].push_back(to_json(c));
  j["tv_membership"] = run.membership ? to_json(*run.membership) : json(nullptr);
  j["umd_check"] = run.umd_check ? to_json(*run.umd_check) : json(nullptr);
  return j;
}

inline std::string trace_csv(const ClosedLoopTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

inline std::string trajectory_csv(const ParameterTrajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

}  // namespace convbound::harness
