#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "convbound/harness/scenario.hpp"

namespace convbound::harness {

inline constexpr const char* kSweepSchema = "convbound.sweep/1";

/// One swept scenario field, a value grid and seeds per grid point. Seed k is
/// the same at every grid point, so points differ only in the swept value.
struct SweepSpec {
  json scenario;
  std::string parameter;  // epsilon | mu | c0 | period | amplitude
  std::vector<double> values;
  std::size_t seeds = 1;
  double lambda = 0.99;
  std::size_t workers = 0;  // 0: hardware concurrency
};

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  double fitted_c = std::numeric_limits<double>::quiet_NaN();  // NaN when diverged or unfittable
  bool diverged = false;
};

struct SweepPoint {
  double value = 0.0;
  std::size_t runs = 0;
  std::size_t divergences = 0;
  double divergence_fraction = 0.0;
  double max_fitted_c = 0.0;  // over non-diverged runs; NaN if none could be fitted
};

struct SweepReport {
  std::string parameter;
  double lambda = 0.99;
  std::vector<SweepRow> rows;
  std::vector<SweepPoint> points;
};

namespace detail {

// JSON location of each sweepable field inside a scenario.
inline std::vector<std::string> sweep_path(const std::string& parameter) {
  if (parameter == "epsilon") return {"theta", "epsilon"};
  if (parameter == "c0") return {"theta", "c0"};
  if (parameter == "mu") return {"umd", "mu"};
  if (parameter == "period") return {"controller", "period"};
  if (parameter == "amplitude") return {"disturbance", "amplitude"};
  return {};
}

inline json with_value(json scenario, const std::string& parameter, double v) {
  const auto path = sweep_path(parameter);
  json* node = &scenario;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) node = &(*node)[path[k]];
  if (parameter == "period") (*node)[path.back()] = static_cast<long>(std::llround(v));
  else (*node)[path.back()] = v;
  return scenario;
}

}  // namespace detail

inline std::vector<std::string> validate_sweep(const SweepSpec& sw) {
  std::vector<std::string> errors;
  if (detail::sweep_path(sw.parameter).empty())
    errors.push_back("sweep.parameter: unknown parameter '" + sw.parameter + "' (epsilon, mu, c0, period, amplitude)");
  if (sw.values.empty()) errors.push_back("sweep.values: grid must be nonempty");
  if (sw.seeds < 1) errors.push_back("sweep.seeds: must be >= 1");
  if (!(sw.lambda > 0.0 && sw.lambda < 1.0)) errors.push_back("sweep.lambda: must lie in (0, 1)");
  if (!errors.empty()) return errors;
  if (sw.parameter == "mu" && !sw.scenario.contains("umd"))
    errors.push_back("sweep.parameter: mu needs an umd section in the scenario");
  if ((sw.parameter == "epsilon" || sw.parameter == "c0") && sw.scenario.value(json::json_pointer("/theta/source"), std::string()) != "tv")
    errors.push_back("sweep.parameter: " + sw.parameter + " needs a tv theta source");
  for (double v : sw.values)
    for (auto& e : validate_scenario(detail::with_value(sw.scenario, sw.parameter, v)))
      errors.push_back("at " + sw.parameter + "=" + convbound::detail::fmt17(v) + ": " + e);
  return errors;
}

inline SweepSpec parse_sweep(const json& j) {
  std::vector<std::string> errors;
  SweepSpec sw;
  if (!j.is_object()) throw ValidationError({"sweep: expected a JSON object"});
  if (j.value("schema", "") != kSweepSchema)
    errors.push_back("sweep.schema: expected '" + std::string(kSweepSchema) + "'");
  if (!j.contains("scenario") || !j["scenario"].is_object()) errors.push_back("sweep.scenario: missing scenario object");
  else sw.scenario = j["scenario"];
  try {
    sw.parameter = j.value("parameter", "");
    sw.values = j.value("values", std::vector<double>{});
    const long seeds = j.value("seeds", 1L);
    if (seeds < 1) errors.push_back("sweep.seeds: must be >= 1");
    sw.seeds = static_cast<std::size_t>(std::max(1L, seeds));
    sw.lambda = j.value("lambda", 0.99);
  } catch (const json::exception& e) {
    errors.push_back(std::string("sweep: ") + e.what());
  }
  if (errors.empty()) errors = validate_sweep(sw);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return sw;
}

/// Runs every (value, seed) pair, in parallel across a bounded worker pool.
inline SweepReport run_sweep(const SweepSpec& sw) {
  if (auto errors = validate_sweep(sw); !errors.empty()) throw ValidationError(std::move(errors));
  const std::uint64_t master = sw.scenario.value("seed", 0ULL);
  SweepReport report{sw.parameter, sw.lambda, {}, {}};
  report.rows.resize(sw.values.size() * sw.seeds);

  auto job = [&](std::size_t idx) {
    const std::size_t vi = idx / sw.seeds, k = idx % sw.seeds;
    SweepRow row;
    row.value = sw.values[vi];
    row.seed = derive_seed(master, "sweep/" + std::to_string(k));
    json cfg = detail::with_value(sw.scenario, sw.parameter, row.value);
    cfg["seed"] = row.seed;
    Scenario s = load_scenario(cfg);
    s.lambda_grid = {sw.lambda};
    const ScenarioRun run = run_scenario(s);
    row.diverged = run.trace.diverged;
    if (!run.frontier.empty()) row.fitted_c = run.frontier.front().c_min;
    report.rows[idx] = row;
  };

  const std::size_t total = report.rows.size();
  std::size_t workers = sw.workers ? sw.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, total);
  std::vector<std::future<void>> pending;
  for (std::size_t w = 0; w < workers; ++w)
    pending.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t idx = w; idx < total; idx += workers) job(idx);
    }));
  for (auto& f : pending) f.get();

  for (std::size_t vi = 0; vi < sw.values.size(); ++vi) {
    SweepPoint p;
    p.value = sw.values[vi];
    bool any_fit = false;
    for (std::size_t k = 0; k < sw.seeds; ++k) {
      const auto& row = report.rows[vi * sw.seeds + k];
      ++p.runs;
      if (row.diverged) ++p.divergences;
      if (std::isfinite(row.fitted_c)) {
        p.max_fitted_c = any_fit ? std::max(p.max_fitted_c, row.fitted_c) : row.fitted_c;
        any_fit = true;
      }
    }
    if (!any_fit) p.max_fitted_c = std::numeric_limits<double>::quiet_NaN();
    p.divergence_fraction = static_cast<double>(p.divergences) / static_cast<double>(p.runs);
    report.points.push_back(p);
  }
  return report;
}

inline std::string sweep_csv(const SweepReport& r) {
  std::ostringstream os;
  os << "swept_value,seed,fitted_c,diverged\n";
  for (const auto& row : r.rows)
    os << convbound::detail::fmt17(row.value) << ',' << row.seed << ',' << convbound::detail::fmt17(row.fitted_c)
       << ',' << (row.diverged ? 1 : 0) << '\n';
  return os.str();
}

inline json to_json(const SweepReport& r) {
  json j = {{"schema", "convbound.sweep_report/1"}, {"parameter", r.parameter}, {"lambda", r.lambda}};
  j["points"] = json::array();
  for (const auto& p : r.points)
    j["points"].push_back({{"swept_value", p.value},
                           {"runs", p.runs},
                           {"divergences", p.divergences},
                           {"divergence_fraction", p.divergence_fraction},
                           {"max_fitted_c", number(p.max_fitted_c)}});
  return j;
}

}  // namespace convbound::harness
