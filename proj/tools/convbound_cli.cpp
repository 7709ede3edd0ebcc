// Command-line front end: simulate, certify, fit, margins, sweep, validate.
//
// Exit codes: 0 success, 2 invalid configuration, 3 divergence, 1 other failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "convbound/harness/json_io.hpp"
#include "convbound/harness/scenario.hpp"
#include "convbound/harness/sweep.hpp"

namespace fs = std::filesystem;
using namespace convbound;
using namespace convbound::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitDiverged = 3;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string trace;
  double c = 1.0;
  std::vector<double> lambdas;
  std::string state_kind;
  std::string tau = "all";
  int theorem = 0;
  MarginInputs margins;
};

Scenario scenario_from(const Options& o) {
  if (o.config.empty()) throw ValidationError({"--config is required"});
  json j = read_json_file(o.config);
  if (o.seed && j.is_object()) j["seed"] = *o.seed;
  return load_scenario(j);
}

void print_violations(const std::vector<std::string>& v) {
  for (const auto& s : v) std::cerr << "  - " << s << '\n';
}

int cmd_validate(const Options& o) {
  if (o.config.empty()) throw ValidationError({"--config is required"});
  const json j = read_json_file(o.config);
  std::vector<std::string> errors;
  if (j.is_object() && j.value("schema", "") == kSweepSchema) {
    try {
      parse_sweep(j);
    } catch (const ValidationError& e) {
      errors = e.violations();
    }
  } else {
    errors = validate_scenario(j);
  }
  if (errors.empty()) {
    std::cout << o.config << ": ok\n";
    return kExitOk;
  }
  std::cerr << o.config << ": " << errors.size() << " violation(s)\n";
  print_violations(errors);
  return kExitInvalid;
}

int cmd_simulate(const Options& o) {
  const Scenario s = scenario_from(o);
  const ScenarioRun run = run_scenario(s);
  const fs::path out(o.out);
  write_file_atomic(out / "trace.csv", trace_csv(run.trace));
  if (run.trajectory) write_file_atomic(out / "theta.csv", trajectory_csv(*run.trajectory));
  write_file_atomic(out / "summary.json", summary_json(s, run).dump(2) + "\n");
  std::cout << "steps=" << run.trace.steps.size() << " diverged=" << (run.trace.diverged ? "yes" : "no");
  for (const auto& f : run.frontier) std::cout << " c(" << f.lambda << ")=" << f.c_min;
  std::cout << '\n';
  return run.trace.diverged ? kExitDiverged : kExitOk;
}

// Bound series from --trace CSV or from simulating --config.
struct SeriesSource {
  BoundSeries series;
  StateKind kind = StateKind::phi_z1;
  bool diverged = false;
  std::vector<double> lambdas;
};

SeriesSource series_from(const Options& o) {
  SeriesSource src;
  if (!o.trace.empty()) {
    std::ifstream is(o.trace);
    if (!is) throw ValidationError({"cannot open " + o.trace});
    src.kind = o.state_kind.empty() ? StateKind::phi_z1 : state_kind_from_string(o.state_kind);
    src.series = BoundSeries::from_table(read_trace_csv(is), src.kind);
    src.lambdas = o.lambdas;
    return src;
  }
  Scenario s = scenario_from(o);
  if (!o.state_kind.empty()) s.state_kind = state_kind_from_string(o.state_kind);
  s.lambda_grid = o.lambdas.empty() ? s.lambda_grid : o.lambdas;
  const ScenarioRun run = run_scenario(s);
  src.kind = s.state_kind;
  src.diverged = run.trace.diverged;
  src.series = BoundSeries::from_trace(run.trace, s.state_kind);
  src.lambdas = s.lambda_grid;
  return src;
}

int cmd_certify(const Options& o) {
  const SeriesSource src = series_from(o);
  if (src.lambdas.size() != 1) throw ValidationError({"certify needs exactly one --lambda"});
  const TauRange range = o.tau == "initial" ? TauRange::initial_only : TauRange::all;
  const BoundCertificate cert = check_convolution_bound(src.series, o.c, src.lambdas.front(), src.kind, range);
  write_file_atomic(fs::path(o.out) / "certificate.json", to_json(cert).dump(2) + "\n");
  std::cout << "verified=" << (cert.verified ? "true" : "false") << " max_slack=" << cert.max_slack << " worst_pair=("
            << cert.worst_pair.first << ", " << cert.worst_pair.second << ")\n";
  return src.diverged ? kExitDiverged : kExitOk;
}

int cmd_fit(const Options& o) {
  const SeriesSource src = series_from(o);
  if (src.diverged) {
    std::cerr << "trace diverged; no bound can be fitted\n";
    return kExitDiverged;
  }
  if (src.lambdas.empty()) throw ValidationError({"fit needs at least one --lambda"});
  const auto frontier = fit_gain_decay_frontier(src.series, src.lambdas);
  json j = {{"schema", "convbound.frontier/1"}, {"state_kind", to_string(src.kind)}, {"frontier", json::array()}};
  for (const auto& f : frontier) {
    j["frontier"].push_back(to_json(f));
    std::cout << "lambda=" << f.lambda << " c_min=" << f.c_min << '\n';
  }
  write_file_atomic(fs::path(o.out) / "frontier.json", j.dump(2) + "\n");
  return kExitOk;
}

int cmd_margins(Options o) {
  if (!o.config.empty()) {
    const json j = read_json_file(o.config);
    if (j.value("schema", "") != "convbound.margins/1")
      throw ValidationError({"margins.schema: expected 'convbound.margins/1'"});
    auto& m = o.margins;
    try {
      o.theorem = j.value("theorem", o.theorem);
      m.c = j.value("c", m.c);
      m.lambda = j.value("lambda", m.lambda);
      m.lambda1 = j.value("lambda1", m.lambda1);
      m.lambda2 = j.value("lambda2", m.lambda2);
      m.c0 = j.value("c0", m.c0);
      m.f_gain = j.value("f_gain", m.f_gain);
      m.s_norm = j.value("s_norm", m.s_norm);
      m.g_gain = j.value("g_gain", m.g_gain);
      m.beta = j.value("beta", m.beta);
      m.c1 = j.value("c1", m.c1);
    } catch (const json::exception& e) {
      throw ValidationError({std::string("margins: ") + e.what()});
    }
  }
  const auto& m = o.margins;
  json report = {{"schema", "convbound.margin_report/1"}, {"inputs", to_json(m)}};
  try {
    if (o.theorem == 0 || o.theorem == 1)
      report["thm1"] = to_json(thm1_margins(m.c, m.lambda, m.lambda1, m.c0, m.f_gain, m.s_norm));
    if (o.theorem == 0 || o.theorem == 2)
      report["thm2"] = to_json(thm2_margins(m.c, m.lambda, m.lambda1, m.c0, m.f_gain, m.s_norm));
    if (o.theorem == 0 || o.theorem == 3)
      report["thm3"] = to_json(thm3_analysis(m.c1, m.lambda1, m.beta, m.g_gain, m.lambda2));
  } catch (const ParameterError& e) {
    throw ValidationError({e.what()});
  }
  write_file_atomic(fs::path(o.out) / "margins.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  if (o.config.empty()) throw ValidationError({"--config is required"});
  json j = read_json_file(o.config);
  if (o.seed && j.is_object() && j.contains("scenario")) j["scenario"]["seed"] = *o.seed;
  const SweepSpec sw = parse_sweep(j);
  const SweepReport r = run_sweep(sw);
  write_file_atomic(fs::path(o.out) / "sweep.csv", sweep_csv(r));
  write_file_atomic(fs::path(o.out) / "sweep_summary.json", to_json(r).dump(2) + "\n");
  for (const auto& p : r.points)
    std::cout << sw.parameter << '=' << p.value << " divergence_fraction=" << p.divergence_fraction
              << " max_fitted_c=" << p.max_fitted_c << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate adaptive control loops and certify convolution bounds on their traces"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario/sweep/margins JSON");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "override the master seed");
  };
  auto bound_opts = [&](CLI::App* sub) {
    sub->add_option("--trace", o.trace, "trace CSV to analyse instead of simulating --config");
    sub->add_option("--lambda", o.lambdas, "decay rate(s)");
    sub->add_option("--state-kind", o.state_kind, "phi_z1 or phi_z1_m");
  };

  auto* simulate = app.add_subcommand("simulate", "run a scenario; writes trace.csv, theta.csv, summary.json");
  common(simulate);
  auto* certify = app.add_subcommand("certify", "check a (c, lambda) bound on a trace; writes certificate.json");
  common(certify);
  bound_opts(certify);
  certify->add_option("--c", o.c, "gain c >= 1")->required();
  certify->add_option("--tau", o.tau, "all or initial")->check(CLI::IsMember({"all", "initial"}));
  auto* fit = app.add_subcommand("fit", "minimal gain per lambda; writes frontier.json");
  common(fit);
  bound_opts(fit);
  auto* margins = app.add_subcommand("margins", "robustness margins; writes margins.json");
  common(margins);
  margins->add_option("--theorem", o.theorem, "1 (slow drift), 2 (jumps), 3 (unmodelled dynamics), 0 all");
  margins->add_option("--c", o.margins.c);
  margins->add_option("--lambda", o.margins.lambda);
  margins->add_option("--lambda1", o.margins.lambda1);
  margins->add_option("--lambda2", o.margins.lambda2);
  margins->add_option("--c0", o.margins.c0);
  margins->add_option("--f-gain", o.margins.f_gain);
  margins->add_option("--s-norm", o.margins.s_norm);
  margins->add_option("--g-gain", o.margins.g_gain);
  margins->add_option("--beta", o.margins.beta);
  margins->add_option("--c1", o.margins.c1);
  auto* sweep = app.add_subcommand("sweep", "parameter sweep; writes sweep.csv and sweep_summary.json");
  common(sweep);
  auto* validate = app.add_subcommand("validate", "list configuration violations");
  common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*certify) return cmd_certify(o);
    if (*fit) return cmd_fit(o);
    if (*margins) return cmd_margins(o);
    if (*sweep) return cmd_sweep(o);
    if (*validate) return cmd_validate(o);
  } catch (const ValidationError& e) {
    std::cerr << "invalid configuration\n";
    print_violations(e.violations());
    return kExitInvalid;
  } catch (const ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
