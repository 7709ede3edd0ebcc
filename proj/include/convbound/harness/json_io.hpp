#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "convbound/certificate.hpp"
#include "convbound/errors.hpp"
#include "convbound/margins.hpp"
#include "convbound/time_variation.hpp"
#include "convbound/umd.hpp"

namespace convbound::harness {

using nlohmann::json;

// Non-finite doubles become null; JSON has no inf/nan.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const BoundCertificate& c) {
  return {{"c", number(c.c)},
          {"lambda", c.lambda},
          {"state_kind", to_string(c.state_kind)},
          {"verified", c.verified},
          {"max_slack", number(c.max_slack)},
          {"worst_pair", {c.worst_pair.first, c.worst_pair.second}}};
}

inline json to_json(const GainFit& f) {
  return {{"lambda", f.lambda}, {"c_min", number(f.c_min)}, {"worst_pair", {f.worst_pair.first, f.worst_pair.second}}};
}

inline json to_json(const MembershipReport& m) {
  json j = {{"member", m.member},
            {"inside_set", m.inside_set},
            {"max_violation", number(m.max_violation)},
            {"worst_window", {m.window_begin, m.window_end}}};
  j["first_outside"] = m.first_outside ? json(*m.first_outside) : json(nullptr);
  return j;
}

inline json to_json(const UmdCheck& u) {
  return {{"ok", u.ok},
          {"first_violation", u.first_violation ? json(*u.first_violation) : json(nullptr)},
          {"state_consistent", u.state_consistent},
          {"first_state_mismatch", u.first_state_mismatch ? json(*u.first_state_mismatch) : json(nullptr)}};
}

struct MarginInputs {
  double c = 1.0;
  double lambda = 0.5;
  double lambda1 = 0.9;
  double lambda2 = 0.95;
  double c0 = 0.1;
  double f_gain = 1.0;
  double s_norm = 1.0;
  double g_gain = 1.0;
  double beta = 0.5;
  double c1 = 1.0;
};

inline json to_json(const SlowVariationMargins& m) {
  return {{"m", m.m}, {"epsilon", m.epsilon}, {"gamma3", m.gamma3}, {"n1", m.n1}, {"m_bound", m.m_bound}};
}

inline json to_json(const JumpMargins& m) {
  return {{"m", m.m},           {"lambda2", m.lambda2}, {"epsilon", m.epsilon}, {"lambda3", m.lambda3},
          {"n_bar", m.n_bar},   {"lambda4", m.lambda4}, {"gamma3", m.gamma3}};
}

inline json to_json(const UmdMargins& m) {
  return {{"mu_bar", m.mu_bar},
          {"spectral_radius", m.spectral_radius},
          {"gamma1", number(m.gamma1)},
          {"gamma1_horizon", m.gamma1_horizon},
          {"gamma1_tail", number(m.gamma1_tail)},
          {"c2", number(m.c2)}};
}

inline json to_json(const MarginInputs& in) {
  return {{"c", in.c},           {"lambda", in.lambda}, {"lambda1", in.lambda1}, {"lambda2", in.lambda2},
          {"c0", in.c0},         {"f_gain", in.f_gain}, {"s_norm", in.s_norm},   {"g_gain", in.g_gain},
          {"beta", in.beta},     {"c1", in.c1}};
}

/// Writes via a temporary sibling and a rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigurationError("cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw ConfigurationError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError({"cannot open " + path.string()});
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError({path.string() + ": " + e.what()});
  }
}

}  // namespace convbound::harness
