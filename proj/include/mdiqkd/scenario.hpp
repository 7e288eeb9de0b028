#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/photon_source.hpp"

namespace mdiqkd {

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("config: " + path + ": " + msg);
}

inline const json& get_field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) config_fail(path, "must be an object");
  auto it = j.find(key);
  if (it == j.end()) config_fail(path, std::string("missing field '") + key + "'");
  return *it;
}

inline double get_num(const json& j, const std::string& path, const char* key) {
  const json& f = get_field(j, path, key);
  if (!f.is_number()) config_fail(path + "." + key, "must be a number");
  return f.get<double>();
}

inline double get_num_or(const json& j, const std::string& path, const char* key,
                         double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_num(j, path, key);
}

inline int get_int(const json& j, const std::string& path, const char* key) {
  const json& f = get_field(j, path, key);
  if (!f.is_number_integer()) config_fail(path + "." + key, "must be an integer");
  return f.get<int>();
}

inline std::string get_str(const json& j, const std::string& path, const char* key) {
  const json& f = get_field(j, path, key);
  if (!f.is_string()) config_fail(path + "." + key, "must be a string");
  return f.get<std::string>();
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> known) {
  if (!j.is_object()) return;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) config_fail(path, "unknown field '" + it.key() + "'");
  }
}

}  // namespace detail

/// One party's source description from a config file.
struct SourceSpec {
  SourceFamily family = SourceFamily::coherent;
  std::array<double, 3> intensities = {0.01, 0.1, 0.5};  // v, d, s (parametric families)
  std::vector<std::vector<double>> probs;                // custom: rows v, d, s
  int n_max = 20;

  SourceTriple build() const {
    if (family != SourceFamily::custom)
      return make_family_triple(family, intensities[0], intensities[1], intensities[2],
                                n_max);
    return SourceTriple(make_custom(probs[0]), make_custom(probs[1]), make_custom(probs[2]));
  }
};

/// Sweep grid over the total channel loss, inclusive of both ends.
struct SweepRange {
  double loss_db_start = 0.0;
  double loss_db_end = 40.0;
  double loss_db_step = 1.0;

  int points() const {
    return int(std::floor((loss_db_end - loss_db_start) / loss_db_step + 1e-9)) + 1;
  }
  double at(int i) const { return loss_db_start + i * loss_db_step; }
};

/// A fully validated run description.
struct Scenario {
  SourceSpec alice;
  SourceSpec bob;
  ChannelParams channel;
  double f_ec = 1.16;
  SweepRange sweep;
  std::vector<BoundMethod> methods;
};

namespace detail {

inline SourceSpec parse_source(const json& j, const std::string& path) {
  SourceSpec spec;
  const std::string fam = get_str(j, path, "family");
  const auto family = source_family_from_string(fam);
  if (!family) config_fail(path + ".family", "unknown family '" + fam + "'");
  spec.family = *family;
  spec.n_max = get_int(j, path, "n_max");
  if (spec.n_max < 3) config_fail(path + ".n_max", "must be >= 3");

  if (spec.family == SourceFamily::custom) {
    reject_unknown(j, path, {"family", "probs", "n_max"});
    const json& p = get_field(j, path, "probs");
    if (!p.is_array() || p.size() != 3)
      config_fail(path + ".probs", "must be an array of the 3 rows v, d, s");
    for (size_t r = 0; r < 3; ++r) {
      const json& row = p[r];
      if (!row.is_array() || int(row.size()) != spec.n_max + 1)
        config_fail(path + ".probs", "each row must have n_max + 1 entries");
      std::vector<double> vals;
      for (const auto& v : row) {
        if (!v.is_number()) config_fail(path + ".probs", "entries must be numbers");
        vals.push_back(v.get<double>());
      }
      spec.probs.push_back(std::move(vals));
    }
  } else {
    reject_unknown(j, path, {"family", "intensities", "n_max"});
    const json& mu = get_field(j, path, "intensities");
    if (!mu.is_array() || mu.size() != 3)
      config_fail(path + ".intensities", "must be the array [mu_v, mu_d, mu_s]");
    for (size_t i = 0; i < 3; ++i) {
      if (!mu[i].is_number()) config_fail(path + ".intensities", "entries must be numbers");
      spec.intensities[i] = mu[i].get<double>();
    }
    if (!(spec.intensities[0] >= 0.0) || !(spec.intensities[0] < spec.intensities[1]) ||
        !(spec.intensities[1] < spec.intensities[2]))
      config_fail(path + ".intensities", "need 0 <= mu_v < mu_d < mu_s");
  }
  return spec;
}

}  // namespace detail

/// Parses and validates a scenario document. Throws std::invalid_argument
/// with a field path on any structural or semantic problem.
inline Scenario parse_scenario(const nlohmann::json& j) {
  using detail::config_fail;
  detail::reject_unknown(j, "$",
                         {"version", "alice", "bob", "channel", "f_ec", "sweep", "methods"});

  if (detail::get_int(j, "$", "version") != 1) config_fail("$.version", "must be 1");

  Scenario sc;
  sc.alice = detail::parse_source(detail::get_field(j, "$", "alice"), "$.alice");
  sc.bob = detail::parse_source(detail::get_field(j, "$", "bob"), "$.bob");
  if (sc.alice.n_max != sc.bob.n_max)
    config_fail("$.bob.n_max", "alice and bob must share n_max");

  if (j.contains("channel")) {
    const nlohmann::json& ch = j["channel"];
    detail::reject_unknown(ch, "$.channel", {"total_loss_db", "zeta", "p_d", "e_d", "e_0"});
    sc.channel.total_loss_db =
        detail::get_num_or(ch, "$.channel", "total_loss_db", sc.channel.total_loss_db);
    sc.channel.zeta = detail::get_num_or(ch, "$.channel", "zeta", sc.channel.zeta);
    sc.channel.p_d = detail::get_num_or(ch, "$.channel", "p_d", sc.channel.p_d);
    sc.channel.e_d = detail::get_num_or(ch, "$.channel", "e_d", sc.channel.e_d);
    sc.channel.e_0 = detail::get_num_or(ch, "$.channel", "e_0", sc.channel.e_0);
  }
  try {
    sc.channel.validate();
  } catch (const std::exception& e) {
    config_fail("$.channel", e.what());
  }

  sc.f_ec = detail::get_num_or(j, "$", "f_ec", 1.16);
  if (!(sc.f_ec >= 1.0)) config_fail("$.f_ec", "must be >= 1");

  const nlohmann::json& sw = detail::get_field(j, "$", "sweep");
  detail::reject_unknown(sw, "$.sweep", {"loss_db_start", "loss_db_end", "loss_db_step"});
  sc.sweep.loss_db_start = detail::get_num(sw, "$.sweep", "loss_db_start");
  sc.sweep.loss_db_end = detail::get_num(sw, "$.sweep", "loss_db_end");
  sc.sweep.loss_db_step = detail::get_num(sw, "$.sweep", "loss_db_step");
  if (!(sc.sweep.loss_db_step > 0.0)) config_fail("$.sweep.loss_db_step", "must be > 0");
  if (!(sc.sweep.loss_db_start >= 0.0)) config_fail("$.sweep.loss_db_start", "must be >= 0");
  if (!(sc.sweep.loss_db_start <= sc.sweep.loss_db_end))
    config_fail("$.sweep", "need loss_db_start <= loss_db_end");

  const nlohmann::json& me = detail::get_field(j, "$", "methods");
  if (!me.is_array() || me.empty()) config_fail("$.methods", "must be a nonempty array");
  std::set<std::string> requested;
  for (const auto& m : me) {
    if (!m.is_string()) config_fail("$.methods", "entries must be strings");
    const std::string name = m.get<std::string>();
    if (!bound_method_from_string(name))
      config_fail("$.methods", "unknown method '" + name + "'");
    requested.insert(name);
  }
  // Canonical column order regardless of the order methods were listed in.
  for (BoundMethod m : kAllMethods)
    if (requested.count(to_string(m))) sc.methods.push_back(m);
  return sc;
}

/// Fixed JSON schema for one basis' observables:
///   {"basis": "Z"|"X", "gains": [[3x3]], "error_rates": [[3x3]]}
/// with row/column order v, d, s.
inline ObservedStatistics observed_statistics_from_json(const nlohmann::json& j) {
  using detail::config_fail;
  detail::reject_unknown(j, "$", {"basis", "gains", "error_rates"});
  const std::string basis = detail::get_str(j, "$", "basis");
  if (basis != "Z" && basis != "X") config_fail("$.basis", "must be \"Z\" or \"X\"");

  auto read_mat = [&](const char* key) {
    const nlohmann::json& m = detail::get_field(j, "$", key);
    Mat3 out{};
    if (!m.is_array() || m.size() != 3)
      config_fail(std::string("$.") + key, "must be a 3x3 array (rows v, d, s)");
    for (size_t r = 0; r < 3; ++r) {
      if (!m[r].is_array() || m[r].size() != 3)
        config_fail(std::string("$.") + key, "must be a 3x3 array (rows v, d, s)");
      for (size_t c = 0; c < 3; ++c) {
        if (!m[r][c].is_number())
          config_fail(std::string("$.") + key, "entries must be numbers");
        out[r][c] = m[r][c].get<double>();
      }
    }
    return out;
  };

  try {
    return ObservedStatistics(basis == "Z" ? Basis::Z : Basis::X, read_mat("gains"),
                              read_mat("error_rates"));
  } catch (const std::exception& e) {
    config_fail("$", e.what());
  }
}

inline nlohmann::json observed_statistics_to_json(const ObservedStatistics& stats) {
  nlohmann::json j;
  j["basis"] = to_string(stats.basis);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      j["gains"][r][c] = stats.gains[r][c];
      j["error_rates"][r][c] = stats.error_rates[r][c];
    }
  return j;
}

/// Loads a scenario from a JSON file; parse errors carry the byte position
/// reported by the JSON parser.
inline Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("config: cannot open '" + file + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config: " + file + ": " + e.what());
  }
  return parse_scenario(j);
}

}  // namespace mdiqkd
