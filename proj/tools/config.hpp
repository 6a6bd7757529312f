#pragma once

// Flat key-value experiment config shared by the CLI subcommands.
//
// Resolution order: per-subcommand defaults, then the --config JSON file, then flags.
// Keys a subcommand does not know are rejected, whichever source they come from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace gvcli {

using nlohmann::json;
using nlohmann::ordered_json;

/// Field-level validation failure; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what) : std::runtime_error(key + ": " + what) {}
};

enum class KeyType { uint, real, text, real_list, boolean };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* help;
};

inline const std::vector<KeySpec>& all_keys() {
  static const std::vector<KeySpec> keys{
      {"generator", KeyType::text, "weight source: zipf | uniform | list | csv"},
      {"s", KeyType::real, "Zipf exponent"},
      {"n", KeyType::uint, "number of nodes for zipf/uniform"},
      {"weights", KeyType::real_list, "explicit weights, comma separated (normalized)"},
      {"weights_file", KeyType::text, "CSV file with a 'weight' column"},
      {"f", KeyType::text, "sampling weight function: id | one | power:<a>"},
      {"g", KeyType::text, "averaging weight function: id | one | power:<a>"},
      {"k", KeyType::uint, "number of distinct nodes per sample"},
      {"node", KeyType::uint, "target node, 1-based (default: heaviest)"},
      {"fractions", KeyType::real_list, "split fractions, comma separated"},
      {"r", KeyType::uint, "equal split into r parts (alternative to fractions)"},
      {"n_runs", KeyType::uint, "Monte Carlo runs"},
      {"seed", KeyType::uint, "master seed"},
      {"coupled", KeyType::boolean, "use the coupled estimator (identity f only)"},
      {"method", KeyType::text, "voting power method: mc | exact | k2"},
      {"axis", KeyType::text, "sweep axis: network_size | sample_k | split_r | zipf_s"},
      {"axis_values", KeyType::real_list, "strictly increasing axis values"},
      {"epsilon", KeyType::real, "truncation tolerance for exact voting power"},
      {"v_max", KeyType::uint, "largest v in exact tables"},
      {"table", KeyType::text, "exact table: v | joint | u"},
      {"bandwidth", KeyType::real, "KDE bandwidth (default: Silverman)"},
      {"grid_points", KeyType::uint, "KDE grid size"},
      {"samples_file", KeyType::text, "read samples from this CSV instead of simulating"},
      {"theta", KeyType::real, "FPC first-round threshold"},
      {"beta", KeyType::real, "FPC threshold range parameter"},
      {"max_rounds", KeyType::uint, "FPC round limit"},
      {"finality_l", KeyType::uint, "FPC unanimous rounds needed to finalize"},
      {"initial_ones", KeyType::real, "FPC fraction of nodes starting with opinion 1"},
      {"p", KeyType::real, "tau: node probability"},
      {"output_path", KeyType::text, "output file (stdout when omitted)"},
  };
  return keys;
}

inline const KeySpec& key_spec(const std::string& name) {
  for (const auto& k : all_keys())
    if (name == k.name) return k;
  throw ConfigError(name, "unknown key");
}

/// Defaults per subcommand. A null default means "optional, resolved at run time".
inline ordered_json subcommand_defaults(const std::string& sub) {
  const json null;
  const ordered_json weights_zipf{{"generator", "zipf"}, {"s", 1.1}, {"n", 1000}, {"weights", null}, {"weights_file", null}};
  const ordered_json weights_list{{"generator", "list"}, {"s", null}, {"n", null}, {"weights", null}, {"weights_file", null}};
  ordered_json d;
  auto add = [&](const ordered_json& more) {
    for (auto it = more.begin(); it != more.end(); ++it) d[it.key()] = it.value();
  };
  const ordered_json gain_keys{{"f", "id"}, {"k", 20}, {"node", null}, {"fractions", {0.5, 0.5}}, {"r", null},
                               {"n_runs", 100000}, {"seed", 1}, {"coupled", true}};
  if (sub == "exact") {
    add(weights_list);
    add({{"f", "id"}, {"k", 2}, {"node", 1}, {"table", "v"}, {"v_max", 30}});
  } else if (sub == "sample") {
    add(weights_list);
    add({{"f", "id"}, {"k", 2}, {"n_runs", 10}, {"seed", 1}});
  } else if (sub == "power") {
    add(weights_list);
    add({{"f", "id"}, {"k", 2}, {"node", null}, {"method", "mc"}, {"n_runs", 100000}, {"seed", 1}, {"epsilon", 1e-9}});
  } else if (sub == "gain") {
    add(weights_zipf);
    add(gain_keys);
  } else if (sub == "sweep") {
    add({{"s", 1.1}, {"n", 1000}});
    add(gain_keys);
    add({{"axis", "network_size"}, {"axis_values", null}});
  } else if (sub == "kde" || sub == "qq") {
    add(weights_zipf);
    add(gain_keys);
    add({{"samples_file", null}});
    if (sub == "kde") add({{"bandwidth", null}, {"grid_points", 512}});
  } else if (sub == "fpc") {
    add({{"generator", "uniform"}, {"s", null}, {"n", 100}, {"weights", null}, {"weights_file", null}});
    add({{"f", "id"}, {"g", "one"}, {"k", 20}, {"theta", 0.5}, {"beta", 0.3}, {"max_rounds", 100}, {"finality_l", 2},
         {"initial_ones", 0.9}, {"seed", 1}});
  } else if (sub == "tau") {
    add({{"p", null}, {"r", null}});
  } else {
    throw ConfigError("subcommand", "unknown subcommand '" + sub + "'");
  }
  d["output_path"] = null;
  return d;
}

/// Parses a flag string into the JSON value for `spec`.
inline json parse_flag(const KeySpec& spec, const std::string& text) {
  auto parse_real = [&](const std::string& cell) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw ConfigError(spec.name, "cannot parse '" + cell + "' as a number");
    return x;
  };
  switch (spec.type) {
    case KeyType::uint: {
      if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError(spec.name, "expected a non-negative integer, got '" + text + "'");
      try {
        return json(std::stoull(text));
      } catch (const std::exception&) {
        throw ConfigError(spec.name, "integer out of range");
      }
    }
    case KeyType::real:
      return json(parse_real(text));
    case KeyType::text:
      return json(text);
    case KeyType::boolean:
      if (text == "true" || text == "1" || text == "yes") return json(true);
      if (text == "false" || text == "0" || text == "no") return json(false);
      throw ConfigError(spec.name, "expected true or false, got '" + text + "'");
    case KeyType::real_list: {
      json arr = json::array();
      std::stringstream ss(text);
      std::string cell;
      while (std::getline(ss, cell, ',')) arr.push_back(parse_real(cell));
      if (arr.empty()) throw ConfigError(spec.name, "expected a comma-separated list of numbers");
      return arr;
    }
  }
  return json(text);
}

/// Checks that a JSON value has the type `spec` demands. Integral floats such as 1e5 are accepted as integers.
inline json check_type(const KeySpec& spec, const json& v) {
  if (v.is_null()) return v;
  switch (spec.type) {
    case KeyType::uint:
      if (v.is_number_float()) {
        const double x = v.get<double>();
        if (x >= 0.0 && x < 9.0e15 && x == std::floor(x)) return json(static_cast<std::uint64_t>(x));
      }
      if (!v.is_number_unsigned()) throw ConfigError(spec.name, "expected a non-negative integer");
      return v;
    case KeyType::real:
      if (!v.is_number() || !std::isfinite(v.get<double>())) throw ConfigError(spec.name, "expected a finite number");
      return json(v.get<double>());
    case KeyType::text:
      if (!v.is_string()) throw ConfigError(spec.name, "expected a string");
      return v;
    case KeyType::boolean:
      if (!v.is_boolean()) throw ConfigError(spec.name, "expected true or false");
      return v;
    case KeyType::real_list:
      if (!v.is_array() || v.empty()) throw ConfigError(spec.name, "expected a non-empty array of numbers");
      for (const auto& x : v)
        if (!x.is_number()) throw ConfigError(spec.name, "expected a non-empty array of numbers");
      return json(v.get<std::vector<double>>());
  }
  return v;
}

/// Resolved config for one subcommand; getters report the offending key on failure.
class Config {
 public:
  Config(std::string sub, ordered_json values) : sub_(std::move(sub)), values_(std::move(values)) {}

  const std::string& subcommand() const { return sub_; }
  bool has(const std::string& key) const { return values_.contains(key) && !values_.at(key).is_null(); }

  std::uint64_t uint(const std::string& key) const { return need(key).get<std::uint64_t>(); }
  double real(const std::string& key) const { return need(key).get<double>(); }
  std::string text(const std::string& key) const { return need(key).get<std::string>(); }
  bool boolean(const std::string& key) const { return need(key).get<bool>(); }
  std::vector<double> real_list(const std::string& key) const { return need(key).get<std::vector<double>>(); }

  void set(const std::string& key, json v) { values_[key] = std::move(v); }

  /// The document written to sidecars: subcommand first, then every resolved key.
  ordered_json document() const {
    ordered_json out;
    out["subcommand"] = sub_;
    for (auto it = values_.begin(); it != values_.end(); ++it) out[it.key()] = it.value();
    return out;
  }

 private:
  const ordered_json& need(const std::string& key) const {
    if (!has(key)) throw ConfigError(key, "required but not set");
    return values_.at(key);
  }

  std::string sub_;
  ordered_json values_;
};

/// Merges defaults, the optional config file document and flag values (already typed).
inline Config resolve_config(const std::string& sub, const std::optional<json>& file, const std::map<std::string, json>& flags) {
  ordered_json values = subcommand_defaults(sub);
  auto apply = [&](const std::string& key, const json& v) {
    const auto& spec = key_spec(key);
    if (!values.contains(key)) throw ConfigError(key, "not accepted by subcommand '" + sub + "'");
    values[key] = check_type(spec, v);
  };
  if (file) {
    if (!file->is_object()) throw ConfigError("config", "top level must be a JSON object");
    for (auto it = file->begin(); it != file->end(); ++it) {
      if (it.key() == "subcommand") {
        if (!it.value().is_string() || it.value().get<std::string>() != sub)
          throw ConfigError("subcommand", "config file is for a different subcommand");
        continue;
      }
      if (it.key() == "threads") continue;  // execution setting, handled by the caller
      apply(it.key(), it.value());
    }
  }
  std::map<std::string, bool> explicit_keys;
  if (file)
    for (auto it = file->begin(); it != file->end(); ++it) explicit_keys[it.key()] = !it.value().is_null();
  for (const auto& [key, v] : flags) {
    apply(key, v);
    explicit_keys[key] = true;
  }

  // Weight source: explicit weights or a file imply the matching generator; keys that do
  // not belong to the chosen generator are errors when given and dropped when defaulted.
  if (values.contains("generator")) {
    const bool gen_given = explicit_keys["generator"];
    if (!gen_given && explicit_keys["weights"]) values["generator"] = "list";
    if (!gen_given && explicit_keys["weights_file"]) values["generator"] = "csv";
    const std::string gen = values["generator"].get<std::string>();
    std::vector<std::string> used;
    if (gen == "zipf")
      used = {"s", "n"};
    else if (gen == "uniform")
      used = {"n"};
    else if (gen == "list")
      used = {"weights"};
    else if (gen == "csv")
      used = {"weights_file"};
    else
      throw ConfigError("generator", "expected zipf, uniform, list or csv, got '" + gen + "'");
    for (const char* key : {"s", "n", "weights", "weights_file"}) {
      const bool wanted = std::find(used.begin(), used.end(), key) != used.end();
      if (wanted) {
        if (values[key].is_null()) throw ConfigError(key, "required by generator '" + gen + "'");
      } else {
        if (explicit_keys[key]) throw ConfigError(key, "not used by generator '" + gen + "'");
        values[key] = nullptr;
      }
    }
  }
  // An equal split arity replaces the default fractions.
  if (values.contains("r") && values.contains("fractions") && explicit_keys["r"]) {
    if (explicit_keys["fractions"]) throw ConfigError("r", "give either r or fractions, not both");
    values["fractions"] = nullptr;
  } else if (values.contains("r") && values.contains("fractions")) {
    values.erase("r");
  }
  return Config(sub, std::move(values));
}

}  // namespace gvcli
