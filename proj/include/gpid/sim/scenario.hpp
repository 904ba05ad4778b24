#pragma once

// Scenario files (YAML with units in key names), strict key checking, and
// command-line overrides.

#include <yaml-cpp/yaml.h>

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gpid/lie.hpp"

namespace gpid::sim {

/// Any problem with a scenario file or override; maps to exit code 2.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

struct SimConfig {
  double h_plant = 0.001;
  double h_control = 0.020;
  double t_final = 0.0;
  double renorm_threshold = 1e-9;
  long steps_per_control = 20;
  long control_ticks = 0;
};

/// Typed access to one YAML map. Every key read is recorded so that
/// unconsumed (unknown) keys can be reported after parsing.
class Reader {
 public:
  Reader(YAML::Node node, std::string path, std::shared_ptr<std::set<std::string>> used)
      : node_(std::move(node)), path_(std::move(path)), used_(std::move(used)) {
    if (!node_.IsMap()) throw ScenarioError(where() + " must be a map");
    used_->insert(path_);
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  double num(const std::string& key) const { return as_num(get(key), key); }
  double num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

  std::string str(const std::string& key) const {
    const YAML::Node n = get(key);
    if (!n.IsScalar()) throw ScenarioError(full(key) + " must be a string");
    return n.as<std::string>();
  }
  std::string str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    try {
      return get(key).as<bool>();
    } catch (const YAML::Exception&) {
      throw ScenarioError(full(key) + " must be true or false");
    }
  }

  std::vector<double> list(const std::string& key, std::size_t n = 0) const {
    const YAML::Node l = get(key);
    if (!l.IsSequence()) throw ScenarioError(full(key) + " must be a list");
    if (n != 0 && l.size() != n) {
      throw ScenarioError(full(key) + " must have " + std::to_string(n) + " entries");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < l.size(); ++i) out.push_back(as_num(l[i], key + "[" + std::to_string(i) + "]"));
    return out;
  }

  Vec3 vec3(const std::string& key) const {
    const auto v = list(key, 3);
    return {v[0], v[1], v[2]};
  }
  Vec3 vec3(const std::string& key, const Vec3& def) const { return has(key) ? vec3(key) : def; }

  /// Number or the string "auto" (returned as nullopt).
  std::optional<double> num_or_auto(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const YAML::Node n = get(key);
    if (n.IsScalar() && n.Scalar() == "auto") return std::nullopt;
    return as_num(n, key);
  }

  Reader child(const std::string& key) const { return Reader(get(key), full(key), used_); }
  std::optional<Reader> child_opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return child(key);
  }

 private:
  std::string where() const { return path_.empty() ? "scenario root" : "'" + path_ + "'"; }
  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node get(const std::string& key) const {
    const YAML::Node n = node_[key];
    if (!n) throw ScenarioError("missing required key '" + full(key) + "'");
    used_->insert(full(key));
    return n;
  }

  double as_num(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) throw ScenarioError(full(key) + " must be a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) throw ScenarioError(full(key) + " must be finite");
      return v;
    } catch (const YAML::Exception&) {
      throw ScenarioError(full(key) + " must be a number, got '" + n.Scalar() + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  std::shared_ptr<std::set<std::string>> used_;
};

inline void collect_unused(const YAML::Node& n, const std::string& path, const std::set<std::string>& used,
                           std::vector<std::string>& out) {
  if (!n.IsMap()) return;
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    const std::string p = path.empty() ? key : path + "." + key;
    if (!used.count(p)) {
      out.push_back(p);
    } else {
      collect_unused(kv.second, p, used, out);
    }
  }
}

struct Override {
  std::string filter;  ///< system id or scenario name; empty applies everywhere
  std::string key;     ///< dotted path
  std::string value;   ///< YAML scalar or flow sequence
};

/// Parses "key=value" or "filter:key=value".
inline Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ScenarioError("override '" + text + "' is not of the form key=value");
  std::string lhs = text.substr(0, eq);
  Override o;
  o.value = text.substr(eq + 1);
  const auto colon = lhs.find(':');
  if (colon != std::string::npos) {
    o.filter = lhs.substr(0, colon);
    lhs = lhs.substr(colon + 1);
  }
  o.key = lhs;
  if (o.key.empty()) throw ScenarioError("override '" + text + "' has an empty key");
  return o;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

/// Replaces an existing key; the full dotted path must already exist.
inline void apply_override(YAML::Node& root, const Override& o) {
  const auto parts = split(o.key, '.');
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    YAML::Node cur = chain.back();
    if (!cur.IsMap() || !cur[parts[i]]) throw ScenarioError("override key '" + o.key + "' does not exist in the scenario");
    chain.push_back(cur[parts[i]]);
  }
  YAML::Node value;
  try {
    value = YAML::Load(o.value);
  } catch (const YAML::Exception& e) {
    throw ScenarioError("override value '" + o.value + "' is not valid: " + e.what());
  }
  chain[chain.size() - 2][parts.back()] = value;
}

struct Scenario {
  std::string path;
  std::string name;
  std::string system;
  std::string description;
  YAML::Node root;
  SimConfig sim;
  std::vector<std::string> warnings;
  std::shared_ptr<std::set<std::string>> used = std::make_shared<std::set<std::string>>();

  Reader reader() const { return Reader(root, "", used); }

  /// Fails on any key that no parser consumed.
  void check_unknown_keys() const {
    std::vector<std::string> bad;
    collect_unused(root, "", *used, bad);
    if (!bad.empty()) {
      std::string msg = "unknown key(s) in " + path + ":";
      for (const auto& b : bad) msg += " " + b;
      throw ScenarioError(msg);
    }
  }
};

inline std::string stem_of(const std::string& path) {
  auto slash = path.find_last_of('/');
  std::string f = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = f.find_last_of('.');
  return dot == std::string::npos ? f : f.substr(0, dot);
}

inline SimConfig parse_sim(const Reader& r) {
  SimConfig c;
  c.h_plant = r.num("h_plant_s", c.h_plant);
  c.h_control = r.num("h_control_s", c.h_control);
  c.t_final = r.num("t_final_s");
  c.renorm_threshold = r.num("renorm_threshold", c.renorm_threshold);
  if (!(c.h_plant > 0.0) || !(c.h_control > 0.0) || !(c.t_final > 0.0)) {
    throw ScenarioError("sim: h_plant_s, h_control_s and t_final_s must be positive");
  }
  const double ratio = c.h_control / c.h_plant;
  c.steps_per_control = std::lround(ratio);
  if (c.steps_per_control < 1 || std::abs(ratio - static_cast<double>(c.steps_per_control)) > 1e-9 * ratio) {
    throw ScenarioError("sim: h_control_s must be an integer multiple of h_plant_s");
  }
  const double ticks = c.t_final / c.h_control;
  c.control_ticks = std::lround(ticks);
  if (std::abs(ticks - static_cast<double>(c.control_ticks)) > 1e-9 * ticks) {
    throw ScenarioError("sim: t_final_s must be an integer multiple of h_control_s");
  }
  if (!(c.renorm_threshold > 0.0)) throw ScenarioError("sim: renorm_threshold must be positive");
  return c;
}

/// Loads a scenario and applies overrides whose filter is empty or matches
/// the system id or scenario name. Filtered overrides are validated only
/// where they apply.
inline Scenario load_scenario(const std::string& path, const std::vector<Override>& overrides = {}) {
  Scenario sc;
  sc.path = path;
  try {
    sc.root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ScenarioError("cannot open scenario file '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw ScenarioError("cannot parse '" + path + "': " + e.what());
  }
  if (!sc.root.IsMap()) throw ScenarioError("scenario '" + path + "' must be a map");
  if (!sc.root["system"]) throw ScenarioError("scenario '" + path + "' has no 'system' key");
  const std::string system = sc.root["system"].as<std::string>();
  const std::string name = sc.root["name"] ? sc.root["name"].as<std::string>() : stem_of(path);
  for (const auto& o : overrides) {
    if (o.filter.empty() || o.filter == system || o.filter == name) apply_override(sc.root, o);
  }
  const Reader r = sc.reader();
  sc.system = r.str("system");
  sc.name = r.str("name", stem_of(path));
  sc.description = r.str("description", "");
  sc.sim = parse_sim(r.child("sim"));
  return sc;
}

}  // namespace gpid::sim
