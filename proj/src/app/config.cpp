#include "ordev/app/config.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

namespace ordev::app {

using nlohmann::json;

namespace {

const char* kModes[] = {"summarize", "deps", "optimize-delta", "optimize-cv", "guard"};

Rational rational_of(const json& v, const std::string& field) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long>());
  } catch (const std::invalid_argument&) {
  }
  // floats are refused on purpose: 0.1 has no exact binary value
  throw ConfigError(field + ": expected a rational as a string (\"0.01\", \"2/3\") or an integer");
}

std::map<std::string, Rational> rational_map(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field + ": expected an object");
  std::map<std::string, Rational> out;
  for (const auto& [k, v] : j.items()) out[k] = rational_of(v, field + "." + k);
  return out;
}

json rational_map_json(const std::map<std::string, Rational>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = ordev::to_string(v);
  return out;
}

model::Control control_of(const json& j) {
  if (!j.is_object() || !j.contains("name") || !j.contains("current"))
    throw ConfigError("controls: each entry needs name and current");
  model::Control c;
  c.name = j.at("name").get<std::string>();
  c.current = rational_of(j.at("current"), "controls." + c.name + ".current");
  for (const auto& [k, v] : j.items()) {
    if (k == "name" || k == "current") continue;
    if (k == "keys") {
      c.keys = v.get<std::vector<std::string>>();
    } else if (k == "direction") {
      auto d = v.get<std::string>();
      if (d != "up" && d != "down") throw ConfigError("controls." + c.name + ".direction: up or down");
      c.direction = d == "up" ? model::Direction::Up : model::Direction::Down;
    } else if (k == "max") {
      c.max = rational_of(v, "controls." + c.name + ".max");
    } else {
      throw ConfigError("controls." + c.name + ": unknown key '" + k + "'");
    }
  }
  return c;
}

double seconds_of(const json& v, const std::string& field) {
  if (!v.is_number() || v.get<double>() <= 0) throw ConfigError(field + ": expected a positive number of seconds");
  return v.get<double>();
}

}  // namespace

const char* to_string(Mode m) { return kModes[static_cast<int>(m)]; }

Mode parse_mode(const std::string& s) {
  for (int i = 0; i < 5; ++i)
    if (s == kModes[i]) return static_cast<Mode>(i);
  throw ConfigError("unknown mode '" + s + "'");
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "text") return Format::Text;
  if (s == "smt2" || s == "smt2-dump") return Format::Smt2;
  throw ConfigError("unknown output format '" + s + "'");
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected NAME=VALUE, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

void RunConfig::validate() const {
  if (input.empty()) throw ConfigError("no input file");
  if (price_model()) {
    if (model.tolerance.empty()) throw ConfigError("price_checks need a tolerance control");
  } else if (entry.empty()) {
    throw ConfigError("no entry function");
  }
  if (step <= 0) throw ConfigError("step must be positive");
  if (max_delta < 0) throw ConfigError("max_delta must not be negative");
  std::set<std::string> names;
  for (const auto& c : model.controls)
    if (!names.insert(c.name).second) throw ConfigError("control '" + c.name + "' given twice");
  auto known = [&](const std::map<std::string, Rational>& m, const char* what) {
    for (const auto& [k, v] : m)
      if (!names.count(k)) throw ConfigError(std::string(what) + ": no control named '" + k + "'");
  };
  known(targets, "targets");
  known(fixed, "fixed");
  if (mode == Mode::OptimizeCv) {
    if (!delta) throw ConfigError("optimize-cv needs a deviation (--delta)");
    if (*delta < 0) throw ConfigError("delta must not be negative");
    if (search.empty()) {
      if (model.controls.size() != 1) throw ConfigError("optimize-cv needs --search when there is not exactly one control");
    } else if (!names.count(search)) {
      throw ConfigError("search: no control named '" + search + "'");
    }
  }
  if ((mode == Mode::OptimizeDelta || mode == Mode::Guard) && model.controls.empty())
    throw ConfigError(std::string(to_string(mode)) + " needs at least one control");
}

RunConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "file" || k == "input") {
        c.input = v.get<std::string>();
        if (!base_dir.empty() && std::filesystem::path(c.input).is_relative())
          c.input = (std::filesystem::path(base_dir) / c.input).string();
      } else if (k == "entry") {
        c.entry = v.get<std::string>();
      } else if (k == "mode") {
        c.mode = parse_mode(v.get<std::string>());
      } else if (k == "format") {
        c.format = parse_format(v.get<std::string>());
      } else if (k == "bounds") {
        for (const auto& [b, n] : v.items()) {
          if (!n.is_number_integer() || n.get<int>() < 0) throw ConfigError("bounds." + b + ": expected a count");
          c.model.bounds[b] = n.get<int>();
        }
      } else if (k == "controls") {
        for (const auto& x : v) c.model.controls.push_back(control_of(x));
      } else if (k == "pins") {
        c.model.pins = rational_map(v, k);
      } else if (k == "delta_overrides") {
        c.model.delta_overrides = rational_map(v, k);
      } else if (k == "tolerance") {
        c.model.tolerance = v.get<std::string>();
      } else if (k == "price_checks") {
        for (const auto& x : v) {
          PriceEntry p;
          p.entry = x.at("entry").get<std::string>();
          auto side = x.at("side").get<std::string>();
          if (side != "floor" && side != "ceil") throw ConfigError("price_checks.side: floor or ceil");
          p.floor = side == "floor";
          c.price_entries.push_back(p);
        }
      } else if (k == "current") {
        // handled after controls are known
      } else if (k == "delta") {
        c.delta = rational_of(v, k);
      } else if (k == "search") {
        c.search = v.get<std::string>();
      } else if (k == "fixed") {
        c.fixed = rational_map(v, k);
      } else if (k == "targets") {
        c.targets = rational_map(v, k);
      } else if (k == "step") {
        c.step = rational_of(v, k);
      } else if (k == "max_delta") {
        c.max_delta = rational_of(v, k);
      } else if (k == "bisect") {
        c.bisect = v.get<bool>();
      } else if (k == "timeout") {
        c.timeout = seconds_of(v, k);
      } else if (k == "query_timeout") {
        c.query_timeout = seconds_of(v, k);
      } else if (k == "solver") {
        c.solver = v.get<std::string>();
      } else if (k == "dump_dir") {
        c.dump_dir = v.get<std::string>();
      } else if (k == "reference") {
        c.reference = v.get<std::string>();
      } else if (k == "tol_num") {
        c.tol_num = v.get<std::string>();
      } else if (k == "tol_den") {
        c.tol_den = v.get<std::string>();
      } else if (k == "stats_excluded") {
        c.stats_excluded = v.get<std::vector<std::string>>();
      } else if (k == "timings") {
        c.timings = v.get<bool>();
      } else {
        throw ConfigError("unknown config key '" + k + "'");
      }
    }
    if (j.contains("current")) {
      for (const auto& [name, v] : rational_map(j.at("current"), "current")) {
        auto it = std::find_if(c.model.controls.begin(), c.model.controls.end(),
                               [&](const model::Control& x) { return x.name == name; });
        if (it == c.model.controls.end()) throw ConfigError("current: no control named '" + name + "'");
        it->current = v;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["file"] = c.input;
  if (!c.entry.empty()) j["entry"] = c.entry;
  j["mode"] = to_string(c.mode);
  if (!c.model.bounds.empty()) j["bounds"] = c.model.bounds;
  json ctl = json::array();
  for (const auto& x : c.model.controls) {
    json e = {{"name", x.name}, {"current", ordev::to_string(x.current)}, {"direction", x.direction == model::Direction::Up ? "up" : "down"}};
    if (!x.keys.empty()) e["keys"] = x.keys;
    if (x.max) e["max"] = ordev::to_string(*x.max);
    ctl.push_back(e);
  }
  j["controls"] = ctl;
  if (!c.model.pins.empty()) j["pins"] = rational_map_json(c.model.pins);
  if (!c.model.delta_overrides.empty()) j["delta_overrides"] = rational_map_json(c.model.delta_overrides);
  if (!c.model.tolerance.empty()) j["tolerance"] = c.model.tolerance;
  if (c.price_model()) {
    json pc = json::array();
    for (const auto& p : c.price_entries) pc.push_back({{"entry", p.entry}, {"side", p.floor ? "floor" : "ceil"}});
    j["price_checks"] = pc;
  }
  if (c.delta) j["delta"] = ordev::to_string(*c.delta);
  if (!c.search.empty()) j["search"] = c.search;
  if (!c.fixed.empty()) j["fixed"] = rational_map_json(c.fixed);
  if (!c.targets.empty()) j["targets"] = rational_map_json(c.targets);
  j["step"] = ordev::to_string(c.step);
  j["max_delta"] = ordev::to_string(c.max_delta);
  if (c.bisect) j["bisect"] = true;
  if (!c.stats_excluded.empty()) j["stats_excluded"] = c.stats_excluded;
  j["timeout"] = c.timeout;
  j["query_timeout"] = c.query_timeout;
  return j;
}

}  // namespace ordev::app
