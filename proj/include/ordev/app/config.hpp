#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordev/model/model.hpp"

namespace ordev::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Summarize, Deps, OptimizeDelta, OptimizeCv, Guard };
enum class Format { Json, Text, Smt2 };

const char* to_string(Mode m);
Mode parse_mode(const std::string& s);
Format parse_format(const std::string& s);

// One returned price of a deposit/withdraw style entry.
struct PriceEntry {
  std::string entry;
  bool floor = true;
};

struct RunConfig {
  std::string input;
  std::string entry;
  Mode mode = Mode::Summarize;
  Format format = Format::Json;

  model::ModelConfig model;
  std::vector<PriceEntry> price_entries;  // non-empty: price-tolerance model, `entry` unused

  std::optional<Rational> delta;             // optimize-cv
  std::string search;                        // optimize-cv: control to move
  std::map<std::string, Rational> fixed;     // optimize-cv: cv' of the other controls
  std::map<std::string, Rational> targets;   // optimize-delta, guard: cv' values
  Rational step = Rational(1, 200);
  Rational max_delta = 1;
  bool bisect = false;

  double timeout = 120;       // whole search
  double query_timeout = 20;  // one solver call
  std::string solver;
  std::string dump_dir;

  // guard rendering
  std::string reference = "ref";
  std::string tol_num = "profitAllowance";
  std::string tol_den = "tokenVolume";

  std::vector<std::string> stats_excluded;  // scenario ids left out of the symbol counts
  bool timings = false;                     // keep durations in the report

  bool price_model() const { return !price_entries.empty(); }
  // Throws ConfigError naming the first missing or inconsistent field.
  void validate() const;
};

// Reads the keys written by to_json; unknown keys are an error. Relative `input` paths are
// resolved against `base_dir` when it is non-empty.
RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json to_json(const RunConfig& c);

// "k=v" pairs as used on the command line.
std::pair<std::string, std::string> split_assignment(const std::string& text);

}  // namespace ordev::app
