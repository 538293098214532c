#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordev/rational.hpp"

namespace ordev::opt {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  std::string path;            // empty: ORDEV_SOLVER, then z3 on PATH
  double query_timeout = 20;   // seconds
  std::string dump_dir;        // every query is also written here when set
};

// Explicit path, else $ORDEV_SOLVER, else z3 found on $PATH. Throws SolverError if none.
std::string find_solver(const std::string& explicit_path = {});

enum class SolverStatus { Sat, Unsat, Unknown, Timeout };
const char* to_string(SolverStatus s);

struct SolverRun {
  SolverStatus status = SolverStatus::Unknown;
  std::map<std::string, Rational> model;  // get-value answers on sat
  bool approximate = false;               // some value was irrational and was rounded
  std::string output;
  double seconds = 0;
};

// Runs one SMT-LIB 2 script through the solver (script on stdin, answers on stdout).
// `timeout` overrides cfg.query_timeout when positive.
SolverRun run_solver(const std::string& script, const SolverConfig& cfg, double timeout = 0);

// ((x 1.0) (|y z| (/ 1.0 3.0)) ...) as printed by get-value. Irrational answers come back
// as root-obj terms and yield nullopt for that symbol.
std::map<std::string, std::optional<Rational>> parse_values(const std::string& text);

}  // namespace ordev::opt
