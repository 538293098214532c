#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordev/model/model.hpp"
#include "ordev/opt/solver.hpp"

namespace ordev::opt {

enum class Safety { Safe, Unsafe, Unknown };
const char* to_string(Safety s);

struct SafetyResult {
  Safety verdict = Safety::Unknown;
  std::map<std::string, Rational> counterexample;  // sv/re/gt values when unsafe
  bool approximate = false;                        // counterexample rounds an irrational value
  SolverStatus solver = SolverStatus::Unknown;
  double seconds = 0;
};

// C0 /\ C1 /\ side /\ C_Re /\ not C_Gt under the candidate: unsat means safe.
SafetyResult check_safety(const model::OptModel& m, const model::Candidate& c, const SolverConfig& s,
                          double timeout = 0);

// Re-evaluates the query exactly under `values`: true when every C0, C1, side constraint and
// oracle instance holds and some truth instance fails. `why` names the first mismatch.
bool replay(const model::OptModel& m, const model::Candidate& c, const std::map<std::string, Rational>& values,
            std::string* why = nullptr);

enum class Status { Optimal, Timeout, Infeasible, SolverUnknown };
const char* to_string(Status s);

struct TraceEntry {
  model::Candidate candidate;
  Safety verdict = Safety::Unknown;
  double seconds = 0;
};

struct OptResult {
  Status status = Status::Infeasible;
  std::optional<Rational> value;  // optimal delta or cv'
  model::Candidate best;          // full candidate at the optimum
  std::vector<TraceEntry> trace;
  std::optional<std::map<std::string, Rational>> counterexample;  // last unsafe candidate
  bool at_boundary = false;  // the optimum sits at the edge of the search range
  std::string note;
  double seconds = 0;
};

struct SearchOptions {
  Rational step = Rational(1, 200);
  double timeout = 120;  // whole search, seconds
  SolverConfig solver;
  bool bisect = false;  // stride through the grid, then bisect the bracket
  int max_steps = 2000;
};

// Smallest safe cv' on the grid cv, cv +- step, ... moving in the control's direction, the
// other controls held at `fixed` (or their current values).
OptResult solve_min_cv(const model::OptModel& m, const std::string& control, const Rational& delta,
                       const SearchOptions& opts, const std::map<std::string, Rational>& fixed = {});

// Largest safe delta on the grid 0, step, 2*step, ... up to `max_delta`, controls at `targets`.
OptResult solve_max_delta(const model::OptModel& m, const std::map<std::string, Rational>& targets,
                          const SearchOptions& opts, const Rational& max_delta = 1);

nlohmann::json to_json(const OptResult& r);
nlohmann::json to_json(const model::Candidate& c);

}  // namespace ordev::opt
