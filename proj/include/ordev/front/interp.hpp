#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ordev/front/ast.hpp"
#include "ordev/front/ssa.hpp"

namespace ordev::front {

class InterpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bindings for parameters, states and external calls. Map-like states are arrays
// keyed by the flattened access path: markets[k].collFact reads arrays["markets.collFact"][k].
struct Env {
  std::map<std::string, Rational> scalars;
  std::map<std::string, std::vector<Rational>> arrays;
  std::map<std::pair<std::string, std::vector<Rational>>, std::vector<Rational>> calls;
  // When set, unbound external calls get deterministic pseudo-random positive results.
  std::optional<std::uint64_t> call_seed;
  // Extra seed material per function, to re-draw one function's answers.
  std::map<std::string, std::uint64_t> call_salt;

  std::vector<Rational> call(const std::string& fn, const std::vector<Rational>& args,
                             size_t arity) const;
};

struct InterpOptions {
  int max_loop = 8;
  bool stop_on_revert = true;
};

struct InterpResult {
  std::vector<Rational> returns;
  bool reverted = false;
  std::map<int, bool> require_results;  // statement id -> last evaluated truth value
  std::vector<bool> require_trace;      // every require outcome, in evaluation order
  std::map<std::string, Rational> values;  // "function::local" -> last assigned scalar
};

InterpResult interpret_function(const FuncObj& f, const Env& env, const InterpOptions& opts = {});

// Runs a function of a contract as written (no SSA, no purity check).
InterpResult interpret_source(const Contract& c, const std::string& fn, const Env& env,
                              const InterpOptions& opts = {});

}  // namespace ordev::front
