#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordev/deps/deps.hpp"
#include "ordev/dsl/node.hpp"
#include "ordev/front/ssa.hpp"

namespace ordev::summary {

class SummaryError : public std::runtime_error {
 public:
  SummaryError(front::SourceLoc loc, const std::string& msg)
      : std::runtime_error(front::to_string(loc) + ": " + msg), loc_(loc) {}
  front::SourceLoc loc() const { return loc_; }

 private:
  front::SourceLoc loc_;
};

// Source expression to DSL. Identifiers listed in `iters` become iterators; comparisons
// and negations become constraints.
dsl::NodePtr conv_dsl(const front::ExprPtr& e, const std::set<std::string>& iters = {});

struct Constraint {
  int stmt = -1;
  front::SourceLoc loc;
  std::string source;  // the require as written
  dsl::NodePtr expr;
};

// Bottom-up summarizer over one FuncObj. Summaries are expressed over parameters of the
// entry, states, ret(...) leaves and sum iterators.
class Summarizer {
 public:
  Summarizer(const front::FuncObj& f, const deps::DepSets& d);

  // e as seen before statement s, given e as seen after it.
  dsl::NodePtr extract_summary(const std::string& func, const front::Stmt& s, const dsl::NodePtr& e);
  // e as seen before the statement list, given e as seen after it.
  dsl::NodePtr extract_block(const std::string& func, const std::vector<front::Stmt>& stmts, size_t end,
                             const dsl::NodePtr& e);
  dsl::NodePtr loop_summary(const std::string& func, const front::Stmt& loop, const dsl::NodePtr& e);
  dsl::NodePtr if_summary(const std::string& func, const front::Stmt& branch, const dsl::NodePtr& e);

  // Returned values of a function in terms of its own parameters.
  const std::vector<dsl::NodePtr>& function_summary(const std::string& func);

  std::vector<Constraint> code_summary();

 private:
  const front::FuncObj& f_;
  const deps::DepSets& d_;
  std::vector<const front::Stmt*> loops_;  // active loops, innermost last
  std::map<std::string, std::vector<dsl::NodePtr>> fn_cache_;
  std::set<std::string> in_progress_;
  dsl::IterNames names_;
  std::map<std::pair<int, std::string>, std::string> binders_;  // (loop, accumulator) -> sum iterator

  dsl::NodePtr conv(const front::ExprPtr& e) const;
  dsl::NodePtr call_summary(const std::string& func, const front::Stmt& s, const dsl::NodePtr& e);
};

std::vector<Constraint> code_summary(const front::FuncObj& f, const deps::DepSets& d);

// Summaries of the entry's returned values.
std::vector<dsl::NodePtr> return_summary(const front::FuncObj& f, const deps::DepSets& d);

struct Stats {
  int require_count = 0;
  int loops = 0;
  int vector_vars = 0;
  int scalar_vars = 0;
  std::vector<std::string> vectors;
  std::vector<std::string> scalars;
};

// Symbol counts over the arithmetic leaves of `exprs`. Leaves that occur only inside an
// Int(...) condition or a sum bound are not counted, neither are identifiers in `excluded`. A leaf
// under a sum binder is a vector symbol; vectors are identified up to their iterator.
Stats stats(const front::FuncObj& f, const std::vector<dsl::NodePtr>& exprs, int require_count,
            const std::set<std::string>& excluded = {});

nlohmann::json to_json(const Constraint& c);

}  // namespace ordev::summary
