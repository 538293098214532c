#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordev/front/ssa.hpp"

namespace ordev::deps {

// Identifiers are qualified by their function: "hypotheticalLiquid::v.oraclePrice_3".
std::string qualify(const std::string& func, const std::string& name);

struct DepSets {
  std::set<std::string> od_ids;
  std::set<const front::Expr*> od_exprs;
  std::set<int> od_stmts;
  // keyed by the id of the for statement
  std::map<int, std::set<std::string>> ld_ids;
  std::map<int, std::set<const front::Expr*>> ld_exprs;

  bool od(const std::string& func, const std::string& name) const { return od_ids.count(qualify(func, name)) > 0; }
  bool od(const front::Expr* e) const { return od_exprs.count(e) > 0; }
  bool ld(int loop, const std::string& func, const std::string& name) const;
  bool ld(int loop, const front::Expr* e) const;
};

// Oracle dependence: least fixpoint over the whole object, callee parameters tainted
// by their arguments. A call into a contract function taints its results when an
// argument or any statement of the callee is oracle dependent.
DepSets oracle_deps(const front::FuncObj& f);
// Applies the oracle rules starting from `d` instead of the empty set.
void extend_oracle_deps(const front::FuncObj& f, DepSets& d);

// Loop dependence for one for statement of `func`, added to `seed.ld_*[loop.id]`.
void loop_deps(const front::FuncObj& f, const std::string& func, const front::Stmt& loop, DepSets& seed);

// oracle_deps followed by loop_deps for every loop.
DepSets analyze(const front::FuncObj& f);

// Oracle-dependent top-level requires of the entry function, then any require whose
// identifiers all occur in the requires already selected, until nothing changes.
std::vector<const front::Stmt*> constraint_scope(const front::FuncObj& f, const DepSets& d);

nlohmann::json to_json(const front::FuncObj& f, const DepSets& d);

}  // namespace ordev::deps
