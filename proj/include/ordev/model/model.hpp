#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordev/dsl/node.hpp"

namespace ordev::model {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sum(E, j, ub) expanded to E[j->0] + ... + E[j->ub-1]. A bound is either a constant or
// looked up by its printed form ("numAssets", "len").
dsl::NodePtr unroll(const dsl::NodePtr& n, const std::map<std::string, int>& bounds);

// The name a leaf answers to in configs: the field of a member path, the array of an
// index path, the destination of a ret, or the identifier itself.
std::string leaf_key(const dsl::NodePtr& leaf);

enum class Direction { Up, Down };  // which way cv' loosens the truth-side check

struct Control {
  std::string name;
  Rational current;
  std::vector<std::string> keys;  // leaf keys this control stands for; defaults to {name}
  Direction direction = Direction::Up;
  std::optional<Rational> max;  // search boundary for cv'
};

// Oracle-free deviation tolerance between a quoted price and its true value. Used by the
// deposit/withdraw style fixtures, which have no require to pair.
struct PriceCheck {
  dsl::NodePtr expr;   // price expression over leaves
  bool floor = true;   // true: quote must not fall below (1 - tol) * truth; false: not exceed (1 + tol) * truth
  std::string label;
};

struct ModelConfig {
  std::map<std::string, int> bounds;
  std::vector<Control> controls;
  std::map<std::string, Rational> pins;             // leaf key or printed leaf -> value
  std::map<std::string, Rational> delta_overrides;  // oracle leaf key -> fixed deviation for that pair
  std::string tolerance;                            // control used as tol by price checks

  const Control* control(const std::string& name) const;
  const Control* control_for_key(const std::string& key) const;
};

enum class Role { State, Reported, Truth };

struct Var {
  std::string name;  // SMT symbol
  Role role = Role::State;
  std::string leaf;  // printed leaf it stands for
  std::string key;
  int pair = -1;  // index into OptModel::prices for reported/truth symbols
};

struct PricePair {
  std::string reported;
  std::string truth;
  std::string leaf;
  std::optional<Rational> delta;  // per-pair override
  dsl::NodePtr node;               // the ret leaf, for rendering
};

struct Instance {
  dsl::NodePtr oracle;  // C_Re: reported prices, current control values
  dsl::NodePtr truth;   // C_Gt: true prices, cv' symbols
  std::string source;
};

struct OptModel {
  std::vector<Var> vars;
  std::vector<PricePair> prices;
  std::vector<Control> controls;
  std::map<std::string, int> bounds;
  std::vector<dsl::NodePtr> c0;    // positivity
  std::vector<dsl::NodePtr> c1;    // deviation bounds
  std::vector<dsl::NodePtr> side;  // denominators not entailed positive
  std::vector<Instance> pairs;
  std::vector<PriceCheck> checks;  // price-tolerance models only

  int num_vars() const { return static_cast<int>(vars.size()); }
  // |pairs| oracle/truth instances plus C0 and C1.
  int constraint_count() const { return 2 * static_cast<int>(pairs.size()) + 2; }
  const Var* var(const std::string& name) const;
};

inline const char* kDelta = "delta";
std::string target_name(const std::string& control);  // cf -> cf'

OptModel build_model(const std::vector<dsl::NodePtr>& constraints, const ModelConfig& cfg);
OptModel build_price_model(const std::vector<PriceCheck>& checks, const ModelConfig& cfg);

// Values for delta and every cv' symbol.
struct Candidate {
  Rational delta;
  std::map<std::string, Rational> targets;  // control name -> cv'
};

// Substitutes a candidate and cleans up: constant folding, zeroed terms, and divisions
// cleared against denominators that are positive under C0 and the side constraints.
dsl::NodePtr simplify(const dsl::NodePtr& n);
OptModel simplify_constraints(const OptModel& m);
OptModel instantiate(const OptModel& m, const Candidate& c);

// Sign facts available from C0 alone: every model variable and cv' is positive.
enum class Sign { Positive, NonNegative, Unknown };
Sign sign(const dsl::NodePtr& n);

// SMT-LIB 2 query for C0 /\ C1 /\ side /\ C_Re /\ not C_Gt under the candidate.
std::string to_smtlib(const OptModel& m, const Candidate& c);
std::string smt_symbol(const std::string& name);
std::string smt_expr(const dsl::NodePtr& n);

nlohmann::json to_json(const OptModel& m);

}  // namespace ordev::model
