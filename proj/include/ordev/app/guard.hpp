#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordev/model/model.hpp"
#include "ordev/opt/engine.hpp"

namespace ordev::app {

class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GuardOptions {
  std::string reference = "ref";  // object the reference reads go to: ref.getUnderlyingPrice
  // price-tolerance models: tol is written as tol_num / tol_den
  std::string tol_num = "profitAllowance";
  std::string tol_den = "tokenVolume";
};

// One guarded expression: reference reads for its oracle leaves, then two requires
// bounding the gap from both sides (the grammar has no abs).
struct GuardBlock {
  std::string expr;                 // guarded expression, source syntax
  std::vector<std::string> leaves;  // printed oracle leaves it reads
  std::vector<std::string> refs;    // reference variable per leaf
};

struct GuardSpec {
  Rational delta;
  std::vector<std::string> symbols;  // every guarded oracle leaf
  std::string reference;
  bool tolerance_form = false;  // tol_num / tol_den instead of a literal delta
  std::string tol_num, tol_den;
  std::vector<GuardBlock> blocks;
  std::string rendered;
  std::vector<std::string> warnings;
};

// `r` must be an optimal max-delta result over `m`.
GuardSpec generate_guard(const opt::OptResult& r, const model::OptModel& m, const GuardOptions& o = {});

// Parses the rendered text back and adds each require to `m` as another oracle/truth
// instance, reference reads standing for the true price. Tolerance-form guards take
// tol_num = tol and tol_den = 1.
model::OptModel apply_guard(const model::OptModel& m, const GuardSpec& g, const Rational& tol);

// Source syntax for a leaf-level expression: v.oraclePrice, accountAssets[0], a / b.
std::string source_text(const dsl::NodePtr& n);

nlohmann::json to_json(const GuardSpec& g);

}  // namespace ordev::app
