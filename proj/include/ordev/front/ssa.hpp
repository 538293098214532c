#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ordev/front/ast.hpp"

namespace ordev::front {

class FrontError : public std::runtime_error {
 public:
  FrontError(SourceLoc loc, const std::string& msg)
      : std::runtime_error(to_string(loc) + ": " + msg), loc_(loc) {}
  SourceLoc loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

// Renames locals to single-assignment versions (x -> x_1, x_2, ...), inserts loop-head
// and if-join phis, and turns struct declarations into explicit zero initialisation of
// the fields the function touches. Parameters and states keep their names.
//
// Loop-head phi(x_h, x_init, x_back): x_h is the value at the start of an iteration,
// x_back the value at its end; after the loop x_back holds the final value (x_init when
// the loop runs zero times).
Function to_ssa(const Function& f, const Contract& c);

struct FuncObj {
  std::string entry;
  std::vector<Function> funcs;  // entry first, all in SSA form
  std::vector<StateDecl> states;
  std::vector<ExternDecl> externs;

  const Function* find(const std::string& name) const;
  const Function& entry_function() const { return funcs.front(); }
  bool is_state(const std::string& name) const;
  bool is_oracle_state(const std::string& name) const;
  bool is_extern(const std::string& name) const;
  bool is_oracle_extern(const std::string& name) const;
};

// Entry function plus every contract function it reaches, renamed to SSA, with
// statement ids unique across the object.
FuncObj extract_func(const Contract& c, const std::string& entry);

}  // namespace ordev::front
