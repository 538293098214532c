#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ordev/rational.hpp"

namespace ordev::front {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

std::string to_string(const SourceLoc& loc);

enum class BinOp { Add, Sub, Mul, Div, Ge, Gt, Lt, Le, Eq };

bool is_comparison(BinOp op);
const char* op_text(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Num, Bool, Id, Index, Member, Not, Binary };
  Kind kind = Kind::Num;
  Rational num;
  bool truth = false;
  std::string name;  // Id name or Member field
  BinOp op = BinOp::Add;
  ExprPtr lhs;  // Index base, Member base, Not operand, Binary lhs
  ExprPtr rhs;  // Index position, Binary rhs
  SourceLoc loc;
};

ExprPtr make_num(Rational v, SourceLoc loc = {});
ExprPtr make_bool(bool v, SourceLoc loc = {});
ExprPtr make_id(std::string name, SourceLoc loc = {});
ExprPtr make_index(ExprPtr base, ExprPtr pos, SourceLoc loc = {});
ExprPtr make_member(ExprPtr base, std::string field, SourceLoc loc = {});
ExprPtr make_not(ExprPtr e, SourceLoc loc = {});
ExprPtr make_binary(BinOp op, ExprPtr a, ExprPtr b, SourceLoc loc = {});

bool same_expr(const Expr& a, const Expr& b);

// "v.sumColl" for Member(Id v, sumColl); empty when the expression is not a plain dotted path.
std::string dotted_path(const Expr& e);

enum class StmtKind { Dec, Assign, AssignIndex, Load, Require, Phi, If, For, Call, Return };

struct Stmt {
  StmtKind kind = StmtKind::Assign;
  int id = -1;
  SourceLoc loc;
  std::string type;    // Dec
  std::string target;  // Dec/Assign/AssignIndex/Load/Phi target, For iterator
  std::string base;    // target name before renaming
  std::string source;  // AssignIndex: array version being updated
  ExprPtr expr;        // value, load source, require/if condition, for bound
  ExprPtr index;       // AssignIndex position
  std::string callee;
  std::vector<ExprPtr> args;          // call arguments or returned values
  std::vector<std::string> outs;      // call destinations ("_" discards) or phi sources
  std::vector<std::string> out_bases; // call destinations before renaming
  bool tuple_dest = false;
  std::vector<Stmt> body;    // then-branch or loop body
  std::vector<Stmt> orelse;  // else-branch
  std::vector<Stmt> phis;    // join phis of an if
};

bool same_stmt(const Stmt& a, const Stmt& b);

struct StateDecl {
  std::string type;
  std::string name;
  bool oracle = false;
  SourceLoc loc;
};

struct ExternDecl {
  std::string name;
  bool oracle = false;
  SourceLoc loc;
};

struct Param {
  std::string type;
  std::string name;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::vector<Stmt> body;
  std::set<std::string> annotations;
  SourceLoc loc;

  bool has(const std::string& tag) const { return annotations.count(tag) != 0; }
  bool is_public() const { return has("entry") || has("public"); }
};

struct Contract {
  std::string id;
  std::vector<StateDecl> states;
  std::vector<ExternDecl> externs;
  std::vector<Function> funcs;

  const Function* find_function(const std::string& name) const;
  const StateDecl* find_state(const std::string& name) const;
  const ExternDecl* find_extern(const std::string& name) const;
};

bool same_contract(const Contract& a, const Contract& b);

// Calls `fn` on every statement, nested ones included, in program order.
template <class Fn>
void walk_stmts(const std::vector<Stmt>& stmts, Fn&& fn) {
  for (const auto& s : stmts) {
    fn(s);
    walk_stmts(s.body, fn);
    walk_stmts(s.orelse, fn);
    walk_stmts(s.phis, fn);
  }
}

template <class Fn>
void walk_expr(const ExprPtr& e, Fn&& fn) {
  if (!e) return;
  fn(e);
  walk_expr(e->lhs, fn);
  walk_expr(e->rhs, fn);
}

// Expressions owned directly by a statement (not by nested statements).
std::vector<ExprPtr> stmt_exprs(const Stmt& s);

}  // namespace ordev::front
