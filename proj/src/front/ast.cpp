#include "ordev/front/ast.hpp"

namespace ordev::front {

std::string to_string(const SourceLoc& loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.col);
}

bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Ge: case BinOp::Gt: case BinOp::Lt: case BinOp::Le: case BinOp::Eq:
      return true;
    default:
      return false;
  }
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Ge: return ">=";
    case BinOp::Gt: return ">";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Eq: return "==";
  }
  return "?";
}

namespace {

std::shared_ptr<Expr> fresh(Expr::Kind k, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->loc = loc;
  return e;
}

bool same_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same_expr(*a, *b);
}

bool same_list(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!same_stmt(a[i], b[i])) return false;
  return true;
}

}  // namespace

ExprPtr make_num(Rational v, SourceLoc loc) {
  auto e = fresh(Expr::Kind::Num, loc);
  e->num = std::move(v);
  return e;
}

ExprPtr make_bool(bool v, SourceLoc loc) {
  auto e = fresh(Expr::Kind::Bool, loc);
  e->truth = v;
  return e;
}

ExprPtr make_id(std::string name, SourceLoc loc) {
  auto e = fresh(Expr::Kind::Id, loc);
  e->name = std::move(name);
  return e;
}

ExprPtr make_index(ExprPtr base, ExprPtr pos, SourceLoc loc) {
  auto e = fresh(Expr::Kind::Index, loc);
  e->lhs = std::move(base);
  e->rhs = std::move(pos);
  return e;
}

ExprPtr make_member(ExprPtr base, std::string field, SourceLoc loc) {
  auto e = fresh(Expr::Kind::Member, loc);
  e->lhs = std::move(base);
  e->name = std::move(field);
  return e;
}

ExprPtr make_not(ExprPtr inner, SourceLoc loc) {
  auto e = fresh(Expr::Kind::Not, loc);
  e->lhs = std::move(inner);
  return e;
}

ExprPtr make_binary(BinOp op, ExprPtr a, ExprPtr b, SourceLoc loc) {
  auto e = fresh(Expr::Kind::Binary, loc);
  e->op = op;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

bool same_expr(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Num: return a.num == b.num;
    case Expr::Kind::Bool: return a.truth == b.truth;
    case Expr::Kind::Id: return a.name == b.name;
    case Expr::Kind::Index: return same_ptr(a.lhs, b.lhs) && same_ptr(a.rhs, b.rhs);
    case Expr::Kind::Member: return a.name == b.name && same_ptr(a.lhs, b.lhs);
    case Expr::Kind::Not: return same_ptr(a.lhs, b.lhs);
    case Expr::Kind::Binary:
      return a.op == b.op && same_ptr(a.lhs, b.lhs) && same_ptr(a.rhs, b.rhs);
  }
  return false;
}

std::string dotted_path(const Expr& e) {
  if (e.kind == Expr::Kind::Id) return e.name;
  if (e.kind == Expr::Kind::Member && e.lhs) {
    auto base = dotted_path(*e.lhs);
    if (!base.empty()) return base + "." + e.name;
  }
  return {};
}

bool same_stmt(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.type != b.type || a.target != b.target || a.source != b.source ||
      a.callee != b.callee || a.outs != b.outs || a.tuple_dest != b.tuple_dest)
    return false;
  if (!same_ptr(a.expr, b.expr) || !same_ptr(a.index, b.index)) return false;
  if (a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!same_ptr(a.args[i], b.args[i])) return false;
  return same_list(a.body, b.body) && same_list(a.orelse, b.orelse) && same_list(a.phis, b.phis);
}

const Function* Contract::find_function(const std::string& name) const {
  for (const auto& f : funcs)
    if (f.name == name) return &f;
  return nullptr;
}

const StateDecl* Contract::find_state(const std::string& name) const {
  for (const auto& s : states)
    if (s.name == name) return &s;
  return nullptr;
}

const ExternDecl* Contract::find_extern(const std::string& name) const {
  for (const auto& x : externs)
    if (x.name == name) return &x;
  return nullptr;
}

bool same_contract(const Contract& a, const Contract& b) {
  if (a.id != b.id || a.states.size() != b.states.size() || a.externs.size() != b.externs.size() ||
      a.funcs.size() != b.funcs.size())
    return false;
  for (size_t i = 0; i < a.states.size(); ++i) {
    const auto &x = a.states[i], &y = b.states[i];
    if (x.type != y.type || x.name != y.name || x.oracle != y.oracle) return false;
  }
  for (size_t i = 0; i < a.externs.size(); ++i)
    if (a.externs[i].name != b.externs[i].name || a.externs[i].oracle != b.externs[i].oracle)
      return false;
  for (size_t i = 0; i < a.funcs.size(); ++i) {
    const auto &f = a.funcs[i], &g = b.funcs[i];
    if (f.name != g.name || f.annotations != g.annotations || f.params.size() != g.params.size())
      return false;
    for (size_t k = 0; k < f.params.size(); ++k)
      if (f.params[k].type != g.params[k].type || f.params[k].name != g.params[k].name) return false;
    if (!same_list(f.body, g.body)) return false;
  }
  return true;
}

std::vector<ExprPtr> stmt_exprs(const Stmt& s) {
  std::vector<ExprPtr> out;
  if (s.expr) out.push_back(s.expr);
  if (s.index) out.push_back(s.index);
  for (const auto& a : s.args) out.push_back(a);
  return out;
}

}  // namespace ordev::front
