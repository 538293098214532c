#include "ordev/front/printer.hpp"

#include <sstream>

namespace ordev::front {

namespace {

int prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary:
      if (is_comparison(e.op)) return 1;
      return (e.op == BinOp::Add || e.op == BinOp::Sub) ? 2 : 3;
    case Expr::Kind::Not:
      return 4;
    case Expr::Kind::Num:
      return e.num < 0 ? 4 : 6;
    default:
      return 6;
  }
}

void emit(std::ostream& os, const Expr& e);

void emit_child(std::ostream& os, const Expr& child, bool paren) {
  if (paren) os << '(';
  emit(os, child);
  if (paren) os << ')';
}

void emit(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Num:
      os << ordev::to_string(e.num);
      return;
    case Expr::Kind::Bool:
      os << (e.truth ? "true" : "false");
      return;
    case Expr::Kind::Id:
      os << e.name;
      return;
    case Expr::Kind::Index:
      emit_child(os, *e.lhs, prec(*e.lhs) < 6);
      os << '[';
      emit(os, *e.rhs);
      os << ']';
      return;
    case Expr::Kind::Member:
      emit_child(os, *e.lhs, prec(*e.lhs) < 6);
      os << '.' << e.name;
      return;
    case Expr::Kind::Not:
      os << '!';
      emit_child(os, *e.lhs, prec(*e.lhs) < 4);
      return;
    case Expr::Kind::Binary: {
      int p = prec(e);
      bool cmp = is_comparison(e.op);
      emit_child(os, *e.lhs, cmp ? prec(*e.lhs) <= p : prec(*e.lhs) < p);
      os << ' ' << op_text(e.op) << ' ';
      emit_child(os, *e.rhs, prec(*e.rhs) <= p);
      return;
    }
  }
}

std::string join_exprs(const std::vector<ExprPtr>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += print_expr(*xs[i]);
  }
  return out;
}

void emit_stmts(std::ostream& os, const std::vector<Stmt>& stmts, int indent);

void emit_stmt(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(indent, ' ');
  os << pad;
  switch (s.kind) {
    case StmtKind::Dec:
      os << "dec(" << s.type << ", " << s.target << ")\n";
      return;
    case StmtKind::Assign:
      os << s.target << " = " << print_expr(*s.expr) << '\n';
      return;
    case StmtKind::AssignIndex:
      os << s.target << '[' << print_expr(*s.index) << "] = " << print_expr(*s.expr);
      if (s.source != s.target) os << "  # updates " << s.source;
      os << '\n';
      return;
    case StmtKind::Load:
      os << "load(" << s.target << ", " << print_expr(*s.expr) << ")\n";
      return;
    case StmtKind::Require:
      os << "require(" << print_expr(*s.expr) << ")\n";
      return;
    case StmtKind::Phi:
      os << "phi(" << s.target;
      for (const auto& o : s.outs) os << ", " << o;
      os << ")\n";
      return;
    case StmtKind::If:
      os << "if (" << print_expr(*s.expr) << ") {\n";
      emit_stmts(os, s.body, indent + 2);
      os << pad << "}";
      if (!s.orelse.empty()) {
        os << " else {\n";
        emit_stmts(os, s.orelse, indent + 2);
        os << pad << "}";
      }
      os << '\n';
      emit_stmts(os, s.phis, indent);
      return;
    case StmtKind::For:
      os << "for(" << s.target << ", " << print_expr(*s.expr) << ") {\n";
      emit_stmts(os, s.body, indent + 2);
      os << pad << "}\n";
      return;
    case StmtKind::Call: {
      os << "call(" << s.callee;
      for (const auto& a : s.args) os << ", " << print_expr(*a);
      os << ", ";
      if (s.tuple_dest) {
        os << '(';
        for (size_t i = 0; i < s.outs.size(); ++i) os << (i ? ", " : "") << s.outs[i];
        os << ')';
      } else {
        os << s.outs.at(0);
      }
      os << ")\n";
      return;
    }
    case StmtKind::Return:
      os << "return(" << join_exprs(s.args) << ")\n";
      return;
  }
}

void emit_stmts(std::ostream& os, const std::vector<Stmt>& stmts, int indent) {
  for (const auto& s : stmts) emit_stmt(os, s, indent);
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream os;
  emit(os, e);
  return os.str();
}

std::string print_stmts(const std::vector<Stmt>& stmts, int indent) {
  std::ostringstream os;
  emit_stmts(os, stmts, indent);
  return os.str();
}

std::string print_function(const Function& f, int indent) {
  std::ostringstream os;
  std::string pad(indent, ' ');
  for (const auto& a : f.annotations) os << pad << '@' << a << '\n';
  os << pad << "func(" << f.name;
  for (const auto& p : f.params) os << ", " << p.type << ' ' << p.name;
  os << ") {\n";
  emit_stmts(os, f.body, indent + 2);
  os << pad << "}\n";
  return os.str();
}

std::string print_contract(const Contract& c) {
  std::ostringstream os;
  os << "contract(" << c.id << ")";
  if (c.states.empty() && c.externs.empty() && c.funcs.empty()) {
    os << '\n';
    return os.str();
  }
  os << " {\n";
  for (const auto& s : c.states)
    os << "  " << (s.oracle ? "@oracle " : "") << "state(" << s.type << ", " << s.name << ")\n";
  for (const auto& x : c.externs)
    os << "  " << (x.oracle ? "@oracle " : "") << "extern(" << x.name << ")\n";
  for (const auto& f : c.funcs) {
    os << '\n' << print_function(f, 2);
  }
  os << "}\n";
  return os.str();
}

}  // namespace ordev::front
