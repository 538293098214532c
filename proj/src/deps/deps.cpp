#include "ordev/deps/deps.hpp"

#include <algorithm>

#include "ordev/front/printer.hpp"

namespace ordev::deps {

using front::Expr;
using front::ExprPtr;
using front::FuncObj;
using front::Function;
using front::Stmt;
using front::StmtKind;

std::string qualify(const std::string& func, const std::string& name) { return func + "::" + name; }

bool DepSets::ld(int loop, const std::string& func, const std::string& name) const {
  auto it = ld_ids.find(loop);
  return it != ld_ids.end() && it->second.count(qualify(func, name));
}

bool DepSets::ld(int loop, const Expr* e) const {
  auto it = ld_exprs.find(loop);
  return it != ld_exprs.end() && it->second.count(e);
}

namespace {

// Round-robin application of the rules until a full sweep adds nothing.
class OracleRules {
 public:
  OracleRules(const FuncObj& f, DepSets& d) : f_(f), d_(d) {
    for (const auto& fn : f.funcs) {
      auto& ids = stmt_ids_[fn.name];
      front::walk_stmts(fn.body, [&](const Stmt& s) { ids.push_back(s.id); });
    }
  }

  void run() {
    do {
      changed_ = false;
      for (const auto& fn : f_.funcs) block(fn, fn.body);
    } while (changed_);
  }

 private:
  const FuncObj& f_;
  DepSets& d_;
  bool changed_ = false;
  std::map<std::string, std::vector<int>> stmt_ids_;

  void mark_id(const Function& fn, const std::string& name) {
    if (name.empty() || name == "_") return;
    if (d_.od_ids.insert(qualify(fn.name, name)).second) changed_ = true;
  }

  void mark_stmt(const Stmt& s) {
    if (d_.od_stmts.insert(s.id).second) changed_ = true;
  }

  bool expr(const Function& fn, const ExprPtr& e) {
    if (!e) return false;
    bool hit = false;
    switch (e->kind) {
      case Expr::Kind::Num:
      case Expr::Kind::Bool:
        return false;
      case Expr::Kind::Id:
        hit = d_.od(fn.name, e->name) || f_.is_oracle_state(e->name);
        break;
      default: {
        bool a = expr(fn, e->lhs);
        bool b = expr(fn, e->rhs);
        hit = a || b;
      }
    }
    if (hit && d_.od_exprs.insert(e.get()).second) changed_ = true;
    return hit;
  }

  bool callee_touched(const Function& g) const {
    const auto& ids = stmt_ids_.at(g.name);
    return std::any_of(ids.begin(), ids.end(), [&](int id) { return d_.od_stmts.count(id) > 0; });
  }

  void block(const Function& fn, const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts) stmt(fn, s);
  }

  void stmt(const Function& fn, const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Dec:
        return;
      case StmtKind::Assign:
      case StmtKind::Load:
      case StmtKind::AssignIndex: {
        bool hit = expr(fn, s.expr);
        if (s.kind == StmtKind::AssignIndex) {
          hit = expr(fn, s.index) || hit;
          hit = hit || d_.od(fn.name, s.source);
        }
        if (hit) {
          mark_id(fn, s.target);
          mark_stmt(s);
        }
        return;
      }
      case StmtKind::Phi:
        if (std::any_of(s.outs.begin(), s.outs.end(), [&](const std::string& o) { return d_.od(fn.name, o); })) {
          mark_id(fn, s.target);
          mark_stmt(s);
        }
        return;
      case StmtKind::Call: {
        bool any_arg = false;
        std::vector<bool> arg_hit;
        for (const auto& a : s.args) {
          arg_hit.push_back(expr(fn, a));
          any_arg = any_arg || arg_hit.back();
        }
        bool hit = false;
        if (const Function* g = f_.find(s.callee)) {
          for (size_t k = 0; k < arg_hit.size() && k < g->params.size(); ++k)
            if (arg_hit[k]) mark_id(*g, g->params[k].name);
          hit = any_arg || callee_touched(*g);
        } else {
          hit = f_.is_oracle_extern(s.callee) || any_arg;
        }
        if (hit) {
          for (const auto& o : s.outs) mark_id(fn, o);
          mark_stmt(s);
        }
        return;
      }
      case StmtKind::Require:
        if (expr(fn, s.expr)) mark_stmt(s);
        return;
      case StmtKind::Return: {
        bool hit = false;
        for (const auto& a : s.args) hit = expr(fn, a) || hit;
        if (hit) mark_stmt(s);
        return;
      }
      case StmtKind::If:
        expr(fn, s.expr);
        block(fn, s.body);
        block(fn, s.orelse);
        block(fn, s.phis);
        return;
      case StmtKind::For:
        expr(fn, s.expr);
        block(fn, s.body);
        return;
    }
  }
};

class LoopRules {
 public:
  LoopRules(const std::string& func, const Stmt& loop, DepSets& d)
      : func_(func), it_(loop.target), ids_(d.ld_ids[loop.id]), exprs_(d.ld_exprs[loop.id]), loop_(loop) {}

  void run() {
    do {
      changed_ = false;
      block(loop_.body);
    } while (changed_);
  }

 private:
  std::string func_;
  std::string it_;
  std::set<std::string>& ids_;
  std::set<const Expr*>& exprs_;
  const Stmt& loop_;
  bool changed_ = false;

  bool has(const std::string& name) const { return ids_.count(qualify(func_, name)) > 0; }

  void mark(const std::string& name) {
    if (name.empty() || name == "_") return;
    if (ids_.insert(qualify(func_, name)).second) changed_ = true;
  }

  bool expr(const ExprPtr& e) {
    if (!e) return false;
    bool hit = false;
    switch (e->kind) {
      case Expr::Kind::Num:
      case Expr::Kind::Bool:
        return false;
      case Expr::Kind::Id:
        hit = e->name == it_ || has(e->name);
        break;
      default: {
        bool a = expr(e->lhs);
        bool b = expr(e->rhs);
        hit = a || b;
      }
    }
    if (hit && exprs_.insert(e.get()).second) changed_ = true;
    return hit;
  }

  void block(const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts) stmt(s);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Assign:
      case StmtKind::Load:
      case StmtKind::AssignIndex: {
        bool hit = expr(s.expr);
        if (s.kind == StmtKind::AssignIndex) {
          hit = expr(s.index) || hit;
          hit = hit || has(s.source);
        }
        if (hit) mark(s.target);
        return;
      }
      case StmtKind::Phi:
        if (std::any_of(s.outs.begin(), s.outs.end(), [&](const std::string& o) { return has(o); })) mark(s.target);
        return;
      case StmtKind::Call: {
        bool hit = false;
        for (const auto& a : s.args) hit = expr(a) || hit;
        if (hit)
          for (const auto& o : s.outs) mark(o);
        return;
      }
      case StmtKind::Require:
      case StmtKind::Return:
        expr(s.expr);
        for (const auto& a : s.args) expr(a);
        return;
      case StmtKind::If:
        expr(s.expr);
        block(s.body);
        block(s.orelse);
        block(s.phis);
        return;
      case StmtKind::For:
        expr(s.expr);
        block(s.body);
        return;
      case StmtKind::Dec:
        return;
    }
  }
};

std::set<std::string> expr_ids(const std::string& func, const ExprPtr& e) {
  std::set<std::string> out;
  front::walk_expr(e, [&](const ExprPtr& x) {
    if (x->kind == Expr::Kind::Id) out.insert(qualify(func, x->name));
  });
  return out;
}

}  // namespace

void extend_oracle_deps(const FuncObj& f, DepSets& d) { OracleRules(f, d).run(); }

DepSets oracle_deps(const FuncObj& f) {
  DepSets d;
  extend_oracle_deps(f, d);
  return d;
}

void loop_deps(const FuncObj&, const std::string& func, const Stmt& loop, DepSets& seed) {
  LoopRules(func, loop, seed).run();
}

DepSets analyze(const FuncObj& f) {
  DepSets d = oracle_deps(f);
  for (const auto& fn : f.funcs)
    front::walk_stmts(fn.body, [&](const Stmt& s) {
      if (s.kind == StmtKind::For) loop_deps(f, fn.name, s, d);
    });
  return d;
}

std::vector<const Stmt*> constraint_scope(const FuncObj& f, const DepSets& d) {
  const Function& entry = f.entry_function();
  std::vector<const Stmt*> reqs, out;
  for (const auto& s : entry.body)
    if (s.kind == StmtKind::Require) reqs.push_back(&s);
  std::set<std::string> symbols;
  std::set<const Stmt*> chosen;
  for (const Stmt* r : reqs)
    if (d.od_stmts.count(r->id)) {
      out.push_back(r);
      chosen.insert(r);
      auto ids = expr_ids(entry.name, r->expr);
      symbols.insert(ids.begin(), ids.end());
    }
  if (out.empty()) return out;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const Stmt* r : reqs) {
      if (chosen.count(r)) continue;
      auto ids = expr_ids(entry.name, r->expr);
      if (ids.empty()) continue;
      if (std::all_of(ids.begin(), ids.end(), [&](const std::string& x) { return symbols.count(x) > 0; })) {
        out.push_back(r);
        chosen.insert(r);
        grew = true;
      }
    }
  }
  return out;
}

nlohmann::json to_json(const FuncObj& f, const DepSets& d) {
  nlohmann::json j;
  j["od"] = d.od_ids;
  auto& reqs = j["od_requires"] = nlohmann::json::array();
  auto& loops = j["loops"] = nlohmann::json::array();
  for (const auto& fn : f.funcs)
    front::walk_stmts(fn.body, [&](const Stmt& s) {
      if (s.kind == StmtKind::Require && d.od_stmts.count(s.id))
        reqs.push_back({{"function", fn.name}, {"stmt", s.id}, {"line", s.loc.line}, {"text", front::print_expr(*s.expr)}});
      if (s.kind == StmtKind::For) {
        auto it = d.ld_ids.find(s.id);
        loops.push_back({{"function", fn.name},
                         {"stmt", s.id},
                         {"iterator", s.target},
                         {"ld", it == d.ld_ids.end() ? std::set<std::string>{} : it->second}});
      }
    });
  auto& scope = j["scope"] = nlohmann::json::array();
  for (const Stmt* s : constraint_scope(f, d)) scope.push_back(front::print_expr(*s->expr));
  return j;
}

}  // namespace ordev::deps
