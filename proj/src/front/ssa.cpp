#include "ordev/front/ssa.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace ordev::front {

namespace {

using Env = std::map<std::string, std::string>;

class Renamer {
 public:
  Renamer(const Function& f, const Contract& c) : f_(f), c_(c) {
    for (const auto& s : c.states) used_.insert(s.name);
    for (const auto& x : c.externs) used_.insert(x.name);
    for (const auto& g : c.funcs) used_.insert(g.name);
    for (const auto& p : f.params) used_.insert(p.name);
    walk_stmts(f.body, [&](const Stmt& s) {
      if (!s.target.empty()) used_.insert(s.target);
      for (const auto& o : s.outs) used_.insert(o);
      switch (s.kind) {
        case StmtKind::Dec:
          if (s.type != "Struct") ++defs_[s.target];
          break;
        case StmtKind::Assign:
        case StmtKind::Load:
        case StmtKind::AssignIndex:
          ++defs_[s.target];
          break;
        case StmtKind::Call:
          for (const auto& o : s.outs) ++defs_[o];
          break;
        default:
          break;
      }
      if (s.kind == StmtKind::Dec && s.type == "Struct") structs_.insert(s.target);
      if (s.kind == StmtKind::Phi) throw FrontError(s.loc, "phi in source input; function is already in SSA form");
    });
    // Fields of declared structs: every dotted path rooted at one.
    walk_stmts(f.body, [&](const Stmt& s) {
      auto note = [&](const std::string& p) {
        auto dot = p.find('.');
        if (dot != std::string::npos && structs_.count(p.substr(0, dot))) add_field(p);
      };
      note(s.target);
      for (const auto& o : s.outs) note(o);
      for (const auto& e : stmt_exprs(s))
        walk_expr(e, [&](const ExprPtr& x) {
          if (x->kind == Expr::Kind::Member) note(dotted_path(*x));
        });
    });
  }

  Function run() {
    Function out = f_;
    Env env;
    for (const auto& p : f_.params) env[p.name] = p.name;
    out.body = block(f_.body, env);
    return out;
  }

 private:
  const Function& f_;
  const Contract& c_;
  std::set<std::string> used_;
  std::set<std::string> structs_;
  std::map<std::string, std::vector<std::string>> fields_;
  std::map<std::string, int> counter_;
  std::map<std::string, int> defs_;  // static definitions per source name
  std::vector<std::string> iterators_;

  void add_field(const std::string& path) {
    auto root = path.substr(0, path.find('.'));
    auto& v = fields_[root];
    if (std::find(v.begin(), v.end(), path) == v.end()) v.push_back(path);
  }

  bool is_state(const std::string& name) const { return c_.find_state(name) != nullptr; }

  std::string fresh(const std::string& base) {
    while (true) {
      std::string name = base + "_" + std::to_string(++counter_[base]);
      if (used_.insert(name).second) return name;
    }
  }

  bool is_iterator(const std::string& name) const {
    return std::find(iterators_.begin(), iterators_.end(), name) != iterators_.end();
  }

  ExprPtr expr(const ExprPtr& e, const Env& env) {
    switch (e->kind) {
      case Expr::Kind::Num:
      case Expr::Kind::Bool:
        return e;
      case Expr::Kind::Id: {
        if (is_iterator(e->name)) return e;
        if (auto it = env.find(e->name); it != env.end()) return make_id(it->second, e->loc);
        if (is_state(e->name)) return e;
        throw FrontError(e->loc, "use of '" + e->name + "' before definition");
      }
      case Expr::Kind::Member: {
        auto path = dotted_path(*e);
        if (!path.empty()) {
          if (auto it = env.find(path); it != env.end()) return make_id(it->second, e->loc);
          auto root = path.substr(0, path.find('.'));
          if (structs_.count(root)) throw FrontError(e->loc, "use of '" + path + "' before definition");
        }
        return make_member(expr(e->lhs, env), e->name, e->loc);
      }
      case Expr::Kind::Index:
        return make_index(expr(e->lhs, env), expr(e->rhs, env), e->loc);
      case Expr::Kind::Not:
        return make_not(expr(e->lhs, env), e->loc);
      case Expr::Kind::Binary:
        return make_binary(e->op, expr(e->lhs, env), expr(e->rhs, env), e->loc);
    }
    return e;
  }

  // Base names assigned anywhere inside `stmts`, in program order.
  static void assigned(const std::vector<Stmt>& stmts, std::vector<std::string>& out) {
    auto add = [&](const std::string& n) {
      if (!n.empty() && n != "_" && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    };
    walk_stmts(stmts, [&](const Stmt& s) {
      switch (s.kind) {
        case StmtKind::Dec:
        case StmtKind::Assign:
        case StmtKind::AssignIndex:
        case StmtKind::Load:
          add(s.base.empty() ? s.target : s.base);
          break;
        case StmtKind::Call:
          for (const auto& o : s.outs) add(o);
          break;
        default:
          break;
      }
    });
  }

  // A name with a single definition and no phi keeps its spelling.
  std::string define(const std::string& name, Env& env) {
    bool keep = name.find('.') == std::string::npos && defs_[name] == 1 && !counter_.count(name) &&
                !c_.find_state(name) &&
                std::none_of(f_.params.begin(), f_.params.end(), [&](const Param& p) { return p.name == name; });
    auto v = keep ? name : fresh(name);
    if (keep) counter_[name] = 0;
    env[name] = v;
    return v;
  }

  std::vector<Stmt> block(const std::vector<Stmt>& in, Env& env) {
    std::vector<Stmt> out;
    for (const auto& s : in) stmt(s, env, out);
    return out;
  }

  void check_not_iterator(const std::string& name, SourceLoc loc) const {
    if (is_iterator(name)) throw FrontError(loc, "assignment to loop iterator '" + name + "'");
  }

  void stmt(const Stmt& s, Env& env, std::vector<Stmt>& out) {
    Stmt r = s;
    switch (s.kind) {
      case StmtKind::Dec: {
        check_not_iterator(s.target, s.loc);
        if (s.type == "Struct") {
          out.push_back(r);
          for (const auto& field : fields_[s.target]) {
            Stmt z;
            z.kind = StmtKind::Assign;
            z.loc = s.loc;
            z.base = field;
            z.expr = make_num(0, s.loc);
            z.target = define(field, env);
            out.push_back(std::move(z));
          }
          return;
        }
        r.base = s.target;
        r.target = define(s.target, env);
        out.push_back(std::move(r));
        return;
      }
      case StmtKind::Assign:
      case StmtKind::Load: {
        check_not_iterator(s.target, s.loc);
        r.expr = expr(s.expr, env);
        if (is_state(s.target) && !env.count(s.target)) {
          out.push_back(std::move(r));  // state write, rejected by extract_func
          return;
        }
        r.base = s.target;
        r.target = define(s.target, env);
        out.push_back(std::move(r));
        return;
      }
      case StmtKind::AssignIndex: {
        check_not_iterator(s.target, s.loc);
        r.index = expr(s.index, env);
        r.expr = expr(s.expr, env);
        if (is_state(s.target) && !env.count(s.target)) {
          out.push_back(std::move(r));
          return;
        }
        auto it = env.find(s.target);
        if (it == env.end()) throw FrontError(s.loc, "element write to undefined array '" + s.target + "'");
        r.base = s.target;
        r.source = it->second;
        r.target = define(s.target, env);
        out.push_back(std::move(r));
        return;
      }
      case StmtKind::Require:
      case StmtKind::Return:
        if (r.expr) r.expr = expr(s.expr, env);
        for (auto& a : r.args) a = expr(a, env);
        out.push_back(std::move(r));
        return;
      case StmtKind::Phi:
        throw FrontError(s.loc, "phi in source input");
      case StmtKind::Call: {
        for (auto& a : r.args) a = expr(a, env);
        r.out_bases = s.outs;
        for (auto& o : r.outs) {
          if (o == "_") continue;
          check_not_iterator(o, s.loc);
          if (is_state(o) && !env.count(o)) continue;
          o = define(o, env);
        }
        out.push_back(std::move(r));
        return;
      }
      case StmtKind::If: {
        r.expr = expr(s.expr, env);
        Env then_env = env, else_env = env;
        r.body = block(s.body, then_env);
        r.orelse = block(s.orelse, else_env);
        r.phis.clear();
        std::vector<std::string> names;
        assigned(s.body, names);
        assigned(s.orelse, names);
        for (const auto& x : names) {
          auto before = env.find(x);
          if (before == env.end()) continue;  // branch-local
          const auto& t = then_env.at(x);
          const auto& e = else_env.at(x);
          if (t == before->second && e == before->second) continue;
          Stmt phi;
          phi.kind = StmtKind::Phi;
          phi.loc = s.loc;
          phi.base = x;
          phi.outs = {t, e};
          phi.target = define(x, env);
          r.phis.push_back(std::move(phi));
        }
        out.push_back(std::move(r));
        return;
      }
      case StmtKind::For: {
        if (env.count(s.target)) throw FrontError(s.loc, "loop iterator '" + s.target + "' shadows a local");
        r.expr = expr(s.expr, env);
        std::vector<std::string> names;
        assigned(s.body, names);
        for (const auto& x : names)
          if (x == s.target) {
            SourceLoc loc = s.loc;
            walk_stmts(s.body, [&](const Stmt& b) {
              if (b.target == x || std::find(b.outs.begin(), b.outs.end(), x) != b.outs.end()) loc = b.loc;
            });
            throw FrontError(loc, "assignment to loop iterator '" + x + "'");
          }
        Env body_env = env;
        std::vector<std::pair<std::string, std::string>> heads;  // base, header version
        for (const auto& x : names) {
          if (!env.count(x)) continue;
          heads.emplace_back(x, define(x, body_env));
        }
        iterators_.push_back(s.target);
        auto body = block(s.body, body_env);
        iterators_.pop_back();
        r.body.clear();
        for (const auto& [x, h] : heads) {
          Stmt phi;
          phi.kind = StmtKind::Phi;
          phi.loc = s.loc;
          phi.base = x;
          phi.target = h;
          phi.outs = {env.at(x), body_env.at(x)};
          r.body.push_back(std::move(phi));
          env[x] = body_env.at(x);
        }
        for (auto& b : body) r.body.push_back(std::move(b));
        out.push_back(std::move(r));
        return;
      }
    }
  }
};

void number(std::vector<Stmt>& stmts, int& next) {
  for (auto& s : stmts) {
    s.id = next++;
    number(s.body, next);
    number(s.orelse, next);
    number(s.phis, next);
  }
}

// Runs on source (pre-SSA) functions: any definition of a state name is a write.
std::string state_write(const Function& f, const Contract& c) {
  std::string hit;
  walk_stmts(f.body, [&](const Stmt& s) {
    if (!hit.empty()) return;
    switch (s.kind) {
      case StmtKind::Assign:
      case StmtKind::AssignIndex:
      case StmtKind::Load:
        if (c.find_state(s.target)) hit = s.target + " at " + to_string(s.loc);
        break;
      case StmtKind::Call:
        for (const auto& o : s.outs)
          if (c.find_state(o)) hit = o + " at " + to_string(s.loc);
        break;
      default:
        break;
    }
  });
  return hit;
}

}  // namespace

Function to_ssa(const Function& f, const Contract& c) { return Renamer(f, c).run(); }

const Function* FuncObj::find(const std::string& name) const {
  for (const auto& f : funcs)
    if (f.name == name) return &f;
  return nullptr;
}

bool FuncObj::is_state(const std::string& name) const {
  return std::any_of(states.begin(), states.end(), [&](const StateDecl& s) { return s.name == name; });
}

bool FuncObj::is_oracle_state(const std::string& name) const {
  return std::any_of(states.begin(), states.end(),
                     [&](const StateDecl& s) { return s.name == name && s.oracle; });
}

bool FuncObj::is_extern(const std::string& name) const {
  return std::any_of(externs.begin(), externs.end(), [&](const ExternDecl& x) { return x.name == name; });
}

bool FuncObj::is_oracle_extern(const std::string& name) const {
  return std::any_of(externs.begin(), externs.end(),
                     [&](const ExternDecl& x) { return x.name == name && x.oracle; });
}

FuncObj extract_func(const Contract& c, const std::string& entry) {
  const Function* root = c.find_function(entry);
  if (!root) throw FrontError({}, "entry function '" + entry + "' not found");
  if (!root->is_public()) throw FrontError(root->loc, "entry function '" + entry + "' is not public");

  FuncObj obj;
  obj.entry = entry;
  obj.states = c.states;
  obj.externs = c.externs;

  std::vector<const Function*> order;
  std::set<std::string> done, active;
  std::function<void(const Function&)> visit = [&](const Function& f) {
    if (done.count(f.name)) return;
    if (!active.insert(f.name).second)
      throw FrontError(f.loc, "recursive call cycle through '" + f.name + "'");
    order.push_back(&f);
    walk_stmts(f.body, [&](const Stmt& s) {
      if (s.kind != StmtKind::Call) return;
      if (const Function* g = c.find_function(s.callee)) {
        visit(*g);
      } else if (!c.find_extern(s.callee)) {
        throw FrontError(s.loc, "call to undeclared function '" + s.callee + "'");
      }
    });
    active.erase(f.name);
    done.insert(f.name);
  };
  visit(*root);

  for (const Function* f : order) {
    auto hit = state_write(*f, c);
    if (!hit.empty()) throw FrontError(f->loc, "function '" + f->name + "' writes state " + hit);
  }

  int next = 0;
  for (const Function* f : order) {
    obj.funcs.push_back(to_ssa(*f, c));
    number(obj.funcs.back().body, next);
  }
  return obj;
}

}  // namespace ordev::front
