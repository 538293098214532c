#include "ordev/summary/summary.hpp"

#include <algorithm>

#include "ordev/dsl/normalize.hpp"
#include "ordev/dsl/printer.hpp"
#include "ordev/front/printer.hpp"

namespace ordev::summary {

using dsl::NodePtr;
using front::BinOp;
using front::Expr;
using front::ExprPtr;
using front::Stmt;
using front::StmtKind;

namespace {

dsl::CmpOp cmp_of(BinOp op) {
  switch (op) {
    case BinOp::Gt: return dsl::CmpOp::Gt;
    case BinOp::Ge: return dsl::CmpOp::Ge;
    case BinOp::Lt: return dsl::CmpOp::Lt;
    case BinOp::Le: return dsl::CmpOp::Le;
    default: return dsl::CmpOp::Eq;
  }
}

bool is_condition(const Expr& e) {
  return e.kind == Expr::Kind::Bool || e.kind == Expr::Kind::Not ||
         (e.kind == Expr::Kind::Binary && front::is_comparison(e.op));
}

// "v.oraclePrice" -> oraclePrice(v)
NodePtr path_node(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot == std::string::npos) return dsl::id(path);
  return dsl::member(path_node(path.substr(0, dot)), path.substr(dot + 1));
}

NodePtr flag(const NodePtr& c) { return dsl::to_int(c); }

std::set<std::string> defined_in(const std::vector<Stmt>& stmts) {
  std::set<std::string> out;
  front::walk_stmts(stmts, [&](const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Assign:
      case StmtKind::AssignIndex:
      case StmtKind::Load:
      case StmtKind::Phi:
        out.insert(s.target);
        break;
      case StmtKind::Call:
        for (const auto& o : s.outs)
          if (o != "_") out.insert(o);
        break;
      default:
        break;
    }
  });
  return out;
}

bool mentions(const NodePtr& e, const std::string& name) { return dsl::ids(e).count(name) > 0; }

}  // namespace

NodePtr conv_dsl(const ExprPtr& e, const std::set<std::string>& iters) {
  switch (e->kind) {
    case Expr::Kind::Num:
      return dsl::cst(e->num);
    case Expr::Kind::Bool:
      return dsl::boolean(e->truth);
    case Expr::Kind::Id:
      return iters.count(e->name) ? dsl::iter(e->name) : dsl::id(e->name);
    case Expr::Kind::Index:
      return dsl::index(conv_dsl(e->lhs, iters), conv_dsl(e->rhs, iters));
    case Expr::Kind::Member:
      return dsl::member(conv_dsl(e->lhs, iters), e->name);
    case Expr::Kind::Not:
      if (!is_condition(*e->lhs)) throw SummaryError(e->loc, "negation of a numeric expression");
      return dsl::lnot(conv_dsl(e->lhs, iters));
    case Expr::Kind::Binary: {
      NodePtr a = conv_dsl(e->lhs, iters), b = conv_dsl(e->rhs, iters);
      switch (e->op) {
        case BinOp::Add: return dsl::add(a, b);
        case BinOp::Sub: return dsl::sub(a, b);
        case BinOp::Mul: return dsl::mul(a, b);
        case BinOp::Div: return dsl::div(a, b);
        default: return dsl::cmp(cmp_of(e->op), a, b);
      }
    }
  }
  throw SummaryError(e->loc, "unsupported expression");
}

Summarizer::Summarizer(const front::FuncObj& f, const deps::DepSets& d) : f_(f), d_(d) {
  for (const auto& fn : f.funcs)
    front::walk_stmts(fn.body, [&](const Stmt& s) {
      if (s.kind == StmtKind::For) names_.reserve(s.target);
    });
}

NodePtr Summarizer::conv(const ExprPtr& e) const {
  std::set<std::string> iters;
  for (const Stmt* l : loops_) iters.insert(l->target);
  return conv_dsl(e, iters);
}

NodePtr Summarizer::extract_block(const std::string& func, const std::vector<Stmt>& stmts, size_t end,
                                  const NodePtr& e) {
  NodePtr out = e;
  for (size_t k = std::min(end, stmts.size()); k-- > 0;) out = extract_summary(func, stmts[k], out);
  return out;
}

NodePtr Summarizer::extract_summary(const std::string& func, const Stmt& s, const NodePtr& e) {
  switch (s.kind) {
    case StmtKind::Dec:
    case StmtKind::Require:
    case StmtKind::Return:
    case StmtKind::Phi:
      return e;
    case StmtKind::Assign:
    case StmtKind::Load:
      if (!mentions(e, s.target)) return e;
      return dsl::subst_id(e, s.target, conv(s.expr));
    case StmtKind::AssignIndex: {
      if (!mentions(e, s.target)) return e;
      NodePtr pos = conv(s.index), val = conv(s.expr);
      NodePtr out = dsl::rewrite(e, [&](const NodePtr& n) -> NodePtr {
        if (n->kind != dsl::Kind::Index || n->kids[0]->kind != dsl::Kind::Id || n->kids[0]->name != s.target)
          return nullptr;
        const NodePtr& at = n->kids[1];
        if (dsl::equal(at, pos)) return val;
        NodePtr hit = flag(dsl::cmp(dsl::CmpOp::Eq, at, pos));
        return dsl::add(dsl::mul(hit, val), dsl::mul(dsl::sub(dsl::cst(1), hit), dsl::index(dsl::id(s.source), at)));
      });
      if (mentions(out, s.target)) throw SummaryError(s.loc, "array " + s.base + " used other than by element");
      return out;
    }
    case StmtKind::Call:
      return call_summary(func, s, e);
    case StmtKind::If:
      return if_summary(func, s, e);
    case StmtKind::For:
      return loop_summary(func, s, e);
  }
  return e;
}

NodePtr Summarizer::call_summary(const std::string& func, const Stmt& s, const NodePtr& e) {
  bool used = std::any_of(s.outs.begin(), s.outs.end(), [&](const std::string& o) { return o != "_" && mentions(e, o); });
  if (!used) return e;
  std::vector<NodePtr> args;
  for (const auto& a : s.args) args.push_back(conv(a));

  // innermost active loop one of whose dependent expressions is an argument
  NodePtr it;
  for (auto l = loops_.rbegin(); l != loops_.rend() && !it; ++l)
    for (const auto& a : s.args)
      if (d_.ld((*l)->id, a.get())) {
        it = dsl::iter((*l)->target);
        break;
      }

  std::map<std::string, NodePtr> by;
  if (const front::Function* g = f_.find(s.callee)) {
    const auto& comps = function_summary(g->name);
    if (comps.size() < s.outs.size())
      throw SummaryError(s.loc, s.callee + " returns " + std::to_string(comps.size()) + " values");
    std::map<std::string, NodePtr> params;
    std::set<std::string> loop_params;
    for (size_t k = 0; k < g->params.size() && k < args.size(); ++k) {
      params[g->params[k].name] = args[k];
      if (it && dsl::has_free_iter(args[k], it->name)) loop_params.insert(g->params[k].name);
    }
    for (size_t k = 0; k < s.outs.size(); ++k) {
      if (s.outs[k] == "_") continue;
      NodePtr c = comps[k];
      // calls made once per callee invocation become per-iteration inside our loop
      if (it && !loop_params.empty())
        c = dsl::rewrite(c, [&](const NodePtr& n) -> NodePtr {
          if (n->kind != dsl::Kind::Ret || n->kids[1]->kind != dsl::Kind::Null) return nullptr;
          auto used_ids = dsl::ids(n);
          bool dep = std::any_of(loop_params.begin(), loop_params.end(), [&](const std::string& p) { return used_ids.count(p); });
          if (!dep) return nullptr;
          auto kids = n->kids;
          kids[1] = it;
          return dsl::with_kids(n, kids);
        });
      by[s.outs[k]] = dsl::subst_ids(c, [&](const std::string& x) -> NodePtr {
        auto p = params.find(x);
        return p == params.end() ? nullptr : p->second;
      });
    }
  } else {
    bool oracle = f_.is_oracle_extern(s.callee);
    int arity = static_cast<int>(s.outs.size());
    for (size_t k = 0; k < s.outs.size(); ++k) {
      if (s.outs[k] == "_") continue;
      const std::string& base = k < s.out_bases.size() ? s.out_bases[k] : s.outs[k];
      by[s.outs[k]] = dsl::ret(path_node(base), it, s.callee, args, static_cast<int>(k), arity, oracle);
    }
  }
  (void)func;
  return dsl::subst_ids(e, [&](const std::string& x) -> NodePtr {
    auto p = by.find(x);
    return p == by.end() ? nullptr : p->second;
  });
}

NodePtr Summarizer::if_summary(const std::string& func, const Stmt& s, const NodePtr& e) {
  auto names = dsl::ids(e);
  for (const auto& local : defined_in(s.body))
    if (names.count(local)) throw SummaryError(s.loc, local + " is only defined on one branch");
  for (const auto& local : defined_in(s.orelse))
    if (names.count(local)) throw SummaryError(s.loc, local + " is only defined on one branch");
  std::map<std::string, NodePtr> by;
  NodePtr c = conv(s.expr);
  for (const auto& phi : s.phis) {
    if (!names.count(phi.target)) continue;
    if (phi.outs.size() != 2) throw SummaryError(phi.loc, "join with " + std::to_string(phi.outs.size()) + " arms");
    NodePtr vt = extract_block(func, s.body, s.body.size(), dsl::id(phi.outs[0]));
    NodePtr ve = extract_block(func, s.orelse, s.orelse.size(), dsl::id(phi.outs[1]));
    if (dsl::equal(vt, ve)) {
      by[phi.target] = vt;
    } else {
      by[phi.target] = dsl::add(dsl::mul(vt, flag(c)), dsl::mul(ve, dsl::sub(dsl::cst(1), flag(c))));
    }
  }
  return dsl::subst_ids(e, [&](const std::string& x) -> NodePtr {
    auto p = by.find(x);
    return p == by.end() ? nullptr : p->second;
  });
}

namespace {

struct Carried {
  std::string head, init, back;
  bool array = false;
  bool accumulates = false;
  NodePtr body;  // accumulator: the increment; otherwise the value at the end of an iteration
  std::vector<std::string> needs;  // heads of other carried values used by `body`
  std::string binder;
};

}  // namespace

NodePtr Summarizer::loop_summary(const std::string& func, const Stmt& loop, const NodePtr& e) {
  std::vector<Carried> carried;
  std::map<std::string, size_t> by_back, by_head;
  size_t head_end = 0;
  while (head_end < loop.body.size() && loop.body[head_end].kind == StmtKind::Phi) {
    const Stmt& p = loop.body[head_end++];
    Carried c;
    c.head = p.target;
    c.init = p.outs.at(0);
    c.back = p.outs.at(1);
    by_back[c.back] = carried.size();
    by_head[c.head] = carried.size();
    carried.push_back(c);
  }
  auto names = dsl::ids(e);
  std::set<std::string> locals = defined_in(loop.body);
  bool touched = false;
  for (const auto& n : names) {
    if (!locals.count(n)) continue;
    if (!by_back.count(n)) throw SummaryError(loop.loc, "value of " + n + " after the loop is not summarizable");
    touched = true;
  }
  if (!touched) return e;

  // Arrays updated element-wise at the iterator read their initial element.
  std::map<std::string, std::string> assigned_at;  // AssignIndex target -> source
  bool elementwise_only = true;
  front::walk_stmts(loop.body, [&](const Stmt& s) {
    if (s.kind == StmtKind::AssignIndex) {
      assigned_at[s.target] = s.source;
      if (!(s.index->kind == Expr::Kind::Id && s.index->name == loop.target)) elementwise_only = false;
    }
  });
  for (auto& c : carried) {
    std::string v = c.back;
    while (assigned_at.count(v)) v = assigned_at[v];
    if (v != c.back && v == c.head) c.array = true;
  }

  NodePtr it = dsl::iter(loop.target);
  loops_.push_back(&loop);
  std::vector<size_t> order;
  std::map<size_t, int> state;  // 1 visiting, 2 done
  std::function<void(size_t)> visit = [&](size_t k) {
    Carried& c = carried[k];
    if (state[k] == 2) return;
    if (state[k] == 1) throw SummaryError(loop.loc, c.head + " and another loop value depend on each other");
    state[k] = 1;
    if (c.array) throw SummaryError(loop.loc, "array " + c.back + " is read after the loop");
    NodePtr b = extract_block(func, loop.body, loop.body.size(), dsl::id(c.back));
    b = dsl::rewrite(b, [&](const NodePtr& n) -> NodePtr {
      if (n->kind != dsl::Kind::Index || n->kids[0]->kind != dsl::Kind::Id) return nullptr;
      auto h = by_head.find(n->kids[0]->name);
      if (h == by_head.end() || !carried[h->second].array) return nullptr;
      if (!elementwise_only || !dsl::equal(n->kids[1], it))
        throw SummaryError(loop.loc, "array " + carried[h->second].head + " is not updated element-wise");
      return dsl::index(dsl::id(carried[h->second].init), it);
    });
    if (mentions(b, c.head)) {
      dsl::Poly rest = dsl::normalize(b) - dsl::poly_atom(dsl::id(c.head));
      NodePtr inc = dsl::to_expr(rest);
      if (mentions(inc, c.head)) throw SummaryError(loop.loc, c.head + " is not an accumulation");
      c.accumulates = true;
      c.body = inc;
    } else {
      c.body = b;
    }
    for (const auto& n : dsl::ids(c.body)) {
      auto h = by_head.find(n);
      if (h == by_head.end()) continue;
      if (carried[h->second].array) throw SummaryError(loop.loc, "array " + n + " is read other than at the iterator");
      c.needs.push_back(n);
      visit(h->second);
    }
    state[k] = 2;
    order.push_back(k);
  };
  for (const auto& n : names)
    if (by_back.count(n)) visit(by_back[n]);
  loops_.pop_back();

  for (size_t k : order) {
    if (!carried[k].accumulates) continue;
    auto [b, fresh] = binders_.try_emplace({loop.id, carried[k].head});
    if (fresh) b->second = names_.next();
    carried[k].binder = b->second;
  }

  // Value of a carried local at the start of iteration t.
  std::function<NodePtr(size_t, const NodePtr&)> value = [&](size_t k, const NodePtr& t) -> NodePtr {
    const Carried& c = carried[k];
    auto at = [&](const NodePtr& q) {
      NodePtr b = dsl::subst_iter(c.body, loop.target, q);
      return dsl::subst_ids(b, [&](const std::string& x) -> NodePtr {
        auto h = by_head.find(x);
        if (h == by_head.end() || h->second == k) return nullptr;
        return value(h->second, q);
      });
    };
    if (c.accumulates) return dsl::add(dsl::id(c.init), dsl::sum(at(dsl::iter(c.binder)), c.binder, t));
    NodePtr ran = flag(dsl::cmp(dsl::CmpOp::Gt, t, dsl::cst(0)));
    return dsl::add(dsl::mul(ran, at(dsl::sub(t, dsl::cst(1)))), dsl::mul(dsl::sub(dsl::cst(1), ran), dsl::id(c.init)));
  };

  NodePtr n = conv(loop.expr);
  std::map<std::string, NodePtr> by;
  for (const auto& name : names)
    if (by_back.count(name)) by[name] = value(by_back[name], n);
  return dsl::subst_ids(e, [&](const std::string& x) -> NodePtr {
    auto p = by.find(x);
    return p == by.end() ? nullptr : p->second;
  });
}

const std::vector<NodePtr>& Summarizer::function_summary(const std::string& func) {
  if (auto it = fn_cache_.find(func); it != fn_cache_.end()) return it->second;
  const front::Function* g = f_.find(func);
  if (!g) throw SummaryError({}, "unknown function " + func);
  if (!in_progress_.insert(func).second) throw SummaryError(g->loc, "recursive call to " + func);
  auto saved = loops_;
  loops_.clear();
  std::vector<NodePtr> out;
  for (size_t k = g->body.size(); k-- > 0;) {
    const Stmt& s = g->body[k];
    if (s.kind != StmtKind::Return) continue;
    for (const auto& a : s.args) out.push_back(extract_block(func, g->body, k, conv(a)));
    break;
  }
  loops_ = saved;
  in_progress_.erase(func);
  return fn_cache_[func] = out;
}

std::vector<Constraint> Summarizer::code_summary() {
  const front::Function& entry = f_.entry_function();
  std::vector<Constraint> out;
  std::set<std::string> allowed;
  for (const auto& p : entry.params) allowed.insert(p.name);
  for (const auto& st : f_.states) allowed.insert(st.name);
  for (const Stmt* r : deps::constraint_scope(f_, d_)) {
    size_t at = 0;
    while (&entry.body[at] != r) ++at;
    Constraint c;
    c.stmt = r->id;
    c.loc = r->loc;
    c.source = front::print_expr(*r->expr);
    NodePtr seed = conv(r->expr);
    if (!dsl::is_constraint(*seed)) seed = dsl::lnot(dsl::cmp(dsl::CmpOp::Eq, seed, dsl::cst(0)));
    c.expr = extract_block(entry.name, entry.body, at, seed);
    for (const auto& name : dsl::ids(c.expr))
      if (!allowed.count(name)) throw SummaryError(r->loc, "unresolved local " + name + " in summary");
    out.push_back(c);
  }
  return out;
}

std::vector<Constraint> code_summary(const front::FuncObj& f, const deps::DepSets& d) {
  return Summarizer(f, d).code_summary();
}

std::vector<NodePtr> return_summary(const front::FuncObj& f, const deps::DepSets& d) {
  Summarizer s(f, d);
  return s.function_summary(f.entry);
}

namespace {

void collect_leaves(const NodePtr& n, std::vector<std::string>& binders, const front::FuncObj& f,
                    const std::set<std::string>& excluded, std::set<std::string>& vec, std::set<std::string>& sca) {
  switch (n->kind) {
    case dsl::Kind::Int:
    case dsl::Kind::Const:
    case dsl::Kind::Bool:
    case dsl::Kind::Iter:
    case dsl::Kind::Null:
      return;
    case dsl::Kind::Sum:
      binders.push_back(n->name);
      collect_leaves(n->kids[0], binders, f, excluded, vec, sca);
      binders.pop_back();
      return;  // loop bounds are not counted
    case dsl::Kind::Id:
      if (excluded.count(n->name)) return;
      [[fallthrough]];
    case dsl::Kind::Index:
    case dsl::Kind::Member:
    case dsl::Kind::Ret: {
      auto free = dsl::free_iters(n);
      bool vector = std::any_of(free.begin(), free.end(), [&](const std::string& it) {
        return std::find(binders.begin(), binders.end(), it) != binders.end();
      });
      NodePtr shape = n;
      for (const auto& it : free) shape = dsl::subst_iter(shape, it, dsl::id("*"));
      (vector ? vec : sca).insert(dsl::print(shape));
      return;
    }
    default:
      for (const auto& k : n->kids) collect_leaves(k, binders, f, excluded, vec, sca);
  }
}

}  // namespace

Stats stats(const front::FuncObj& f, const std::vector<NodePtr>& exprs, int require_count,
            const std::set<std::string>& excluded) {
  Stats s;
  s.require_count = require_count;
  for (const auto& fn : f.funcs)
    front::walk_stmts(fn.body, [&](const Stmt& st) {
      if (st.kind == StmtKind::For) ++s.loops;
    });
  std::set<std::string> vec, sca;
  for (const auto& e : exprs) {
    std::vector<std::string> binders;
    collect_leaves(e, binders, f, excluded, vec, sca);
  }
  s.vectors.assign(vec.begin(), vec.end());
  s.scalars.assign(sca.begin(), sca.end());
  s.vector_vars = static_cast<int>(vec.size());
  s.scalar_vars = static_cast<int>(sca.size());
  return s;
}

nlohmann::json to_json(const Constraint& c) {
  return {{"stmt", c.stmt},
          {"line", c.loc.line},
          {"source", c.source},
          {"text", dsl::print(dsl::tidy(c.expr))},
          {"tree", dsl::to_json(c.expr)}};
}

}  // namespace ordev::summary
