#include "ordev/app/guard.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ordev/dsl/printer.hpp"
#include "ordev/front/parser.hpp"
#include "ordev/front/printer.hpp"
#include "ordev/summary/summary.hpp"

namespace ordev::app {

using dsl::Kind;
using dsl::NodePtr;

namespace {

int precedence(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Cmp: return 0;
    default: return 3;
  }
}

std::string number_text(const Rational& v) {
  std::string s = ordev::to_string(abs(v));
  if (s.find('/') != std::string::npos) s = "(" + s.substr(0, s.find('/')) + " / " + s.substr(s.find('/') + 1) + ")";
  return v < 0 ? "(0 - " + s + ")" : s;
}

const char* op_text(Kind k) {
  switch (k) {
    case Kind::Add: return " + ";
    case Kind::Sub: return " - ";
    case Kind::Mul: return " * ";
    default: return " / ";
  }
}

std::string wrap(const NodePtr& n) {
  std::string s = source_text(n);
  return precedence(n) < 3 ? "(" + s + ")" : s;
}

std::string method_of(const std::string& callee) {
  auto dot = callee.rfind('.');
  return dot == std::string::npos ? callee : callee.substr(dot + 1);
}

// Last component of a destination path, used to name its reference read.
std::string stem(const NodePtr& dest) {
  switch (dest->kind) {
    case Kind::Id: return dest->name;
    case Kind::Member: return dest->name;
    case Kind::Index: return stem(dest->kids[0]);
    default: return "price";
  }
}

void oracle_leaves(const NodePtr& n, std::vector<NodePtr>& out) {
  if (n->kind == Kind::Ret) {
    if (n->oracle && std::none_of(out.begin(), out.end(), [&](const NodePtr& x) { return dsl::equal(x, n); }))
      out.push_back(n);
    return;
  }
  for (const auto& k : n->kids) oracle_leaves(k, out);
}

NodePtr replace_leaves(const NodePtr& n, const std::map<std::string, NodePtr>& by) {
  return dsl::rewrite(n, [&](const NodePtr& x) -> NodePtr {
    if (!dsl::is_leaf(*x)) return nullptr;
    auto it = by.find(dsl::print(x));
    return it == by.end() ? nullptr : it->second;
  });
}

}  // namespace

std::string source_text(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Const: return number_text(n->value);
    case Kind::Bool: return n->truth ? "true" : "false";
    case Kind::Id:
    case Kind::Iter: return n->name;
    case Kind::Member: return source_text(n->kids[0]) + "." + n->name;
    case Kind::Index: return source_text(n->kids[0]) + "[" + source_text(n->kids[1]) + "]";
    case Kind::Ret: return source_text(n->kids[0]);
    case Kind::Neg: return "(0 - " + (precedence(n->kids[0]) < 2 ? wrap(n->kids[0]) : source_text(n->kids[0])) + ")";
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div: {
      const auto &a = n->kids[0], &b = n->kids[1];
      int p = precedence(n);
      std::string l = precedence(a) < p ? wrap(a) : source_text(a);
      bool tight = n->kind == Kind::Sub || n->kind == Kind::Div;
      std::string r = precedence(b) < p || (tight && precedence(b) == p) ? wrap(b) : source_text(b);
      return l + op_text(n->kind) + r;
    }
    case Kind::Cmp: return source_text(n->kids[0]) + " " + dsl::cmp_text(n->cmp) + " " + source_text(n->kids[1]);
    case Kind::Not: return "!(" + source_text(n->kids[0]) + ")";
    default: throw GuardError("no source form for " + dsl::print(n));
  }
}

GuardSpec generate_guard(const opt::OptResult& r, const model::OptModel& m, const GuardOptions& o) {
  if (r.status != opt::Status::Optimal || !r.value) throw GuardError("a guard needs an optimal max-delta result");
  if (m.prices.empty()) throw GuardError("the model has no oracle symbols to guard");
  GuardSpec g;
  g.delta = *r.value;
  g.reference = o.reference;
  g.tolerance_form = !m.checks.empty();
  if (g.tolerance_form) {
    g.tol_num = o.tol_num;
    g.tol_den = o.tol_den;
  }
  for (const auto& p : m.prices) g.symbols.push_back(p.leaf);

  std::vector<NodePtr> exprs;
  if (g.tolerance_form) {
    for (const auto& c : m.checks) exprs.push_back(model::unroll(c.expr, m.bounds));
  } else {
    for (const auto& p : m.prices) exprs.push_back(p.node);
  }

  std::map<std::string, std::string> ref_of;  // printed leaf -> reference variable
  std::map<std::string, int> used_stems;
  std::ostringstream out;
  std::string tol = g.tolerance_form ? g.tol_num + " / " + g.tol_den : number_text(g.delta);
  for (const auto& e : exprs) {
    GuardBlock b;
    b.expr = source_text(e);
    std::vector<NodePtr> leaves;
    oracle_leaves(e, leaves);
    if (leaves.empty()) continue;
    std::map<std::string, NodePtr> swap;
    for (const auto& leaf : leaves) {
      std::string printed = dsl::print(leaf);
      auto it = ref_of.find(printed);
      if (it == ref_of.end()) {
        std::string s = stem(leaf->kids[0]);
        int k = used_stems[s]++;
        std::string name = s + "Ref" + (k ? std::to_string(k) : "");
        it = ref_of.emplace(printed, name).first;
        out << "call(" << o.reference << "." << method_of(leaf->callee);
        for (size_t a = 2; a < leaf->kids.size(); ++a) out << ", " << source_text(leaf->kids[a]);
        out << ", " << name << ")\n";
      }
      b.leaves.push_back(printed);
      b.refs.push_back(it->second);
      swap[printed] = dsl::id(it->second);
    }
    NodePtr ref_expr = replace_leaves(e, swap);
    std::string p = source_text(e), q = source_text(ref_expr);
    out << "require(" << p << " - " << wrap(ref_expr) << " <= " << tol << " * " << wrap(ref_expr) << ")\n";
    out << "require(" << q << " - " << wrap(e) << " <= " << tol << " * " << wrap(ref_expr) << ")\n";
    g.blocks.push_back(std::move(b));
  }
  if (g.blocks.empty()) throw GuardError("no guarded expression reads an oracle");
  g.rendered = out.str();
  if (g.delta == 0) {
    g.warnings.push_back(g.tolerance_form ? "tolerance 0: set " + g.tol_num + " to 0, quotes must equal the reference quote exactly"
                                          : "deviation bound 0: the guard requires every oracle price to equal its reference");
  }
  return g;
}

model::OptModel apply_guard(const model::OptModel& m, const GuardSpec& g, const Rational& tol) {
  std::vector<front::Stmt> stmts = front::parse_statements(g.rendered);
  std::map<std::string, NodePtr> leaf_node;
  for (const auto& p : m.prices) leaf_node[p.leaf] = p.node;

  // oracle side: destination paths read the reported price, references the true one
  std::map<std::string, NodePtr> reported, truthful;
  std::set<std::string> refs_seen;
  for (const auto& v : m.vars) {
    if (v.role != model::Role::State) continue;
    reported[v.leaf] = truthful[v.leaf] = dsl::id(v.name);
  }
  if (g.tolerance_form) {
    reported[g.tol_num] = truthful[g.tol_num] = dsl::cst(tol);
    reported[g.tol_den] = truthful[g.tol_den] = dsl::cst(1);
  }

  model::OptModel out = m;
  size_t at = 0;
  for (const auto& b : g.blocks) {
    for (size_t i = 0; i < b.leaves.size(); ++i) {
      auto it = leaf_node.find(b.leaves[i]);
      if (it == leaf_node.end()) throw GuardError("guard names " + b.leaves[i] + ", which is not a model price");
      const model::PricePair& pair = *std::find_if(m.prices.begin(), m.prices.end(), [&](const auto& p) { return p.leaf == b.leaves[i]; });
      reported[dsl::print(it->second->kids[0])] = dsl::id(pair.reported);
      truthful[dsl::print(it->second->kids[0])] = dsl::id(pair.truth);
      reported[b.refs[i]] = truthful[b.refs[i]] = dsl::id(pair.truth);
      if (refs_seen.insert(b.refs[i]).second) {
        if (at >= stmts.size() || stmts[at].kind != front::StmtKind::Call || stmts[at].outs != std::vector<std::string>{b.refs[i]})
          throw GuardError("expected the reference read of " + b.refs[i]);
        ++at;
      }
    }
    for (int k = 0; k < 2; ++k, ++at) {
      if (at >= stmts.size() || stmts[at].kind != front::StmtKind::Require) throw GuardError("expected a guard require");
      NodePtr c = summary::conv_dsl(stmts[at].expr);
      NodePtr oracle = replace_leaves(c, reported), truth = replace_leaves(c, truthful);
      for (const auto& x : dsl::ids(oracle))
        if (!out.var(x)) throw GuardError("guard reads '" + x + "', which the model does not know");
      out.pairs.push_back({model::simplify(oracle), model::simplify(truth), "guard: " + front::print_expr(*stmts[at].expr)});
    }
    // later blocks may reuse these paths for other leaves
    for (const auto& l : b.leaves) {
      reported.erase(dsl::print(leaf_node[l]->kids[0]));
      truthful.erase(dsl::print(leaf_node[l]->kids[0]));
    }
  }
  if (at != stmts.size()) throw GuardError("unexpected statement after the last guard block");
  return out;
}

nlohmann::json to_json(const GuardSpec& g) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : g.blocks) blocks.push_back({{"expr", b.expr}, {"leaves", b.leaves}, {"refs", b.refs}});
  nlohmann::json j = {{"delta", ordev::to_string(g.delta)},
                      {"symbols", g.symbols},
                      {"reference", g.reference},
                      {"blocks", blocks},
                      {"rendered", g.rendered},
                      {"warnings", g.warnings}};
  if (g.tolerance_form) j["tolerance"] = {{"num", g.tol_num}, {"den", g.tol_den}, {"value", ordev::to_string(g.delta)}};
  return j;
}

}  // namespace ordev::app
