#include "ordev/dsl/node.hpp"

#include <algorithm>

namespace ordev::dsl {

const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "==";
  }
  return "?";
}

namespace {

NodePtr make(Kind k, std::vector<NodePtr> kids = {}, std::string name = {}) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->kids = std::move(kids);
  n->name = std::move(name);
  return n;
}

}  // namespace

NodePtr cst(Rational v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = std::move(v);
  return n;
}

NodePtr boolean(bool v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Bool;
  n->truth = v;
  return n;
}

NodePtr id(std::string name) { return make(Kind::Id, {}, std::move(name)); }
NodePtr iter(std::string name) { return make(Kind::Iter, {}, std::move(name)); }
NodePtr null() { return make(Kind::Null); }
NodePtr index(NodePtr base, NodePtr pos) { return make(Kind::Index, {std::move(base), std::move(pos)}); }
NodePtr member(NodePtr base, std::string field) { return make(Kind::Member, {std::move(base)}, std::move(field)); }

NodePtr ret(NodePtr dest, NodePtr it, std::string callee, std::vector<NodePtr> args, int slot, int arity,
            bool oracle) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Ret;
  n->kids = {std::move(dest), it ? std::move(it) : null()};
  for (auto& a : args) n->kids.push_back(std::move(a));
  n->callee = std::move(callee);
  n->slot = slot;
  n->arity = arity;
  n->oracle = oracle;
  return n;
}

NodePtr add(NodePtr a, NodePtr b) { return make(Kind::Add, {std::move(a), std::move(b)}); }
NodePtr sub(NodePtr a, NodePtr b) { return make(Kind::Sub, {std::move(a), std::move(b)}); }
NodePtr mul(NodePtr a, NodePtr b) { return make(Kind::Mul, {std::move(a), std::move(b)}); }
NodePtr div(NodePtr a, NodePtr b) { return make(Kind::Div, {std::move(a), std::move(b)}); }
NodePtr neg(NodePtr a) { return make(Kind::Neg, {std::move(a)}); }
NodePtr sum(NodePtr body, std::string it, NodePtr ub) {
  return make(Kind::Sum, {std::move(body), std::move(ub)}, std::move(it));
}
NodePtr to_int(NodePtr c) { return make(Kind::Int, {std::move(c)}); }
NodePtr cmp(CmpOp op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Cmp;
  n->cmp = op;
  n->kids = {std::move(a), std::move(b)};
  return n;
}
NodePtr lnot(NodePtr c) { return make(Kind::Not, {std::move(c)}); }

bool is_constraint(const Node& n) { return n.kind == Kind::Bool || n.kind == Kind::Cmp || n.kind == Kind::Not; }

bool is_leaf(const Node& n) {
  return n.kind == Kind::Id || n.kind == Kind::Index || n.kind == Kind::Member || n.kind == Kind::Ret;
}

namespace {

void key_into(const NodePtr& n, std::vector<std::string>& binders, std::string& out) {
  auto kid = [&](size_t k) { key_into(n->kids[k], binders, out); };
  switch (n->kind) {
    case Kind::Const:
      out += n->value.get_str();
      return;
    case Kind::Bool:
      out += n->truth ? "true" : "false";
      return;
    case Kind::Id:
      out += n->name;
      return;
    case Kind::Iter: {
      auto it = std::find(binders.rbegin(), binders.rend(), n->name);
      if (it != binders.rend())
        out += "#" + std::to_string(std::distance(it, binders.rend()) - 1);
      else
        out += "?" + n->name;
      return;
    }
    case Kind::Null:
      out += "null";
      return;
    case Kind::Index:
      out += "index(";
      kid(0);
      out += ",";
      kid(1);
      out += ")";
      return;
    case Kind::Member:
      out += n->name + "(";
      kid(0);
      out += ")";
      return;
    case Kind::Ret:
      out += "ret(";
      kid(0);
      out += ",";
      kid(1);
      out += ")";
      return;
    case Kind::Sum:
      out += "sum(";
      binders.push_back(n->name);
      kid(0);
      binders.pop_back();
      out += ",";
      kid(1);
      out += ")";
      return;
    case Kind::Cmp:
      out += std::string("cmp") + cmp_text(n->cmp) + "(";
      kid(0);
      out += ",";
      kid(1);
      out += ")";
      return;
    default: {
      static const char* names[] = {"", "", "", "", "", "", "", "add", "sub", "mul", "div", "neg", "", "Int", "", "not", ""};
      out += names[static_cast<int>(n->kind)];
      out += "(";
      for (size_t k = 0; k < n->kids.size(); ++k) {
        if (k) out += ",";
        kid(k);
      }
      out += ")";
      return;
    }
  }
}

}  // namespace

std::string key(const NodePtr& n) {
  std::vector<std::string> binders;
  std::string out;
  key_into(n, binders, out);
  return out;
}

bool equal(const NodePtr& a, const NodePtr& b) { return a == b || key(a) == key(b); }

namespace {

void free_iters_into(const NodePtr& n, std::vector<std::string>& binders, std::set<std::string>& out) {
  if (n->kind == Kind::Iter) {
    if (std::find(binders.begin(), binders.end(), n->name) == binders.end()) out.insert(n->name);
    return;
  }
  if (n->kind == Kind::Sum) {
    binders.push_back(n->name);
    free_iters_into(n->kids[0], binders, out);
    binders.pop_back();
    free_iters_into(n->kids[1], binders, out);
    return;
  }
  for (const auto& k : n->kids) free_iters_into(k, binders, out);
}

}  // namespace

std::set<std::string> free_iters(const NodePtr& n) {
  std::vector<std::string> binders;
  std::set<std::string> out;
  free_iters_into(n, binders, out);
  return out;
}

std::set<std::string> ids(const NodePtr& n) {
  std::set<std::string> out;
  std::function<void(const NodePtr&)> go = [&](const NodePtr& x) {
    if (x->kind == Kind::Id) out.insert(x->name);
    // a ret destination is a label, not a reference
    for (size_t k = x->kind == Kind::Ret ? 1 : 0; k < x->kids.size(); ++k) go(x->kids[k]);
  };
  go(n);
  return out;
}

bool has_free_iter(const NodePtr& n, const std::string& it) { return free_iters(n).count(it) > 0; }

bool contains(const NodePtr& n, const std::function<bool(const Node&)>& pred) {
  if (pred(*n)) return true;
  return std::any_of(n->kids.begin(), n->kids.end(), [&](const NodePtr& k) { return contains(k, pred); });
}

bool contains_sum(const NodePtr& n) {
  return contains(n, [](const Node& x) { return x.kind == Kind::Sum; });
}

NodePtr with_kids(const NodePtr& n, std::vector<NodePtr> kids) {
  bool same = kids.size() == n->kids.size();
  for (size_t k = 0; same && k < kids.size(); ++k) same = kids[k] == n->kids[k];
  if (same) return n;
  auto c = std::make_shared<Node>(*n);
  c->kids = std::move(kids);
  return c;
}

namespace {

std::string fresh_binder(const std::string& base, const std::set<std::string>& avoid) {
  for (int k = 1;; ++k) {
    std::string cand = base + std::to_string(k);
    if (!avoid.count(cand)) return cand;
  }
}

// Generic capture-avoiding substitution. `repl` maps a node to its replacement (or
// nullptr) given the set of currently bound iterators; `intro` is the set of iterator
// names the replacements may introduce free.
NodePtr subst_impl(const NodePtr& n, const std::function<NodePtr(const NodePtr&, const std::set<std::string>&)>& repl,
                   const std::set<std::string>& intro, std::set<std::string>& bound) {
  if (auto r = repl(n, bound)) return r;
  if (n->kind == Kind::Sum) {
    NodePtr ub = subst_impl(n->kids[1], repl, intro, bound);
    std::string it = n->name;
    NodePtr body = n->kids[0];
    if (intro.count(it)) {
      std::set<std::string> avoid = intro;
      for (const auto& f : free_iters(body)) avoid.insert(f);
      for (const auto& b : bound) avoid.insert(b);
      std::string fresh = fresh_binder(it, avoid);
      body = subst_iter(body, it, iter(fresh));
      it = fresh;
    }
    bool had = bound.count(it);
    bound.insert(it);
    NodePtr nb = subst_impl(body, repl, intro, bound);
    if (!had) bound.erase(it);
    if (nb == n->kids[0] && ub == n->kids[1] && it == n->name) return n;
    return sum(nb, it, ub);
  }
  std::vector<NodePtr> kids;
  kids.reserve(n->kids.size());
  for (size_t k = 0; k < n->kids.size(); ++k)
    kids.push_back(n->kind == Kind::Ret && k == 0 ? n->kids[0] : subst_impl(n->kids[k], repl, intro, bound));
  return with_kids(n, std::move(kids));
}

}  // namespace

NodePtr subst_ids(const NodePtr& n, const std::function<NodePtr(const std::string&)>& f) {
  std::set<std::string> intro;
  for (const auto& name : ids(n))
    if (auto r = f(name))
      for (const auto& it : free_iters(r)) intro.insert(it);
  std::set<std::string> bound;
  return subst_impl(
      n,
      [&](const NodePtr& x, const std::set<std::string>&) -> NodePtr {
        if (x->kind != Kind::Id) return nullptr;
        return f(x->name);
      },
      intro, bound);
}

NodePtr subst_id(const NodePtr& n, const std::string& name, const NodePtr& by) {
  return subst_ids(n, [&](const std::string& x) -> NodePtr { return x == name ? by : nullptr; });
}

NodePtr subst_iter(const NodePtr& n, const std::string& it, const NodePtr& by) {
  std::set<std::string> intro = free_iters(by);
  intro.erase(it);
  std::set<std::string> bound;
  return subst_impl(
      n,
      [&](const NodePtr& x, const std::set<std::string>& b) -> NodePtr {
        if (x->kind == Kind::Iter && x->name == it && !b.count(it)) return by;
        return nullptr;
      },
      intro, bound);
}

NodePtr rewrite(const NodePtr& n, const std::function<NodePtr(const NodePtr&)>& f) {
  std::vector<NodePtr> kids;
  kids.reserve(n->kids.size());
  for (const auto& k : n->kids) kids.push_back(rewrite(k, f));
  NodePtr m = with_kids(n, std::move(kids));
  if (auto r = f(m)) return r;
  return m;
}

std::string IterNames::next() {
  static const char* base[] = {"j", "k", "l", "m"};
  while (true) {
    int round = n_ / 4;
    std::string name = base[n_ % 4];
    if (round) name += std::to_string(round);
    ++n_;
    if (taken_.insert(name).second) return name;
  }
}

}  // namespace ordev::dsl
