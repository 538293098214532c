#include "ordev/dsl/normalize.hpp"

#include <vector>

namespace ordev::dsl {

bool Poly::is_const() const { return terms.empty() || (terms.size() == 1 && terms.begin()->first.empty()); }

Rational Poly::const_value() const {
  auto it = terms.find(Mono{});
  return it == terms.end() ? Rational(0) : it->second;
}

Poly poly_const(const Rational& c) {
  Poly p;
  if (c != 0) p.terms[Mono{}] = c;
  return p;
}

Poly poly_atom(const NodePtr& atom) {
  Poly p;
  auto k = key(atom);
  p.atoms[k] = atom;
  p.terms[Mono{{k, 1}}] = 1;
  return p;
}

namespace {

void merge_atoms(Poly& into, const Poly& from) {
  for (const auto& [k, a] : from.atoms) into.atoms.emplace(k, a);
}

void add_term(Poly& p, const Mono& m, const Rational& c) {
  if (c == 0) return;
  auto [it, fresh] = p.terms.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) p.terms.erase(it);
  }
}

bool idempotent(const Poly& p, const std::string& k) {
  auto it = p.atoms.find(k);
  return it != p.atoms.end() && it->second->kind == Kind::Int;
}

}  // namespace

Poly operator+(const Poly& a, const Poly& b) {
  Poly r = a;
  merge_atoms(r, b);
  for (const auto& [m, c] : b.terms) add_term(r, m, c);
  return r;
}

Poly scale(const Poly& a, const Rational& c) {
  Poly r;
  r.atoms = a.atoms;
  if (c == 0) return r;
  for (const auto& [m, v] : a.terms) r.terms[m] = v * c;
  return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + scale(b, -1); }

Poly operator*(const Poly& a, const Poly& b) {
  Poly r;
  r.atoms = a.atoms;
  merge_atoms(r, b);
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) {
      Mono m = ma;
      for (const auto& [k, e] : mb) {
        int& pw = m[k];
        pw = idempotent(r, k) ? 1 : pw + e;
      }
      add_term(r, m, ca * cb);
    }
  return r;
}

namespace {

Poly mono_poly(const Poly& src, const Mono& m, const Rational& c) {
  Poly p;
  for (const auto& [k, e] : m) p.atoms[k] = src.atoms.at(k);
  p.terms[m] = c;
  return p;
}

// First non-constant coefficient in canonical order.
Rational leading(const Poly& p) {
  for (const auto& [m, c] : p.terms)
    if (!m.empty()) return c;
  return p.const_value();
}

NodePtr mono_expr(const Poly& p, const Mono& m) {
  NodePtr out;
  for (const auto& [k, e] : m)
    for (int i = 0; i < e; ++i) out = out ? mul(out, p.atoms.at(k)) : p.atoms.at(k);
  return out;
}

Poly normalize_sum(const NodePtr& n) {
  const std::string& it = n->name;
  Poly body = normalize(n->kids[0]);
  Poly ub = normalize(n->kids[1]);
  if (ub.is_const() && ub.const_value() == 0) return Poly{};
  NodePtr ub_expr = to_expr(ub);
  Poly out;
  for (const auto& [m, c] : body.terms) {
    Mono dep, indep;
    for (const auto& [k, e] : m) (has_free_iter(body.atoms.at(k), it) ? dep : indep)[k] = e;
    Poly outer = mono_poly(body, indep, c);
    if (dep.empty()) {
      out = out + outer * ub;
    } else {
      NodePtr s = sum(mono_expr(body, dep), it, ub_expr);
      out = out + outer * poly_atom(s);
    }
  }
  return out;
}

NodePtr canonical_leaf(const NodePtr& n) {
  if (n->kind == Kind::Index) return with_kids(n, {to_expr(normalize(n->kids[0])), to_expr(normalize(n->kids[1]))});
  if (n->kind == Kind::Member) return with_kids(n, {to_expr(normalize(n->kids[0]))});
  return n;
}

Poly normalize_int(const NodePtr& operand) {
  if (operand->kind == Kind::Not) return poly_const(1) - normalize_int(operand->kids[0]);
  if (is_constraint(*operand)) {
    NodePtr c = normalize_constraint(operand);
    if (c->kind == Kind::Bool) return poly_const(c->truth ? 1 : 0);
    if (c->kind == Kind::Not) return poly_const(1) - normalize_int(c->kids[0]);
    return poly_atom(to_int(c));
  }
  Poly x = normalize(operand);
  if (x.is_const()) return poly_const(x.const_value() != 0 ? 1 : 0);
  return poly_atom(to_int(to_expr(x)));
}

}  // namespace

Poly normalize(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Const:
      return poly_const(n->value);
    case Kind::Bool:
    case Kind::Cmp:
    case Kind::Not:
    case Kind::Int:
      return normalize_int(n->kind == Kind::Int ? n->kids[0] : n);
    case Kind::Id:
    case Kind::Iter:
    case Kind::Ret:
    case Kind::Index:
    case Kind::Member:
      return poly_atom(canonical_leaf(n));
    case Kind::Null:
      throw DslError("null in arithmetic position");
    case Kind::Add:
      return normalize(n->kids[0]) + normalize(n->kids[1]);
    case Kind::Sub:
      return normalize(n->kids[0]) - normalize(n->kids[1]);
    case Kind::Mul:
      return normalize(n->kids[0]) * normalize(n->kids[1]);
    case Kind::Neg:
      return scale(normalize(n->kids[0]), -1);
    case Kind::Div: {
      Poly num = normalize(n->kids[0]);
      Poly den = normalize(n->kids[1]);
      if (den.is_const()) {
        if (den.const_value() == 0) throw DslError("division by constant zero");
        return scale(num, 1 / den.const_value());
      }
      Rational lead = leading(den);
      Poly unit = scale(den, 1 / lead);
      return scale(num * poly_atom(div(cst(1), to_expr(unit))), 1 / lead);
    }
    case Kind::Sum:
      return normalize_sum(n);
  }
  throw DslError("unreachable");
}

NodePtr normalize_constraint(const NodePtr& c) {
  switch (c->kind) {
    case Kind::Bool:
      return c;
    case Kind::Not: {
      NodePtr in = normalize_constraint(c->kids[0]);
      if (in->kind == Kind::Bool) return boolean(!in->truth);
      if (in->kind == Kind::Not) return in->kids[0];
      if (in->cmp == CmpOp::Eq) return lnot(in);
      // !(p > 0) is -p >= 0 and !(p >= 0) is -p > 0
      CmpOp flipped = in->cmp == CmpOp::Gt ? CmpOp::Ge : CmpOp::Gt;
      return normalize_constraint(cmp(flipped, cst(0), in->kids[0]));
    }
    case Kind::Cmp: {
      NodePtr a = c->kids[0], b = c->kids[1];
      CmpOp op = c->cmp;
      if (op == CmpOp::Lt) std::swap(a, b), op = CmpOp::Gt;
      else if (op == CmpOp::Le) std::swap(a, b), op = CmpOp::Ge;
      Poly p = normalize(a) - normalize(b);
      if (p.is_const()) {
        Rational v = p.const_value();
        bool t = op == CmpOp::Gt ? v > 0 : op == CmpOp::Ge ? v >= 0 : v == 0;
        return boolean(t);
      }
      Rational lead = leading(p);
      Rational s = op == CmpOp::Eq ? Rational(1 / lead) : Rational(1 / abs(lead));
      return cmp(op, to_expr(scale(p, s)), cst(0));
    }
    default: {
      // A bare number used as a condition: true when non-zero.
      Poly p = normalize(c);
      if (p.is_const()) return boolean(p.const_value() != 0);
      return lnot(cmp(CmpOp::Eq, to_expr(scale(p, 1 / leading(p))), cst(0)));
    }
  }
}

namespace {

struct Signed {
  bool negative;
  NodePtr node;
};

NodePtr join(const std::vector<Signed>& items) {
  NodePtr out;
  for (const auto& [negative, node] : items) {
    if (!out) out = negative ? neg(node) : node;
    else out = negative ? sub(out, node) : add(out, node);
  }
  return out ? out : cst(0);
}

Signed term_expr(const Poly& p, const Mono& m, const Rational& c, const std::function<NodePtr(const NodePtr&)>& atom,
                 bool fractions = false) {
  NodePtr prod, den;
  for (const auto& [k, e] : m)
    for (int i = 0; i < e; ++i) {
      const NodePtr& raw = p.atoms.at(k);
      if (fractions && raw->kind == Kind::Div) {
        NodePtr d = atom(raw)->kids[1];
        den = den ? mul(den, d) : d;
        continue;
      }
      NodePtr a = atom(raw);
      prod = prod ? mul(prod, a) : a;
    }
  Rational mag = abs(c);
  if (!prod) {
    prod = cst(mag);
  } else if (mag != 1) {
    prod = mul(cst(mag), prod);
  }
  if (den) prod = div(prod, den);
  return {c < 0, prod};
}

NodePtr poly_expr(const Poly& p, const std::function<NodePtr(const NodePtr&)>& atom) {
  std::vector<Signed> items;
  for (const auto& [m, c] : p.terms) items.push_back(term_expr(p, m, c, atom));
  return join(items);
}

NodePtr pretty_poly(const Poly& p);

NodePtr pretty_atom(const NodePtr& a) {
  if (a->kind == Kind::Sum) return sum(pretty_poly(normalize(a->kids[0])), a->name, pretty_poly(normalize(a->kids[1])));
  if (a->kind == Kind::Div) return div(a->kids[0], pretty_poly(normalize(a->kids[1])));
  if (a->kind == Kind::Int && is_constraint(*a->kids[0])) return to_int(pretty(a->kids[0]));
  return a;
}

// Pulls atoms shared by every term out of a multi-term polynomial.
NodePtr factored(const Poly& p) {
  if (p.terms.size() < 2) return pretty_poly(p);
  Mono common = p.terms.begin()->first;
  for (const auto& [m, c] : p.terms) {
    for (auto it = common.begin(); it != common.end();) {
      auto f = m.find(it->first);
      if (f == m.end()) {
        it = common.erase(it);
      } else {
        it->second = std::min(it->second, f->second);
        ++it;
      }
    }
  }
  if (common.empty()) return pretty_poly(p);
  Poly rest;
  rest.atoms = p.atoms;
  for (const auto& [m, c] : p.terms) {
    Mono r = m;
    for (const auto& [k, e] : common)
      if ((r[k] -= e) == 0) r.erase(k);
    rest.terms[r] = c;
  }
  NodePtr out;
  for (const auto& [k, e] : common)
    for (int i = 0; i < e; ++i) {
      NodePtr a = pretty_atom(p.atoms.at(k));
      out = out ? mul(out, a) : a;
    }
  return mul(out, pretty_poly(rest));
}

NodePtr pretty_poly(const Poly& p) {
  struct Group {
    std::string it;
    NodePtr ub;
    Poly body;
  };
  std::vector<Signed> items;
  std::map<std::string, Group> groups;
  std::vector<std::string> order;
  // constant first so that flags read as (1 - Int(c))
  if (auto it = p.terms.find(Mono{}); it != p.terms.end()) items.push_back({it->second < 0, cst(abs(it->second))});
  for (const auto& [m, c] : p.terms) {
    if (m.empty()) continue;
    std::string sum_key;
    int sums = 0;
    for (const auto& [k, e] : m)
      if (p.atoms.at(k)->kind == Kind::Sum) {
        sums += e;
        sum_key = k;
      }
    if (sums != 1) {
      items.push_back(term_expr(p, m, c, pretty_atom, true));
      continue;
    }
    NodePtr s = p.atoms.at(sum_key);
    std::string gk = key(s->kids[1]);
    Mono other = m;
    other.erase(sum_key);
    Poly outer = mono_poly(p, other, c);
    auto [g, fresh] = groups.try_emplace(gk);
    if (fresh) {
      g->second.it = s->name;
      g->second.ub = s->kids[1];
      order.push_back(gk);
    }
    bool clash = false;
    for (const auto& [k, e] : other) clash = clash || has_free_iter(p.atoms.at(k), g->second.it);
    if (clash) {
      items.push_back(term_expr(p, m, c, pretty_atom, true));
      continue;
    }
    NodePtr body = s->name == g->second.it ? s->kids[0] : subst_iter(s->kids[0], s->name, iter(g->second.it));
    g->second.body = g->second.body + outer * normalize(body);
  }
  for (const auto& gk : order) {
    const Group& g = groups.at(gk);
    if (g.body.terms.empty()) continue;
    NodePtr ub = pretty_poly(normalize(g.ub));
    if (g.body.terms.size() == 1 && g.body.terms.begin()->second < 0) {
      items.push_back({true, sum(factored(scale(g.body, -1)), g.it, ub)});
    } else {
      items.push_back({false, sum(factored(g.body), g.it, ub)});
    }
  }
  return join(items);
}

}  // namespace

NodePtr to_expr(const Poly& p) {
  return poly_expr(p, [](const NodePtr& a) { return a; });
}

NodePtr pretty(const NodePtr& n) {
  if (is_constraint(*n)) {
    NodePtr c = normalize_constraint(n);
    if (c->kind == Kind::Bool) return c;
    if (c->kind == Kind::Not) return lnot(pretty(c->kids[0]));
    return cmp(c->cmp, pretty_poly(normalize(c->kids[0])), cst(0));
  }
  return pretty_poly(normalize(n));
}

NodePtr tidy(const NodePtr& n) {
  auto is = [](const NodePtr& x, int v) { return x->kind == Kind::Const && x->value == v; };
  return rewrite(n, [&](const NodePtr& x) -> NodePtr {
    const auto& k = x->kids;
    switch (x->kind) {
      case Kind::Add:
        if (is(k[0], 0)) return k[1];
        if (is(k[1], 0)) return k[0];
        return nullptr;
      case Kind::Sub:
        if (is(k[1], 0)) return k[0];
        if (is(k[0], 0)) return neg(k[1]);
        return nullptr;
      case Kind::Mul:
        if (is(k[0], 1)) return k[1];
        if (is(k[1], 1)) return k[0];
        if (is(k[0], 0) || is(k[1], 0)) return cst(0);
        return nullptr;
      case Kind::Div:
        if (is(k[1], 1)) return k[0];
        return nullptr;
      default:
        return nullptr;
    }
  });
}

bool equivalent(const NodePtr& a, const NodePtr& b) {
  bool ca = is_constraint(*a), cb = is_constraint(*b);
  if (ca != cb) return false;
  if (ca) return key(normalize_constraint(a)) == key(normalize_constraint(b));
  return normalize(a) == normalize(b);
}

}  // namespace ordev::dsl
