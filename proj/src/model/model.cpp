#include "ordev/model/model.hpp"

#include <algorithm>
#include <set>

#include "ordev/dsl/normalize.hpp"
#include "ordev/dsl/printer.hpp"

namespace ordev::model {

using dsl::Kind;
using dsl::NodePtr;

NodePtr unroll(const NodePtr& n, const std::map<std::string, int>& bounds) {
  if (n->kind == Kind::Sum) {
    NodePtr ub = unroll(n->kids[1], bounds);
    long count = 0;
    if (ub->kind == Kind::Const) {
      if (!is_integer(ub->value) || ub->value < 0) throw ModelError("sum bound " + to_string(ub->value) + " is not a natural number");
      count = ub->value.get_num().get_si();
    } else {
      auto it = bounds.find(dsl::print(ub));
      if (it == bounds.end()) throw ModelError("no unroll bound given for " + dsl::print(ub));
      if (it->second < 0) throw ModelError("negative unroll bound for " + it->first);
      count = it->second;
    }
    NodePtr acc;
    for (long t = 0; t < count; ++t) {
      NodePtr term = unroll(dsl::subst_iter(n->kids[0], n->name, dsl::cst(t)), bounds);
      acc = acc ? dsl::add(acc, term) : term;
    }
    return acc ? acc : dsl::cst(0);
  }
  if (n->kids.empty()) return n;
  std::vector<NodePtr> kids;
  bool changed = false;
  for (const auto& k : n->kids) {
    kids.push_back(unroll(k, bounds));
    changed = changed || kids.back() != k;
  }
  return changed ? dsl::with_kids(n, std::move(kids)) : n;
}

std::string leaf_key(const NodePtr& leaf) {
  switch (leaf->kind) {
    case Kind::Id:
      return leaf->name;
    case Kind::Index:
      return leaf_key(leaf->kids[0]);
    case Kind::Member:
      return leaf->name;
    case Kind::Ret:
      return dsl::print(leaf->kids[0]);
    default:
      throw ModelError("not a leaf: " + dsl::print(leaf));
  }
}

const Control* ModelConfig::control(const std::string& name) const {
  for (const auto& c : controls)
    if (c.name == name) return &c;
  return nullptr;
}

const Control* ModelConfig::control_for_key(const std::string& key) const {
  for (const auto& c : controls) {
    if (c.keys.empty() ? c.name == key : std::count(c.keys.begin(), c.keys.end(), key) > 0) return &c;
  }
  return nullptr;
}

const Var* OptModel::var(const std::string& name) const {
  for (const auto& v : vars)
    if (v.name == name) return &v;
  return nullptr;
}

std::string target_name(const std::string& control) { return control + "'"; }

namespace {

// Maps summary leaves to model symbols and records the variables it creates.
class Classifier {
 public:
  Classifier(const ModelConfig& cfg, OptModel& m) : cfg_(cfg), m_(m) {}

  // Both instances of one expression.
  std::pair<NodePtr, NodePtr> split(const NodePtr& n) {
    if (dsl::is_leaf(*n)) return leaf(n);
    if (n->kind == Kind::Iter) throw ModelError("free iterator " + n->name + " after unrolling");
    if (n->kind == Kind::Sum) throw ModelError("sum left after unrolling");
    if (n->kind == Kind::Null) throw ModelError("constraint references a null value");
    if (n->kids.empty()) return {n, n};
    std::vector<NodePtr> a, b;
    for (const auto& k : n->kids) {
      auto [x, y] = split(k);
      a.push_back(x);
      b.push_back(y);
    }
    return {dsl::with_kids(n, std::move(a)), dsl::with_kids(n, std::move(b))};
  }

 private:
  const ModelConfig& cfg_;
  OptModel& m_;
  std::map<std::string, std::pair<NodePtr, NodePtr>> seen_;

  std::pair<NodePtr, NodePtr> leaf(const NodePtr& n) {
    if (!dsl::free_iters(n).empty()) throw ModelError("free iterator in " + dsl::print(n));
    std::string printed = dsl::print(n);
    if (auto it = seen_.find(printed); it != seen_.end()) return it->second;
    std::pair<NodePtr, NodePtr> out;
    std::string key = leaf_key(n);
    if (n->kind == Kind::Ret && n->oracle) {
      PricePair p;
      p.reported = "re." + printed;
      p.truth = "gt." + printed;
      p.leaf = printed;
      p.node = n;
      if (auto o = cfg_.delta_overrides.find(key); o != cfg_.delta_overrides.end()) p.delta = o->second;
      int idx = static_cast<int>(m_.prices.size());
      m_.prices.push_back(p);
      m_.vars.push_back({p.reported, Role::Reported, printed, key, idx});
      m_.vars.push_back({p.truth, Role::Truth, printed, key, idx});
      out = {dsl::id(p.reported), dsl::id(p.truth)};
    } else if (auto pin = cfg_.pins.count(printed) ? cfg_.pins.find(printed) : cfg_.pins.find(key); pin != cfg_.pins.end()) {
      out = {dsl::cst(pin->second), dsl::cst(pin->second)};
    } else if (const Control* c = cfg_.control_for_key(key)) {
      out = {dsl::cst(c->current), dsl::id(target_name(c->name))};
    } else {
      m_.vars.push_back({printed, Role::State, printed, key, -1});
      out = {dsl::id(printed), dsl::id(printed)};
    }
    seen_[printed] = out;
    return out;
  }
};

void collect_denominators(const NodePtr& n, std::vector<NodePtr>& out) {
  if (n->kind == Kind::Div && sign(n->kids[1]) != Sign::Positive) {
    auto c = dsl::cmp(dsl::CmpOp::Gt, n->kids[1], dsl::cst(0));
    if (std::none_of(out.begin(), out.end(), [&](const NodePtr& x) { return dsl::equal(x, c); })) out.push_back(c);
  }
  for (const auto& k : n->kids) collect_denominators(k, out);
}

// Pins can zero whole terms, so only symbols that survive folding become variables.
void prune(OptModel& m) {
  std::set<std::string> used;
  for (const auto& p : m.pairs) {
    for (const auto& x : dsl::ids(p.oracle)) used.insert(x);
    for (const auto& x : dsl::ids(p.truth)) used.insert(x);
  }
  std::vector<PricePair> prices;
  std::vector<Var> vars;
  std::map<int, int> renumber;
  for (const auto& v : m.vars) {
    if (v.role == Role::Truth) continue;
    if (v.role == Role::State) {
      if (used.count(v.name)) vars.push_back(v);
      continue;
    }
    const PricePair& p = m.prices[v.pair];
    if (!used.count(p.reported) && !used.count(p.truth)) continue;
    renumber[v.pair] = static_cast<int>(prices.size());
    prices.push_back(p);
    vars.push_back(v);
    vars.back().pair = renumber[v.pair];
    vars.push_back({p.truth, Role::Truth, v.leaf, v.key, renumber[v.pair]});
  }
  m.vars = std::move(vars);
  m.prices = std::move(prices);
}

void finish(OptModel& m, const ModelConfig& cfg) {
  m.controls = cfg.controls;
  m.bounds = cfg.bounds;
  for (auto& p : m.pairs) {
    p.oracle = simplify(p.oracle);
    p.truth = simplify(p.truth);
  }
  prune(m);
  for (const auto& v : m.vars) m.c0.push_back(dsl::cmp(dsl::CmpOp::Gt, dsl::id(v.name), dsl::cst(0)));
  for (const auto& p : m.prices) {
    NodePtr re = dsl::id(p.reported), gt = dsl::id(p.truth);
    NodePtr d = p.delta ? dsl::cst(*p.delta) : dsl::id(kDelta);
    NodePtr room = dsl::mul(d, gt);
    m.c1.push_back(dsl::cmp(dsl::CmpOp::Le, dsl::sub(re, gt), room));
    m.c1.push_back(dsl::cmp(dsl::CmpOp::Le, dsl::sub(gt, re), room));
  }
  for (const auto& pr : m.pairs) {
    collect_denominators(pr.oracle, m.side);
    collect_denominators(pr.truth, m.side);
  }
}

}  // namespace

OptModel build_model(const std::vector<NodePtr>& constraints, const ModelConfig& cfg) {
  OptModel m;
  Classifier cls(cfg, m);
  for (const auto& c : constraints) {
    if (!dsl::is_constraint(*c)) throw ModelError("not a constraint: " + dsl::print(c));
    auto [oracle, truth] = cls.split(unroll(c, cfg.bounds));
    m.pairs.push_back({oracle, truth, dsl::print(c)});
  }
  finish(m, cfg);
  return m;
}

OptModel build_price_model(const std::vector<PriceCheck>& checks, const ModelConfig& cfg) {
  const Control* tol = cfg.control(cfg.tolerance);
  if (!tol) throw ModelError("price checks need a tolerance control, got '" + cfg.tolerance + "'");
  OptModel m;
  Classifier cls(cfg, m);
  for (const auto& chk : checks) {
    auto [quoted, fair] = cls.split(unroll(chk.expr, cfg.bounds));
    NodePtr t = dsl::id(target_name(tol->name));
    NodePtr truth = chk.floor ? dsl::cmp(dsl::CmpOp::Ge, quoted, dsl::mul(dsl::sub(dsl::cst(1), t), fair))
                              : dsl::cmp(dsl::CmpOp::Le, quoted, dsl::mul(dsl::add(dsl::cst(1), t), fair));
    m.pairs.push_back({dsl::boolean(true), truth, chk.label.empty() ? dsl::print(chk.expr) : chk.label});
    m.checks.push_back(chk);
  }
  finish(m, cfg);
  return m;
}

Sign sign(const NodePtr& n) {
  auto both = [](Sign a, Sign b, bool strict_if_one) {
    if (a == Sign::Unknown || b == Sign::Unknown) return Sign::Unknown;
    if (a == Sign::Positive && b == Sign::Positive) return Sign::Positive;
    if (strict_if_one && (a == Sign::Positive || b == Sign::Positive)) return Sign::Positive;
    return Sign::NonNegative;
  };
  switch (n->kind) {
    case Kind::Const:
      return n->value > 0 ? Sign::Positive : n->value == 0 ? Sign::NonNegative : Sign::Unknown;
    case Kind::Id:
      return n->name == kDelta ? Sign::NonNegative : Sign::Positive;
    case Kind::Int:
      return Sign::NonNegative;
    case Kind::Add:
      return both(sign(n->kids[0]), sign(n->kids[1]), true);
    case Kind::Mul:
      return both(sign(n->kids[0]), sign(n->kids[1]), false);
    case Kind::Div:
      return sign(n->kids[1]) == Sign::Positive ? both(sign(n->kids[0]), Sign::Positive, false) : Sign::Unknown;
    default:
      return Sign::Unknown;
  }
}

namespace {

bool is_const(const NodePtr& n, const Rational& v) { return n->kind == Kind::Const && n->value == v; }

struct Frac {
  NodePtr num;
  NodePtr den;  // null means 1
};

NodePtr times(const NodePtr& a, const NodePtr& b) {
  if (!a) return b;
  if (!b) return a;
  return dsl::mul(a, b);
}

// Only divisions by positive denominators are pulled out.
Frac frac(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Add:
    case Kind::Sub: {
      Frac a = frac(n->kids[0]), b = frac(n->kids[1]);
      if (!a.den && !b.den) return {n, nullptr};
      NodePtr l = times(a.num, b.den), r = times(b.num, a.den);
      return {n->kind == Kind::Add ? dsl::add(l, r) : dsl::sub(l, r), times(a.den, b.den)};
    }
    case Kind::Mul: {
      Frac a = frac(n->kids[0]), b = frac(n->kids[1]);
      if (!a.den && !b.den) return {n, nullptr};
      return {times(a.num, b.num), times(a.den, b.den)};
    }
    case Kind::Neg: {
      Frac a = frac(n->kids[0]);
      return {a.den ? dsl::neg(a.num) : n, a.den};
    }
    case Kind::Div: {
      if (sign(n->kids[1]) != Sign::Positive) return {n, nullptr};
      Frac a = frac(n->kids[0]), b = frac(n->kids[1]);
      if (b.den && sign(b.num) != Sign::Positive) return {n, nullptr};
      return {times(a.num, b.den), times(a.den, b.num)};
    }
    default:
      return {n, nullptr};
  }
}

NodePtr fold(const NodePtr& n);

NodePtr fold_kids(const NodePtr& n) {
  if (n->kids.empty()) return n;
  std::vector<NodePtr> kids;
  bool changed = false;
  for (const auto& k : n->kids) {
    kids.push_back(n->kind == Kind::Ret ? k : fold(k));
    changed = changed || kids.back() != k;
  }
  return changed ? dsl::with_kids(n, std::move(kids)) : n;
}

NodePtr fold(const NodePtr& in) {
  NodePtr n = fold_kids(in);
  const auto& k = n->kids;
  switch (n->kind) {
    case Kind::Add:
      if (k[0]->kind == Kind::Const && k[1]->kind == Kind::Const) return dsl::cst(k[0]->value + k[1]->value);
      if (is_const(k[0], 0)) return k[1];
      if (is_const(k[1], 0)) return k[0];
      return n;
    case Kind::Sub:
      if (k[0]->kind == Kind::Const && k[1]->kind == Kind::Const) return dsl::cst(k[0]->value - k[1]->value);
      if (is_const(k[1], 0)) return k[0];
      if (is_const(k[0], 0)) return fold(dsl::neg(k[1]));
      return n;
    case Kind::Mul:
      if (k[0]->kind == Kind::Const && k[1]->kind == Kind::Const) return dsl::cst(k[0]->value * k[1]->value);
      if (is_const(k[0], 0) || is_const(k[1], 0)) return dsl::cst(0);
      if (is_const(k[0], 1)) return k[1];
      if (is_const(k[1], 1)) return k[0];
      return n;
    case Kind::Div:
      if (k[1]->kind == Kind::Const) {
        if (k[1]->value == 0) throw ModelError("division by the constant 0");
        if (k[0]->kind == Kind::Const) return dsl::cst(k[0]->value / k[1]->value);
        if (k[1]->value == 1) return k[0];
        return fold(dsl::mul(k[0], dsl::cst(1 / k[1]->value)));
      }
      if (is_const(k[0], 0)) return dsl::cst(0);
      return n;
    case Kind::Neg:
      if (k[0]->kind == Kind::Const) return dsl::cst(-k[0]->value);
      return n;
    case Kind::Int:
      if (k[0]->kind == Kind::Bool) return dsl::cst(k[0]->truth ? 1 : 0);
      if (k[0]->kind == Kind::Const) return dsl::cst(k[0]->value != 0 ? 1 : 0);
      return n;
    case Kind::Not:
      if (k[0]->kind == Kind::Bool) return dsl::boolean(!k[0]->truth);
      return n;
    case Kind::Cmp: {
      if (k[0]->kind == Kind::Const && k[1]->kind == Kind::Const) {
        const Rational &a = k[0]->value, &b = k[1]->value;
        switch (n->cmp) {
          case dsl::CmpOp::Gt: return dsl::boolean(a > b);
          case dsl::CmpOp::Ge: return dsl::boolean(a >= b);
          case dsl::CmpOp::Lt: return dsl::boolean(a < b);
          case dsl::CmpOp::Le: return dsl::boolean(a <= b);
          case dsl::CmpOp::Eq: return dsl::boolean(a == b);
        }
      }
      Frac l = frac(k[0]), r = frac(k[1]);
      if (!l.den && !r.den) return n;
      return fold(dsl::cmp(n->cmp, times(l.num, r.den), times(r.num, l.den)));
    }
    default:
      return n;
  }
}

NodePtr substitute(const NodePtr& n, const std::map<std::string, NodePtr>& by) {
  return dsl::subst_ids(n, [&](const std::string& x) -> NodePtr {
    auto it = by.find(x);
    return it == by.end() ? nullptr : it->second;
  });
}

}  // namespace

NodePtr simplify(const NodePtr& n) { return dsl::tidy(fold(n)); }

OptModel simplify_constraints(const OptModel& m) {
  OptModel out = m;
  auto clean = [](std::vector<NodePtr>& xs) {
    std::vector<NodePtr> kept;
    for (const auto& x : xs) {
      NodePtr s = simplify(x);
      if (s->kind == Kind::Bool && s->truth) continue;
      kept.push_back(s);
    }
    xs = std::move(kept);
  };
  clean(out.c1);
  clean(out.side);
  for (auto& p : out.pairs) {
    p.oracle = simplify(p.oracle);
    p.truth = simplify(p.truth);
  }
  return out;
}

OptModel instantiate(const OptModel& m, const Candidate& c) {
  std::map<std::string, NodePtr> by{{kDelta, dsl::cst(c.delta)}};
  for (const auto& ctl : m.controls) {
    auto it = c.targets.find(ctl.name);
    by[target_name(ctl.name)] = dsl::cst(it == c.targets.end() ? ctl.current : it->second);
  }
  OptModel out = m;
  for (auto& x : out.c1) x = substitute(x, by);
  for (auto& x : out.side) x = substitute(x, by);
  for (auto& p : out.pairs) {
    p.oracle = substitute(p.oracle, by);
    p.truth = substitute(p.truth, by);
  }
  out = simplify_constraints(out);
  for (const auto& s : out.side)
    if (s->kind == Kind::Bool) throw ModelError("candidate makes a denominator non-positive");
  return out;
}

std::string smt_symbol(const std::string& name) {
  static const std::string extra = "~!@$%^&*_-+=<>.?/";
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char ch : name)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && extra.find(ch) == std::string::npos) simple = false;
  if (simple) return name;
  if (name.find_first_of("|\\") != std::string::npos) throw ModelError("symbol cannot be quoted: " + name);
  return "|" + name + "|";
}

namespace {

std::string smt_rational(const Rational& r) {
  Rational a = abs(r);
  std::string body = a.get_den() == 1 ? a.get_num().get_str() + ".0"
                                      : "(/ " + a.get_num().get_str() + ".0 " + a.get_den().get_str() + ".0)";
  return r < 0 ? "(- " + body + ")" : body;
}

void emit(std::string& out, const NodePtr& n) {
  auto bin = [&](const char* op) {
    out += "(";
    out += op;
    out += ' ';
    emit(out, n->kids[0]);
    out += ' ';
    emit(out, n->kids[1]);
    out += ')';
  };
  switch (n->kind) {
    case Kind::Const:
      out += smt_rational(n->value);
      return;
    case Kind::Bool:
      out += n->truth ? "true" : "false";
      return;
    case Kind::Id:
      out += smt_symbol(n->name);
      return;
    case Kind::Add: return bin("+");
    case Kind::Sub: return bin("-");
    case Kind::Mul: return bin("*");
    case Kind::Div: return bin("/");
    case Kind::Neg:
      out += "(- ";
      emit(out, n->kids[0]);
      out += ')';
      return;
    case Kind::Int:
      out += "(ite ";
      if (dsl::is_constraint(*n->kids[0])) {
        emit(out, n->kids[0]);
      } else {
        out += "(not (= ";
        emit(out, n->kids[0]);
        out += " 0.0))";
      }
      out += " 1.0 0.0)";
      return;
    case Kind::Cmp: {
      static const char* ops[] = {">", ">=", "<", "<=", "="};
      return bin(ops[static_cast<int>(n->cmp)]);
    }
    case Kind::Not:
      out += "(not ";
      emit(out, n->kids[0]);
      out += ')';
      return;
    default:
      throw ModelError("cannot encode " + dsl::print(n) + " for the solver");
  }
}

}  // namespace

std::string smt_expr(const NodePtr& n) {
  std::string out;
  emit(out, n);
  return out;
}

std::string to_smtlib(const OptModel& m, const Candidate& c) {
  OptModel q = instantiate(m, c);
  std::string out = "(set-option :produce-models true)\n(set-logic QF_NRA)\n";
  for (const auto& v : q.vars) out += "(declare-fun " + smt_symbol(v.name) + " () Real)\n";
  auto assert_all = [&](const std::vector<NodePtr>& xs) {
    for (const auto& x : xs) out += "(assert " + smt_expr(x) + ")\n";
  };
  assert_all(q.c0);
  assert_all(q.c1);
  assert_all(q.side);
  for (const auto& p : q.pairs) out += "(assert " + smt_expr(p.oracle) + ")\n";
  out += "(assert (not (and";
  for (const auto& p : q.pairs) out += " " + smt_expr(p.truth);
  out += " true)))\n(check-sat)\n";
  if (!q.vars.empty()) {
    out += "(get-value (";
    for (size_t k = 0; k < q.vars.size(); ++k) out += (k ? " " : "") + smt_symbol(q.vars[k].name);
    out += "))\n";
  }
  return out;
}

nlohmann::json to_json(const OptModel& m) {
  static const char* roles[] = {"state", "reported", "truth"};
  nlohmann::json j;
  auto& vars = j["variables"] = nlohmann::json::array();
  for (const auto& v : m.vars) vars.push_back({{"name", v.name}, {"role", roles[static_cast<int>(v.role)]}, {"leaf", v.leaf}, {"key", v.key}});
  auto& ctl = j["controls"] = nlohmann::json::array();
  for (const auto& c : m.controls)
    ctl.push_back({{"name", c.name},
                   {"current", to_string(c.current)},
                   {"target", target_name(c.name)},
                   {"keys", c.keys.empty() ? std::vector<std::string>{c.name} : c.keys},
                   {"direction", c.direction == Direction::Up ? "up" : "down"}});
  j["bounds"] = m.bounds;
  j["num_vars"] = m.num_vars();
  auto texts = [](const std::vector<NodePtr>& xs) {
    std::vector<std::string> out;
    for (const auto& x : xs) out.push_back(dsl::print(x));
    return out;
  };
  j["c0"] = texts(m.c0);
  j["c1"] = texts(m.c1);
  j["side"] = texts(m.side);
  auto& pairs = j["pairs"] = nlohmann::json::array();
  for (const auto& p : m.pairs) pairs.push_back({{"source", p.source}, {"oracle", dsl::print(p.oracle)}, {"truth", dsl::print(p.truth)}});
  return j;
}

}  // namespace ordev::model
