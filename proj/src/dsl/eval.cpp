#include "ordev/dsl/eval.hpp"

#include <map>

namespace ordev::dsl {

namespace {

class Evaluator {
 public:
  explicit Evaluator(const Resolver& leaf) : leaf_(leaf) {}

  Rational num(const NodePtr& n) {
    switch (n->kind) {
      case Kind::Const:
        return n->value;
      case Kind::Bool:
      case Kind::Cmp:
      case Kind::Not:
        return truth(n) ? 1 : 0;
      case Kind::Iter: {
        auto it = iters_.find(n->name);
        if (it == iters_.end() || it->second.empty()) throw DslError("free iterator " + n->name);
        return it->second.back();
      }
      case Kind::Id:
      case Kind::Index:
      case Kind::Member:
      case Kind::Ret:
        return leaf_(bind(n));
      case Kind::Add:
        return num(n->kids[0]) + num(n->kids[1]);
      case Kind::Sub:
        return num(n->kids[0]) - num(n->kids[1]);
      case Kind::Mul: {
        // a zero flag guards the other factor, which may be undefined (A[t - 1] at t = 0)
        bool flag_last = n->kids[1]->kind == Kind::Int;
        const NodePtr& first = n->kids[flag_last ? 1 : 0];
        const NodePtr& second = n->kids[flag_last ? 0 : 1];
        Rational a = num(first);
        return a == 0 ? a : a * num(second);
      }
      case Kind::Neg:
        return -num(n->kids[0]);
      case Kind::Div: {
        Rational d = num(n->kids[1]);
        if (d == 0) throw DslError("division by zero");
        return num(n->kids[0]) / d;
      }
      case Kind::Int: {
        const auto& x = n->kids[0];
        if (is_constraint(*x)) return truth(x) ? 1 : 0;
        return num(x) != 0 ? 1 : 0;
      }
      case Kind::Sum: {
        Rational ub = num(n->kids[1]);
        if (!is_integer(ub) || ub < 0) throw DslError("sum bound " + ub.get_str() + " is not a natural number");
        Rational total = 0;
        auto& stack = iters_[n->name];
        for (long k = 0; k < ub.get_num().get_si(); ++k) {
          stack.push_back(k);
          total += num(n->kids[0]);
          stack.pop_back();
        }
        return total;
      }
      case Kind::Null:
        break;
    }
    throw DslError("cannot evaluate null");
  }

  bool truth(const NodePtr& n) {
    switch (n->kind) {
      case Kind::Bool:
        return n->truth;
      case Kind::Not:
        return !truth(n->kids[0]);
      case Kind::Cmp: {
        Rational a = num(n->kids[0]), b = num(n->kids[1]);
        switch (n->cmp) {
          case CmpOp::Gt: return a > b;
          case CmpOp::Ge: return a >= b;
          case CmpOp::Lt: return a < b;
          case CmpOp::Le: return a <= b;
          case CmpOp::Eq: return a == b;
        }
        return false;
      }
      default:
        return num(n) != 0;
    }
  }

 private:
  const Resolver& leaf_;
  std::map<std::string, std::vector<Rational>> iters_;

  NodePtr bind(const NodePtr& leaf) {
    NodePtr out = leaf;
    for (const auto& it : free_iters(leaf)) {
      auto f = iters_.find(it);
      if (f == iters_.end() || f->second.empty()) throw DslError("free iterator " + it + " in leaf");
      out = subst_iter(out, it, cst(f->second.back()));
    }
    return out;
  }
};

struct Place {
  std::string path;
  std::optional<Rational> idx;
};

Place place(const NodePtr& n, const Resolver& self) {
  switch (n->kind) {
    case Kind::Id:
      return {n->name, std::nullopt};
    case Kind::Member: {
      Place p = place(n->kids[0], self);
      p.path += "." + n->name;
      return p;
    }
    case Kind::Index: {
      Place p = place(n->kids[0], self);
      if (p.idx) throw DslError("nested indexing into " + p.path);
      p.idx = eval(n->kids[1], self);
      return p;
    }
    default:
      throw DslError("not an access path");
  }
}

}  // namespace

Rational eval(const NodePtr& n, const Resolver& leaf) { return Evaluator(leaf).num(n); }

bool holds(const NodePtr& c, const Resolver& leaf) { return Evaluator(leaf).truth(c); }

Resolver env_resolver(const front::Env& env) {
  auto self = std::make_shared<Resolver>();
  *self = [&env, weak = std::weak_ptr<Resolver>(self)](const NodePtr& n) -> Rational {
    auto me = weak.lock();
    if (n->kind == Kind::Ret) {
      std::vector<Rational> args;
      for (size_t k = 2; k < n->kids.size(); ++k) args.push_back(eval(n->kids[k], *me));
      auto vals = env.call(n->callee, args, static_cast<size_t>(n->arity));
      return vals.at(n->slot);
    }
    Place p = place(n, *me);
    if (p.idx) {
      auto a = env.arrays.find(p.path);
      if (a == env.arrays.end()) throw DslError("unbound array " + p.path);
      if (!is_integer(*p.idx) || *p.idx < 0 || *p.idx >= static_cast<long>(a->second.size()))
        throw DslError("index " + p.idx->get_str() + " out of range for " + p.path);
      return a->second[p.idx->get_num().get_si()];
    }
    auto s = env.scalars.find(p.path);
    if (s == env.scalars.end()) throw DslError("unbound symbol " + p.path);
    return s->second;
  };
  // The closure only holds a weak reference to itself; keep it alive through a wrapper.
  return [self](const NodePtr& n) { return (*self)(n); };
}

}  // namespace ordev::dsl
