#include "ordev/front/interp.hpp"

#include <functional>
#include <random>
#include <set>

namespace ordev::front {

std::vector<Rational> Env::call(const std::string& fn, const std::vector<Rational>& args,
                                size_t arity) const {
  if (auto it = calls.find({fn, args}); it != calls.end()) {
    if (it->second.size() < arity)
      throw InterpError("call " + fn + " bound with " + std::to_string(it->second.size()) +
                        " results, " + std::to_string(arity) + " needed");
    return it->second;
  }
  if (!call_seed) throw InterpError("unbound external call " + fn);
  std::string key = fn;
  for (const auto& a : args) key += "|" + a.get_str();
  if (auto salt = call_salt.find(fn); salt != call_salt.end()) key += "#" + std::to_string(salt->second);
  std::seed_seq seq{static_cast<std::uint32_t>(*call_seed), static_cast<std::uint32_t>(*call_seed >> 32),
                    static_cast<std::uint32_t>(std::hash<std::string>{}(key))};
  std::mt19937_64 rng(seq);
  std::vector<Rational> out;
  for (size_t k = 0; k < arity; ++k) {
    Rational v(static_cast<long>(1 + rng() % 20), static_cast<long>(1 + rng() % 4));
    v.canonicalize();
    out.push_back(v);
  }
  return out;
}

namespace {

struct Frame {
  std::string func;
  std::map<std::string, Rational> scalars;
  std::map<std::string, std::vector<Rational>> arrays;
  std::set<std::string> structs;
};

struct Revert {};

class Machine {
 public:
  using Finder = std::function<const Function*(const std::string&)>;

  Machine(Finder find, const Env& env, const InterpOptions& opts) : find_(std::move(find)), env_(env), opts_(opts) {}

  InterpResult run(const Function& f) {
    Frame fr;
    fr.func = f.name;
    for (const auto& p : f.params) {
      if (auto a = env_.arrays.find(p.name); a != env_.arrays.end()) {
        fr.arrays[p.name] = a->second;
      } else if (auto s = env_.scalars.find(p.name); s != env_.scalars.end()) {
        fr.scalars[p.name] = s->second;
      } else {
        throw InterpError("parameter '" + p.name + "' of " + f.name + " is unbound");
      }
    }
    try {
      result_.returns = body(f, fr);
    } catch (const Revert&) {
      result_.reverted = true;
    }
    return result_;
  }

 private:
  Finder find_;
  const Env& env_;
  InterpOptions opts_;
  InterpResult result_;

  struct Place {
    std::string name;
    std::optional<Rational> idx;
  };

  static bool truthy(const Rational& v) { return v != 0; }

  Place resolve(const Expr& e, Frame& fr) {
    switch (e.kind) {
      case Expr::Kind::Id:
        return {e.name, std::nullopt};
      case Expr::Kind::Member: {
        auto p = resolve(*e.lhs, fr);
        p.name += "." + e.name;
        return p;
      }
      case Expr::Kind::Index: {
        auto p = resolve(*e.lhs, fr);
        if (p.idx) throw InterpError("nested indexing into " + p.name + " is not supported");
        p.idx = eval(*e.rhs, fr);
        return p;
      }
      default:
        throw InterpError("expression is not an access path");
    }
  }

  const std::vector<Rational>* array(const std::string& name, const Frame& fr) const {
    if (auto it = fr.arrays.find(name); it != fr.arrays.end()) return &it->second;
    if (auto it = env_.arrays.find(name); it != env_.arrays.end()) return &it->second;
    return nullptr;
  }

  Rational read(const Place& p, const Frame& fr) const {
    if (p.idx) {
      const auto* arr = array(p.name, fr);
      if (!arr) throw InterpError("unbound array " + p.name);
      if (!is_integer(*p.idx) || *p.idx < 0 || *p.idx >= static_cast<long>(arr->size()))
        throw InterpError("index " + p.idx->get_str() + " out of range for " + p.name);
      return (*arr)[p.idx->get_num().get_si()];
    }
    if (auto it = fr.scalars.find(p.name); it != fr.scalars.end()) return it->second;
    if (auto it = env_.scalars.find(p.name); it != env_.scalars.end()) return it->second;
    auto dot = p.name.find('.');
    if (dot != std::string::npos && fr.structs.count(p.name.substr(0, dot))) return 0;
    throw InterpError("unbound identifier " + p.name);
  }

  Rational eval(const Expr& e, Frame& fr) {
    switch (e.kind) {
      case Expr::Kind::Num:
        return e.num;
      case Expr::Kind::Bool:
        return e.truth ? 1 : 0;
      case Expr::Kind::Not:
        return truthy(eval(*e.lhs, fr)) ? 0 : 1;
      case Expr::Kind::Member:
        if (e.name == "length") {
          try {
            auto p = resolve(*e.lhs, fr);
            if (!p.idx)
              if (const auto* arr = array(p.name, fr)) return static_cast<long>(arr->size());
          } catch (const InterpError&) {
          }
        }
        return read(resolve(e, fr), fr);
      case Expr::Kind::Id:
      case Expr::Kind::Index:
        return read(resolve(e, fr), fr);
      case Expr::Kind::Binary: {
        Rational a = eval(*e.lhs, fr), b = eval(*e.rhs, fr);
        switch (e.op) {
          case BinOp::Add: return a + b;
          case BinOp::Sub: return a - b;
          case BinOp::Mul: return a * b;
          case BinOp::Div:
            if (b == 0) throw InterpError("division by zero at " + to_string(e.loc));
            return a / b;
          case BinOp::Ge: return a >= b ? 1 : 0;
          case BinOp::Gt: return a > b ? 1 : 0;
          case BinOp::Lt: return a < b ? 1 : 0;
          case BinOp::Le: return a <= b ? 1 : 0;
          case BinOp::Eq: return a == b ? 1 : 0;
        }
      }
    }
    throw InterpError("bad expression");
  }

  void set(Frame& fr, const std::string& name, const Rational& v) {
    fr.scalars[name] = v;
    fr.arrays.erase(name);
    result_.values[fr.func + "::" + name] = v;
  }

  void copy(Frame& fr, const std::string& to, const std::string& from) {
    if (auto a = array(from, fr)) {
      auto copy = *a;
      fr.arrays[to] = std::move(copy);
      fr.scalars.erase(to);
      return;
    }
    set(fr, to, read({from, std::nullopt}, fr));
  }

  std::vector<Rational> body(const Function& f, Frame& fr) {
    std::optional<std::vector<Rational>> ret;
    block(f.body, fr, ret);
    return ret.value_or(std::vector<Rational>{});
  }

  void block(const std::vector<Stmt>& stmts, Frame& fr, std::optional<std::vector<Rational>>& ret) {
    for (const auto& s : stmts) {
      if (ret) return;
      stmt(s, fr, ret);
    }
  }

  void stmt(const Stmt& s, Frame& fr, std::optional<std::vector<Rational>>& ret) {
    switch (s.kind) {
      case StmtKind::Dec:
        if (s.type == "Struct") {
          fr.structs.insert(s.base.empty() ? s.target : s.base);
          fr.structs.insert(s.target);
        } else {
          set(fr, s.target, 0);
        }
        return;
      case StmtKind::Assign:
      case StmtKind::Load:
        set(fr, s.target, eval(*s.expr, fr));
        return;
      case StmtKind::AssignIndex: {
        Rational idx = eval(*s.index, fr), v = eval(*s.expr, fr);
        const auto* src = array(s.source, fr);
        if (!src) throw InterpError("unbound array " + s.source);
        auto arr = *src;
        if (!is_integer(idx) || idx < 0 || idx >= static_cast<long>(arr.size()))
          throw InterpError("index " + idx.get_str() + " out of range for " + s.source);
        arr[idx.get_num().get_si()] = v;
        fr.arrays[s.target] = std::move(arr);
        return;
      }
      case StmtKind::Require: {
        bool ok = truthy(eval(*s.expr, fr));
        result_.require_results[s.id] = ok;
        result_.require_trace.push_back(ok);
        if (!ok) {
          result_.reverted = true;
          if (opts_.stop_on_revert) throw Revert{};
        }
        return;
      }
      case StmtKind::Phi:
        throw InterpError("stray phi at " + to_string(s.loc));
      case StmtKind::If: {
        bool c = truthy(eval(*s.expr, fr));
        block(c ? s.body : s.orelse, fr, ret);
        if (ret) return;
        for (const auto& phi : s.phis) {
          if (phi.outs.size() != 2) throw InterpError("if-join phi must have two sources");
          copy(fr, phi.target, phi.outs[c ? 0 : 1]);
        }
        return;
      }
      case StmtKind::For: {
        Rational n = eval(*s.expr, fr);
        if (!is_integer(n) || n < 0) throw InterpError("loop bound " + n.get_str() + " is not a natural number");
        if (n > opts_.max_loop)
          throw InterpError("loop bound " + n.get_str() + " exceeds the configured maximum");
        size_t first = 0;
        while (first < s.body.size() && s.body[first].kind == StmtKind::Phi) ++first;
        for (size_t k = 0; k < first; ++k) copy(fr, s.body[k].outs.at(1), s.body[k].outs.at(0));
        std::vector<Stmt> rest(s.body.begin() + first, s.body.end());
        long count = n.get_num().get_si();
        for (long it = 0; it < count && !ret; ++it) {
          fr.scalars[s.target] = it;
          for (size_t k = 0; k < first; ++k) copy(fr, s.body[k].target, s.body[k].outs.at(1));
          block(rest, fr, ret);
        }
        fr.scalars.erase(s.target);
        return;
      }
      case StmtKind::Call: {
        std::vector<Rational> results;
        if (const Function* g = find_(s.callee)) {
          Frame callee;
          callee.func = g->name;
          if (g->params.size() != s.args.size())
            throw InterpError("arity mismatch calling " + g->name + " at " + to_string(s.loc));
          for (size_t k = 0; k < s.args.size(); ++k) {
            const auto& a = *s.args[k];
            const std::vector<Rational>* arr = nullptr;
            if (a.kind == Expr::Kind::Id) arr = array(a.name, fr);
            if (arr)
              callee.arrays[g->params[k].name] = *arr;
            else
              callee.scalars[g->params[k].name] = eval(a, fr);
          }
          results = body(*g, callee);
        } else {
          std::vector<Rational> args;
          for (const auto& a : s.args) args.push_back(eval(*a, fr));
          results = env_.call(s.callee, args, s.outs.size());
        }
        if (results.size() < s.outs.size())
          throw InterpError(s.callee + " returned too few values at " + to_string(s.loc));
        for (size_t k = 0; k < s.outs.size(); ++k)
          if (s.outs[k] != "_") set(fr, s.outs[k], results[k]);
        return;
      }
      case StmtKind::Return: {
        std::vector<Rational> vals;
        for (const auto& a : s.args) vals.push_back(eval(*a, fr));
        ret = std::move(vals);
        return;
      }
    }
  }
};

}  // namespace

InterpResult interpret_function(const FuncObj& f, const Env& env, const InterpOptions& opts) {
  Machine m([&](const std::string& n) { return f.find(n); }, env, opts);
  return m.run(f.entry_function());
}

InterpResult interpret_source(const Contract& c, const std::string& fn, const Env& env,
                              const InterpOptions& opts) {
  const Function* f = c.find_function(fn);
  if (!f) throw InterpError("no function " + fn);
  Machine m([&](const std::string& n) { return c.find_function(n); }, env, opts);
  return m.run(*f);
}

}  // namespace ordev::front
