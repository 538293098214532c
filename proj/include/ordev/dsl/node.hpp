#pragma once

#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordev/rational.hpp"

namespace ordev::dsl {

class DslError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind {
  Const,
  Bool,
  Id,
  Iter,    // loop iterator, bound by an enclosing Sum or free inside a loop body
  Index,   // index(base, pos)
  Member,  // field(base)
  Ret,     // ret(dest, iter | null); callee and args are evaluation payload only
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Sum,  // sum(body, iter, ub): body summed for iter = 0 .. ub-1
  Int,  // 1 if the condition holds (or is non-zero), else 0
  Cmp,
  Not,
  Null,
};

enum class CmpOp { Gt, Ge, Lt, Le, Eq };
const char* cmp_text(CmpOp op);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind = Kind::Null;
  Rational value;
  bool truth = false;
  std::string name;  // Id/Iter name, Member field, Sum iterator
  CmpOp cmp = CmpOp::Gt;
  // Index: base, pos. Member: base. Ret: dest, iter-or-Null, args... Sum: body, ub.
  // Binary and Cmp: lhs, rhs. Neg, Int, Not: operand.
  std::vector<NodePtr> kids;

  std::string callee;  // Ret only
  int slot = 0;        // component of a tuple-returning call
  int arity = 1;
  bool oracle = false;
};

NodePtr cst(Rational v);
NodePtr boolean(bool v);
NodePtr id(std::string name);
NodePtr iter(std::string name);
NodePtr null();
NodePtr index(NodePtr base, NodePtr pos);
NodePtr member(NodePtr base, std::string field);
NodePtr ret(NodePtr dest, NodePtr it, std::string callee, std::vector<NodePtr> args, int slot = 0,
            int arity = 1, bool oracle = false);
NodePtr add(NodePtr a, NodePtr b);
NodePtr sub(NodePtr a, NodePtr b);
NodePtr mul(NodePtr a, NodePtr b);
NodePtr div(NodePtr a, NodePtr b);
NodePtr neg(NodePtr a);
NodePtr sum(NodePtr body, std::string it, NodePtr ub);
NodePtr to_int(NodePtr c);
NodePtr cmp(CmpOp op, NodePtr a, NodePtr b);
NodePtr lnot(NodePtr c);

bool is_constraint(const Node& n);  // Bool, Cmp, Not
bool is_leaf(const Node& n);        // Id, Index, Member, Ret

// Structural equality up to renaming of Sum iterators. Ret leaves compare by dest and
// iterator only.
bool equal(const NodePtr& a, const NodePtr& b);

// Alpha-invariant canonical text; equal(a,b) iff key(a) == key(b).
std::string key(const NodePtr& n);

std::set<std::string> free_iters(const NodePtr& n);
std::set<std::string> ids(const NodePtr& n);
bool has_free_iter(const NodePtr& n, const std::string& it);
bool contains_sum(const NodePtr& n);
bool contains(const NodePtr& n, const std::function<bool(const Node&)>& pred);

// Capture-avoiding substitution of free identifiers. Neither ids() nor the substitutions
// look inside a ret destination.
NodePtr subst_ids(const NodePtr& n, const std::function<NodePtr(const std::string&)>& f);
NodePtr subst_id(const NodePtr& n, const std::string& name, const NodePtr& by);
// Replaces free occurrences of iterator `it`.
NodePtr subst_iter(const NodePtr& n, const std::string& it, const NodePtr& by);

// Bottom-up rewrite; `f` sees nodes whose children are already rewritten and returns
// nullptr to keep the node.
NodePtr rewrite(const NodePtr& n, const std::function<NodePtr(const NodePtr&)>& f);

NodePtr with_kids(const NodePtr& n, std::vector<NodePtr> kids);

// Iterator names j, k, l, m, j1, k1, ... skipping anything in `taken`.
class IterNames {
 public:
  explicit IterNames(std::set<std::string> taken = {}) : taken_(std::move(taken)) {}
  std::string next();
  void reserve(const std::string& name) { taken_.insert(name); }

 private:
  std::set<std::string> taken_;
  int n_ = 0;
};

}  // namespace ordev::dsl
