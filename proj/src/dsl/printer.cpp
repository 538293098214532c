#include "ordev/dsl/printer.hpp"

namespace ordev::dsl {

namespace {

int prec(const Node& n) {
  switch (n.kind) {
    case Kind::Cmp: return 1;
    case Kind::Add:
    case Kind::Sub: return 2;
    case Kind::Mul:
    case Kind::Div: return 3;
    case Kind::Neg:
    case Kind::Not: return 4;
    case Kind::Const: return n.value < 0 ? 4 : 6;
    default: return 6;
  }
}

void emit(std::string& out, const NodePtr& n);

void child(std::string& out, const NodePtr& n, bool paren) {
  if (paren) out += '(';
  emit(out, n);
  if (paren) out += ')';
}

void emit(std::string& out, const NodePtr& n) {
  switch (n->kind) {
    case Kind::Const:
      out += to_string(n->value);
      return;
    case Kind::Bool:
      out += n->truth ? "true" : "false";
      return;
    case Kind::Id:
    case Kind::Iter:
      out += n->name;
      return;
    case Kind::Null:
      out += "null";
      return;
    case Kind::Index:
      out += "index(";
      emit(out, n->kids[0]);
      out += ", ";
      emit(out, n->kids[1]);
      out += ')';
      return;
    case Kind::Member:
      out += n->name + "(";
      emit(out, n->kids[0]);
      out += ')';
      return;
    case Kind::Ret:
      out += "ret(";
      emit(out, n->kids[0]);
      out += ", ";
      emit(out, n->kids[1]);
      out += ')';
      return;
    case Kind::Sum:
      out += "sum(";
      emit(out, n->kids[0]);
      out += ", " + n->name + ", ";
      emit(out, n->kids[1]);
      out += ')';
      return;
    case Kind::Int:
      out += "Int(";
      emit(out, n->kids[0]);
      out += ')';
      return;
    case Kind::Not:
      out += '!';
      child(out, n->kids[0], prec(*n->kids[0]) < 4);
      return;
    case Kind::Neg:
      out += '-';
      child(out, n->kids[0], prec(*n->kids[0]) <= 4);
      return;
    case Kind::Cmp:
      child(out, n->kids[0], prec(*n->kids[0]) <= 1);
      out += std::string(" ") + cmp_text(n->cmp) + " ";
      child(out, n->kids[1], prec(*n->kids[1]) <= 1);
      return;
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div: {
      int p = prec(*n);
      const char* op = n->kind == Kind::Add ? " + " : n->kind == Kind::Sub ? " - " : n->kind == Kind::Mul ? "*" : "/";
      child(out, n->kids[0], prec(*n->kids[0]) < p);
      out += op;
      child(out, n->kids[1], prec(*n->kids[1]) <= p);
      return;
    }
  }
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Const: return "const";
    case Kind::Bool: return "bool";
    case Kind::Id: return "id";
    case Kind::Iter: return "iter";
    case Kind::Index: return "index";
    case Kind::Member: return "member";
    case Kind::Ret: return "ret";
    case Kind::Add: return "add";
    case Kind::Sub: return "sub";
    case Kind::Mul: return "mul";
    case Kind::Div: return "div";
    case Kind::Neg: return "neg";
    case Kind::Sum: return "sum";
    case Kind::Int: return "int";
    case Kind::Cmp: return "cmp";
    case Kind::Not: return "not";
    case Kind::Null: return "null";
  }
  return "?";
}

}  // namespace

std::string print(const NodePtr& n) {
  std::string out;
  emit(out, n);
  return out;
}

nlohmann::json to_json(const NodePtr& n) {
  nlohmann::json j;
  j["kind"] = kind_name(n->kind);
  switch (n->kind) {
    case Kind::Const:
      j["value"] = to_string(n->value);
      return j;
    case Kind::Bool:
      j["value"] = n->truth;
      return j;
    case Kind::Id:
    case Kind::Iter:
      j["name"] = n->name;
      return j;
    case Kind::Member:
      j["field"] = n->name;
      break;
    case Kind::Sum:
      j["iter"] = n->name;
      break;
    case Kind::Cmp:
      j["op"] = cmp_text(n->cmp);
      break;
    case Kind::Ret:
      j["callee"] = n->callee;
      if (n->arity > 1) j["slot"] = n->slot;
      if (n->oracle) j["oracle"] = true;
      break;
    default:
      break;
  }
  auto& args = j["args"] = nlohmann::json::array();
  for (const auto& k : n->kids) args.push_back(to_json(k));
  return j;
}

}  // namespace ordev::dsl
