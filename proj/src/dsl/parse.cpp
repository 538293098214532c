#include "ordev/dsl/parse.hpp"

#include <cctype>

namespace ordev::dsl {

namespace {

class Reader {
 public:
  Reader(std::string_view s, const std::set<std::string>& iters) : s_(s), iters_(iters) {}

  NodePtr all() {
    auto n = comparison();
    skip();
    if (p_ != s_.size()) fail("trailing input");
    return n;
  }

 private:
  std::string_view s_;
  const std::set<std::string>& iters_;
  size_t p_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw DslError("dsl parse error at offset " + std::to_string(p_) + ": " + msg);
  }

  void skip() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }

  bool eat(std::string_view tok) {
    skip();
    if (s_.substr(p_, tok.size()) == tok) {
      p_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }

  std::string name() {
    skip();
    size_t start = p_;
    if (p_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) {
      ++p_;
      while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_' ||
                                s_[p_] == '.' || s_[p_] == '\'' || s_[p_] == '@'))
        ++p_;
    }
    if (p_ == start) fail("expected a name");
    return std::string(s_.substr(start, p_ - start));
  }

  NodePtr comparison() {
    auto a = arith();
    static const std::pair<const char*, CmpOp> ops[] = {
        {">=", CmpOp::Ge}, {"<=", CmpOp::Le}, {"==", CmpOp::Eq}, {">", CmpOp::Gt}, {"<", CmpOp::Lt}, {"=", CmpOp::Eq}};
    for (const auto& [t, op] : ops)
      if (eat(t)) return cmp(op, a, arith());
    return a;
  }

  NodePtr arith() {
    auto a = term();
    while (true) {
      if (eat("+")) a = add(a, term());
      else if (eat("-")) a = sub(a, term());
      else return a;
    }
  }

  NodePtr term() {
    auto a = unary();
    while (true) {
      if (eat("*")) a = mul(a, unary());
      else if (eat("/")) a = div(a, unary());
      else return a;
    }
  }

  NodePtr unary() {
    skip();
    if (eat("-")) {
      auto x = unary();
      if (x->kind == Kind::Const) return cst(-x->value);
      return neg(x);
    }
    if (eat("!")) return lnot(unary());
    return atom();
  }

  NodePtr atom() {
    skip();
    if (p_ >= s_.size()) fail("unexpected end");
    char c = s_[p_];
    if (c == '(') {
      ++p_;
      auto n = comparison();
      expect(")");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = p_;
      while (p_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[p_])) || s_[p_] == '.')) ++p_;
      return cst(parse_rational(s_.substr(start, p_ - start)));
    }
    std::string w = name();
    if (w == "true") return boolean(true);
    if (w == "false") return boolean(false);
    if (w == "null") return null();
    if (!eat("(")) return iters_.count(w) ? iter(w) : id(w);
    if (w == "index") {
      auto b = comparison();
      expect(",");
      auto i = comparison();
      expect(")");
      return index(b, i);
    }
    if (w == "sum") {
      auto body = comparison();
      expect(",");
      std::string it = name();
      expect(",");
      auto ub = comparison();
      expect(")");
      body = subst_ids(body, [&](const std::string& x) -> NodePtr { return x == it ? iter(it) : nullptr; });
      return sum(body, it, ub);
    }
    if (w == "Int") {
      auto x = comparison();
      expect(")");
      return to_int(x);
    }
    if (w == "ret") {
      auto dest = comparison();
      expect(",");
      std::string it = name();
      expect(")");
      return ret(dest, it == "null" ? null() : iter(it), "", {});
    }
    auto base = comparison();
    expect(")");
    return member(base, w);
  }
};

}  // namespace

NodePtr parse(std::string_view text, const std::set<std::string>& iters) { return Reader(text, iters).all(); }

}  // namespace ordev::dsl
