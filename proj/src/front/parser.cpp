#include "ordev/front/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace ordev::front {

namespace {

enum class Tok { Ident, Number, Punct, At, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

const std::set<std::string, std::less<>> kTypes = {"Int",  "Uint", "Real",  "Bool",
                                                   "Address", "Map", "Array", "Struct"};
const std::set<std::string, std::less<>> kAnnotations = {"oracle", "pure", "entry", "public"};
const std::set<std::string, std::less<>> kStmtKeywords = {
    "dec", "assign", "load", "require", "phi", "if", "for", "call", "return"};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourceLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '$'))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.' && j + 1 < src.size() &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (c == '@') {
      out.push_back({Tok::At, "@", loc});
      advance(1);
      continue;
    }
    static const char* two[] = {"==", ">=", "<=", "!="};
    bool matched = false;
    for (const char* t : two) {
      if (src.substr(i, 2) == t) {
        out.push_back({Tok::Punct, t, loc});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("(){}[],.=<>+-*/!").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), loc});
      advance(1);
      continue;
    }
    throw ParseError(loc, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Contract contract() {
    Contract c;
    expect_word("contract");
    expect("(");
    c.id = ident("contract name");
    expect(")");
    if (accept("{")) {
      while (!peek_is("}")) decl(c);
      expect("}");
    }
    if (peek().kind != Tok::End) fail(peek().loc, "trailing input after contract");
    check_contract(c);
    return c;
  }

  std::vector<Stmt> statements() {
    std::vector<Stmt> out;
    while (peek().kind != Tok::End) out.push_back(stmt());
    return out;
  }

  ExprPtr whole_expr() {
    auto e = expr();
    if (peek().kind != Tok::End) fail(peek().loc, "trailing input after expression");
    return e;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  [[noreturn]] void fail(SourceLoc loc, const std::string& msg) const { throw ParseError(loc, msg); }

  const Token& peek(size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool peek_is(std::string_view p, size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == Tok::Punct && t.text == p;
  }
  bool peek_word(std::string_view w, size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == Tok::Ident && t.text == w;
  }
  bool accept(std::string_view p) {
    if (!peek_is(p)) return false;
    next();
    return true;
  }
  void expect(std::string_view p) {
    if (!peek_is(p)) {
      const auto& t = peek();
      fail(t.loc, "expected '" + std::string(p) + "' but found " +
                      (t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'"));
    }
    next();
  }
  void expect_word(std::string_view w) {
    if (!peek_word(w)) fail(peek().loc, "expected '" + std::string(w) + "'");
    next();
  }
  std::string ident(const char* what) {
    const auto& t = peek();
    if (t.kind != Tok::Ident) fail(t.loc, std::string("expected ") + what);
    return next().text;
  }
  std::string path() {
    std::string p = ident("identifier");
    while (peek_is(".") && peek(1).kind == Tok::Ident) {
      next();
      p += "." + next().text;
    }
    return p;
  }
  std::string type_name() {
    const auto& t = peek();
    if (t.kind != Tok::Ident) fail(t.loc, "expected type");
    if (!kTypes.count(t.text)) fail(t.loc, "unknown type keyword '" + t.text + "'");
    return next().text;
  }

  void decl(Contract& c) {
    std::set<std::string> notes;
    while (peek().kind == Tok::At) {
      next();
      auto loc = peek().loc;
      auto a = ident("annotation");
      if (!kAnnotations.count(a)) fail(loc, "unknown annotation '@" + a + "'");
      notes.insert(a);
    }
    const auto& t = peek();
    if (peek_word("state")) {
      StateDecl s;
      s.loc = next().loc;
      expect("(");
      s.type = type_name();
      expect(",");
      s.name = ident("state name");
      expect(")");
      s.oracle = notes.count("oracle") != 0;
      if (notes.size() > (s.oracle ? 1u : 0u)) fail(s.loc, "only @oracle applies to a state");
      if (c.find_state(s.name)) fail(s.loc, "duplicate declaration of state '" + s.name + "'");
      c.states.push_back(std::move(s));
    } else if (peek_word("extern")) {
      ExternDecl x;
      x.loc = next().loc;
      expect("(");
      x.name = path();
      expect(")");
      x.oracle = notes.count("oracle") != 0;
      if (notes.size() > (x.oracle ? 1u : 0u)) fail(x.loc, "only @oracle applies to an extern");
      if (c.find_extern(x.name)) fail(x.loc, "duplicate declaration of extern '" + x.name + "'");
      c.externs.push_back(std::move(x));
    } else if (peek_word("func")) {
      Function f;
      f.loc = next().loc;
      expect("(");
      f.name = ident("function name");
      std::set<std::string> seen;
      while (accept(",")) {
        Param p;
        p.type = type_name();
        auto loc = peek().loc;
        p.name = ident("parameter name");
        if (!seen.insert(p.name).second) fail(loc, "duplicate parameter '" + p.name + "'");
        f.params.push_back(std::move(p));
      }
      expect(")");
      if (notes.count("oracle")) fail(f.loc, "@oracle applies to states and externs only");
      f.annotations = std::move(notes);
      f.body = block();
      if (c.find_function(f.name)) fail(f.loc, "duplicate declaration of function '" + f.name + "'");
      c.funcs.push_back(std::move(f));
    } else {
      fail(t.loc, "expected state, extern or func declaration");
    }
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> out;
    while (!peek_is("}")) {
      if (peek().kind == Tok::End) fail(peek().loc, "unterminated block");
      out.push_back(stmt());
    }
    expect("}");
    return out;
  }

  Stmt stmt() {
    const Token& t = peek();
    if (t.kind == Tok::Ident && kStmtKeywords.count(t.text) && peek_is("(", 1))
      return keyword_stmt();
    if (t.kind != Tok::Ident) fail(t.loc, "expected statement");
    Stmt s;
    s.loc = t.loc;
    lvalue_into(s);
    expect("=");
    s.expr = expr();
    return s;
  }

  void lvalue_into(Stmt& s) {
    s.target = path();
    s.kind = StmtKind::Assign;
    if (accept("[")) {
      s.kind = StmtKind::AssignIndex;
      s.index = expr();
      expect("]");
      s.source = s.target;
    }
    s.base = s.target;
  }

  Stmt keyword_stmt() {
    Token kw = next();
    Stmt s;
    s.loc = kw.loc;
    expect("(");
    const std::string& k = kw.text;
    if (k == "dec") {
      s.kind = StmtKind::Dec;
      s.type = type_name();
      expect(",");
      s.target = s.base = path();
      expect(")");
    } else if (k == "assign") {
      lvalue_into(s);
      expect(",");
      s.expr = expr();
      expect(")");
    } else if (k == "load") {
      s.kind = StmtKind::Load;
      s.target = s.base = path();
      expect(",");
      s.expr = expr();
      expect(")");
    } else if (k == "require") {
      s.kind = StmtKind::Require;
      s.expr = expr();
      expect(")");
    } else if (k == "phi") {
      s.kind = StmtKind::Phi;
      s.target = s.base = path();
      while (accept(",")) s.outs.push_back(path());
      expect(")");
      if (s.outs.empty()) fail(s.loc, "phi needs at least one source");
    } else if (k == "if") {
      s.kind = StmtKind::If;
      s.expr = expr();
      expect(")");
      s.body = block();
      if (peek_word("else")) {
        next();
        s.orelse = block();
      }
      while (peek_word("phi") && peek_is("(", 1)) s.phis.push_back(keyword_stmt());
    } else if (k == "for") {
      s.kind = StmtKind::For;
      s.target = s.base = ident("loop iterator");
      expect(",");
      s.expr = expr();
      expect(")");
      s.body = block();
    } else if (k == "call") {
      s.kind = StmtKind::Call;
      s.callee = path();
      call_items(s);
    } else {  // return
      s.kind = StmtKind::Return;
      if (!peek_is(")")) {
        s.args.push_back(expr());
        while (accept(",")) s.args.push_back(expr());
      }
      expect(")");
    }
    return s;
  }

  // Tries "(a, _, b)" followed by the call's closing parenthesis.
  bool try_tuple_dest(Stmt& s) {
    size_t save = pos_;
    if (!accept("(")) return false;
    std::vector<std::string> names;
    bool ok = true;
    if (!peek_is(")")) {
      while (true) {
        if (peek().kind != Tok::Ident) {
          ok = false;
          break;
        }
        names.push_back(path());
        if (accept(",")) continue;
        break;
      }
    }
    if (ok && accept(")") && peek_is(")")) {
      s.outs = names;
      s.tuple_dest = true;
      return true;
    }
    pos_ = save;
    return false;
  }

  void call_items(Stmt& s) {
    if (!accept(",")) fail(peek().loc, "call needs a destination (use () for none)");
    std::vector<ExprPtr> items;
    while (true) {
      if (try_tuple_dest(s)) {
        expect(")");
        s.args = std::move(items);
        s.out_bases = s.outs;
        return;
      }
      items.push_back(expr());
      if (accept(",")) continue;
      expect(")");
      break;
    }
    auto dest = items.back();
    items.pop_back();
    auto name = dotted_path(*dest);
    if (name.empty()) fail(dest->loc, "call destination must be a name, '_' or a tuple");
    s.outs = {name};
    s.out_bases = s.outs;
    s.args = std::move(items);
  }

  ExprPtr expr() {
    auto lhs = additive();
    static const std::pair<const char*, BinOp> cmps[] = {
        {"==", BinOp::Eq}, {">=", BinOp::Ge}, {"<=", BinOp::Le}, {">", BinOp::Gt}, {"<", BinOp::Lt}};
    for (auto [text, op] : cmps) {
      if (peek_is(text)) {
        auto loc = next().loc;
        auto rhs = additive();
        for (auto [t2, op2] : cmps) {
          (void)op2;
          if (peek_is(t2)) fail(peek().loc, "comparison operators do not chain");
        }
        return make_binary(op, lhs, rhs, loc);
      }
    }
    if (peek_is("!=")) fail(peek().loc, "'!=' is not part of the language; use !(a == b)");
    return lhs;
  }

  ExprPtr additive() {
    auto e = term();
    while (peek_is("+") || peek_is("-")) {
      auto t = next();
      e = make_binary(t.text == "+" ? BinOp::Add : BinOp::Sub, e, term(), t.loc);
    }
    return e;
  }

  ExprPtr term() {
    auto e = unary();
    while (peek_is("*") || peek_is("/")) {
      auto t = next();
      e = make_binary(t.text == "*" ? BinOp::Mul : BinOp::Div, e, unary(), t.loc);
    }
    return e;
  }

  ExprPtr unary() {
    if (peek_is("!")) {
      auto loc = next().loc;
      return make_not(unary(), loc);
    }
    if (peek_is("-")) {
      auto loc = next().loc;
      if (peek().kind == Tok::Number && !peek_is("[", 1) && !peek_is(".", 1)) {
        auto t = next();
        return make_num(-parse_rational(t.text), loc);
      }
      return make_binary(BinOp::Sub, make_num(0, loc), unary(), loc);
    }
    return postfix();
  }

  ExprPtr postfix() {
    auto e = primary();
    while (true) {
      if (peek_is("[")) {
        auto loc = next().loc;
        auto idx = expr();
        expect("]");
        e = make_index(e, idx, loc);
      } else if (peek_is(".") && peek(1).kind == Tok::Ident) {
        auto loc = next().loc;
        e = make_member(e, next().text, loc);
      } else {
        return e;
      }
    }
  }

  ExprPtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      auto tok = next();
      return make_num(parse_rational(tok.text), tok.loc);
    }
    if (t.kind == Tok::Ident) {
      auto tok = next();
      if (tok.text == "true" || tok.text == "false") return make_bool(tok.text == "true", tok.loc);
      return make_id(tok.text, tok.loc);
    }
    if (peek_is("(")) {
      next();
      auto e = expr();
      expect(")");
      return e;
    }
    fail(t.loc, t.kind == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'");
  }

  static std::string root_name(const Expr& e) {
    const Expr* p = &e;
    while (p->kind == Expr::Kind::Index || p->kind == Expr::Kind::Member) p = p->lhs.get();
    return p->kind == Expr::Kind::Id ? p->name : std::string();
  }

  void check_contract(const Contract& c) {
    for (const auto& f : c.funcs) {
      walk_stmts(f.body, [&](const Stmt& s) {
        if (s.kind == StmtKind::Load) {
          auto root = root_name(*s.expr);
          if (root.empty() || !c.find_state(root))
            fail(s.loc, "load from undeclared state '" + root + "'");
        }
        if (s.kind == StmtKind::Call && !c.find_function(s.callee) && !c.find_extern(s.callee))
          fail(s.loc, "call target '" + s.callee + "' is neither a function nor a declared extern");
      });
    }
  }
};

}  // namespace

bool is_type_keyword(std::string_view word) { return kTypes.count(word) != 0; }

Contract parse_contract(std::string_view text) { return Parser(text).contract(); }

Contract load_contract(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_contract(ss.str());
}

std::vector<Stmt> parse_statements(std::string_view text) { return Parser(text).statements(); }

ExprPtr parse_expr(std::string_view text) { return Parser(text).whole_expr(); }

}  // namespace ordev::front
