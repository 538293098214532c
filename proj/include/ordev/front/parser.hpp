#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ordev/front/ast.hpp"

namespace ordev::front {

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, const std::string& msg)
      : std::runtime_error(to_string(loc) + ": " + msg), loc_(loc) {}
  SourceLoc loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

Contract parse_contract(std::string_view text);
Contract load_contract(const std::string& path);

// A bare statement list, as produced by guard rendering.
std::vector<Stmt> parse_statements(std::string_view text);
ExprPtr parse_expr(std::string_view text);

bool is_type_keyword(std::string_view word);

}  // namespace ordev::front
