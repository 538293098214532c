#pragma once

#include <string>
#include <vector>

#include "ordev/front/ast.hpp"

namespace ordev::front {

std::string print_expr(const Expr& e);
std::string print_stmts(const std::vector<Stmt>& stmts, int indent = 0);
std::string print_function(const Function& f, int indent = 0);
std::string print_contract(const Contract& c);

}  // namespace ordev::front
