#pragma once

#include <set>
#include <string>
#include <string_view>

#include "ordev/dsl/node.hpp"

namespace ordev::dsl {

// Reads the text form produced by print(). Names bound by an enclosing sum, the second
// argument of ret, and anything listed in `iters` become iterators. Any other call
// form f(E) is a member access.
NodePtr parse(std::string_view text, const std::set<std::string>& iters = {});

}  // namespace ordev::dsl
