#pragma once

#include <string>

#include "json.hpp"
#include "ordev/dsl/node.hpp"

namespace ordev::dsl {

// Math-style text: acc_0 + sum(index(A, j), j, b) > 0
std::string print(const NodePtr& n);

nlohmann::json to_json(const NodePtr& n);

}  // namespace ordev::dsl
