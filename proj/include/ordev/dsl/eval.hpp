#pragma once

#include <functional>

#include "ordev/dsl/node.hpp"
#include "ordev/front/interp.hpp"

namespace ordev::dsl {

// Value of a leaf whose iterators have all been replaced by constants.
using Resolver = std::function<Rational(const NodePtr& leaf)>;

// Numeric value; constraints evaluate to 0 or 1. Throws DslError on unbound leaves,
// free iterators and division by zero.
Rational eval(const NodePtr& n, const Resolver& leaf);
bool holds(const NodePtr& c, const Resolver& leaf);

// Reads leaves the way the interpreter reads places: index(markets, k).collFact is
// arrays["markets.collFact"][k]; ret leaves go through Env::call.
Resolver env_resolver(const front::Env& env);

}  // namespace ordev::dsl
