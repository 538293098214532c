#pragma once

#include <map>
#include <string>

#include "ordev/dsl/node.hpp"

namespace ordev::dsl {

// Polynomial over opaque atoms (leaves, iterators, sums, Int flags, reciprocals) with
// exact rational coefficients. Monomials map atom keys to powers; Int atoms are
// idempotent so their power never exceeds one.
using Mono = std::map<std::string, int>;

struct Poly {
  std::map<Mono, Rational> terms;
  std::map<std::string, NodePtr> atoms;

  bool is_const() const;
  Rational const_value() const;  // only meaningful when is_const()
  bool operator==(const Poly& o) const { return terms == o.terms; }
};

Poly poly_const(const Rational& c);
Poly poly_atom(const NodePtr& atom);
Poly operator+(const Poly& a, const Poly& b);
Poly operator-(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
Poly scale(const Poly& a, const Rational& c);

// Numeric expressions. Sums split over +, pull out constants and iterator-independent
// factors, and sum(1, j, ub) becomes ub. Division by a non-constant becomes a
// reciprocal atom.
Poly normalize(const NodePtr& n);

// Constraints become (L - R) op 0 with op in {>, >=, ==} and the leading coefficient
// scaled to +-1; constant constraints fold to true/false.
NodePtr normalize_constraint(const NodePtr& c);

NodePtr to_expr(const Poly& p);

// Display form: normalized, sums over the same bound merged and common factors pulled
// out of their bodies.
NodePtr pretty(const NodePtr& n);

// Drops additive zeros and unit factors, keeping the written order.
NodePtr tidy(const NodePtr& n);

// Equal after normalization.
bool equivalent(const NodePtr& a, const NodePtr& b);

}  // namespace ordev::dsl
