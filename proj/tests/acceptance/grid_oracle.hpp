#pragma once

#include <map>
#include <string>

#include "ordev/rational.hpp"

// Brute-force safety classification of two single-market lending checks, written directly
// from the contract code without the summarizer, model builder or solver.
namespace ordev::grid {

struct Verdict {
  bool unsafe = false;
  std::map<std::string, Rational> witness;  // first grid point where the check passes on
                                            // reported prices and fails on true ones
  long points = 0;
};

// Compound borrowAllowed with one entered market, exchange rate 1 and nothing redeemed:
//   cf * C * p - (D * p + f * b * pb) > 0
// with f = 1 when the entered market is the one being borrowed.
Verdict compound_bound1(const Rational& cf, const Rational& cf_target, const Rational& delta);

// testAMM borrow: amount <= dep * price * cr.
Verdict testamm(const Rational& cr, const Rational& cr_target, const Rational& delta);

}  // namespace ordev::grid
