#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace ordev {

using Rational = mpq_class;

// Accepts "12", "-0.715", "2/3" and "1e-3". Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

// Terminating expansions print as decimals, everything else as p/q.
std::string to_string(const Rational& r);

double to_double(const Rational& r);
bool is_integer(const Rational& r);

}  // namespace ordev
