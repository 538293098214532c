#include "ordev/rational.hpp"

#include <stdexcept>

namespace ordev {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

Rational pow10(long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
  return e < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  Rational out;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw std::invalid_argument("bad rational: " + std::string(text));
    mpz_class d{std::string(den), 10};
    if (d == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
    out = Rational(mpz_class(std::string(num), 10), d);
    out.canonicalize();
  } else {
    long exp = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      auto es = s.substr(e + 1);
      bool eneg = false;
      if (!es.empty() && (es[0] == '-' || es[0] == '+')) {
        eneg = es[0] == '-';
        es.remove_prefix(1);
      }
      if (!all_digits(es)) throw std::invalid_argument("bad exponent: " + std::string(text));
      exp = std::stol(std::string(es));
      if (eneg) exp = -exp;
      s = s.substr(0, e);
    }
    auto dot = s.find('.');
    std::string digits;
    long frac = 0;
    if (dot == std::string_view::npos) {
      digits = std::string(s);
    } else {
      auto ip = s.substr(0, dot), fp = s.substr(dot + 1);
      if (ip.empty() && fp.empty()) throw std::invalid_argument("bad number: " + std::string(text));
      if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)))
        throw std::invalid_argument("bad number: " + std::string(text));
      digits = std::string(ip) + std::string(fp);
      frac = static_cast<long>(fp.size());
    }
    if (!all_digits(digits)) throw std::invalid_argument("bad number: " + std::string(text));
    out = Rational(mpz_class(digits, 10)) * pow10(exp - frac);
  }
  if (neg) out = -out;
  return out;
}

std::string to_string(const Rational& r) {
  if (is_integer(r)) return r.get_num().get_str();
  mpz_class d = r.get_den();
  long twos = 0, fives = 0;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) { d /= 2; ++twos; }
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) { d /= 5; ++fives; }
  if (d != 1 || std::max(twos, fives) > 40) return r.get_str();
  long places = std::max(twos, fives);
  Rational scaled = r * pow10(places);
  mpz_class n = scaled.get_num();
  bool neg = n < 0;
  if (neg) n = -n;
  std::string s = n.get_str();
  if (static_cast<long>(s.size()) <= places) s.insert(0, places - s.size() + 1, '0');
  s.insert(s.size() - places, ".");
  return neg ? "-" + s : s;
}

double to_double(const Rational& r) { return r.get_d(); }

bool is_integer(const Rational& r) { return r.get_den() == 1; }

}  // namespace ordev
