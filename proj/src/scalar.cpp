#include "akdq/scalar.hpp"

#include <cctype>

namespace akdq {

std::string to_string(const Rational& q) {
  std::string s = numerator(q).get_str();
  if (denominator(q) != 1) {
    s += "/";
    s += denominator(q).get_str();
  }
  return s;
}

std::string to_string(const GaussianRational& z) {
  if (z.im == 0) return to_string(z.re);
  std::string im_part;
  Rational a = z.im < 0 ? Rational(-z.im) : z.im;
  if (a == 1)
    im_part = "i";
  else
    im_part = to_string(a) + "*i";
  if (z.re == 0) return (z.im < 0 ? "-" : "") + im_part;
  return to_string(z.re) + (z.im < 0 ? "-" : "+") + im_part;
}

namespace {

// Parses "p" or "p/q" starting at pos; advances pos.
Rational parse_rational_at(const std::string& s, size_t& pos) {
  size_t start = pos;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
  size_t digits = pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos == digits) throw error(errc::input, "expected number at position " + std::to_string(start) + " in '" + s + "'");
  // mpz_class does not accept a leading '+', so feed it digits plus sign only.
  Integer num(s.substr(digits, pos - digits));
  if (s[start] == '-') num = -num;
  Integer den = 1;
  if (pos < s.size() && s[pos] == '/') {
    ++pos;
    size_t dstart = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == dstart) throw error(errc::input, "expected denominator in '" + s + "'");
    den = Integer(s.substr(dstart, pos - dstart));
    if (den == 0) throw error(errc::input, "zero denominator in '" + s + "'");
  }
  return Rational(num, den);
}

}  // namespace

Rational rational_from_string(const std::string& s) {
  size_t pos = 0;
  Rational q = parse_rational_at(s, pos);
  if (pos != s.size()) throw error(errc::input, "trailing characters in rational '" + s + "'");
  return q;
}

GaussianRational gaussian_from_string(const std::string& s) {
  // Forms: R | [R][+|-]A*i | [R][+|-]i  with R, A canonical rationals.
  size_t pos = 0;
  GaussianRational z;
  bool neg = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    neg = s[pos] == '-';
    ++pos;
  }
  auto read_part = [&](bool negate) {
    if (pos < s.size() && s[pos] == 'i') {
      ++pos;
      z.im += negate ? Rational(-1) : Rational(1);
      return;
    }
    Rational mag = parse_rational_at(s, pos);
    if (pos + 1 < s.size() && s[pos] == '*' && s[pos + 1] == 'i') {
      pos += 2;
      z.im += negate ? Rational(-mag) : mag;
    } else {
      z.re += negate ? Rational(-mag) : mag;
    }
  };
  read_part(neg);
  if (pos < s.size()) {
    if (s[pos] != '+' && s[pos] != '-')
      throw error(errc::input, "trailing characters in '" + s + "'");
    neg = s[pos] == '-';
    ++pos;
    read_part(neg);
  }
  if (pos != s.size()) throw error(errc::input, "trailing characters in '" + s + "'");
  return z;
}

}  // namespace akdq
