#include "akdq/expr.hpp"

#include <cctype>

namespace akdq {

namespace {

class Parser {
public:
  Parser(const std::string& text, int dim, int order)
      : text_(text), dim_(dim), order_(order) {}

  Jet run() {
    Jet e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw error(errc::input,
                "parse error at position " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Jet expr() {
    bool neg = false;
    if (eat('-')) neg = true;
    Jet acc = term();
    if (neg) acc = -acc;
    for (;;) {
      if (eat('+'))
        acc = acc + term();
      else if (eat('-'))
        acc = acc - term();
      else
        return acc;
    }
  }

  Jet term() {
    Jet acc = factor();
    while (eat('*')) acc = acc * factor();
    return acc;
  }

  Jet factor() {
    Jet b = base();
    if (eat('^')) {
      unsigned long e = uint_lit();
      Jet acc = Jet::constant(dim_, order_, GaussianRational(1));
      for (unsigned long k = 0; k < e; ++k) acc = acc * b;
      return acc;
    }
    return b;
  }

  Jet base() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      Jet e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == 'i') {
      ++pos_;
      return Jet::constant(dim_, order_, GaussianRational::unit_i());
    }
    if (c == 'x') {
      ++pos_;
      unsigned long j = uint_lit();
      if (j < 1 || static_cast<long>(j) > dim_)
        fail("variable index " + std::to_string(j) + " outside 1.." + std::to_string(dim_));
      return Jet::variable(dim_, order_, static_cast<int>(j));
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      Integer num = uint_big();
      Integer den = 1;
      if (pos_ < text_.size() && text_[pos_] == '/') {
        ++pos_;
        den = uint_big();
        if (den == 0) fail("zero denominator");
      }
      return Jet::constant(dim_, order_, GaussianRational(Rational(num, den)));
    }
    fail("expected a rational, 'i', a variable, or '('");
  }

  unsigned long uint_lit() {
    Integer v = uint_big();
    if (v > 1000000) fail("integer literal too large");
    return v.get_ui();
  }

  Integer uint_big() {
    skip_ws();
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      fail("expected an unsigned integer");
    Integer v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_] - '0');
      ++pos_;
    }
    return v;
  }

  const std::string& text_;
  int dim_;
  int order_;
  size_t pos_ = 0;
};

}  // namespace

Jet parse_polynomial(const std::string& text, int dim, int order) {
  if (dim <= 0) throw error(errc::input, "dimension must be positive");
  return Parser(text, dim, order).run();
}

}  // namespace akdq
