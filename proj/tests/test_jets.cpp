#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "akdq/jet.hpp"

using namespace akdq;

TEST_CASE("scalar arithmetic and rendering") {
  GaussianRational a(Rational(1, 2), Rational(-3, 4));
  GaussianRational b(Rational(2), Rational(1));
  CHECK((a + b) == GaussianRational(Rational(5, 2), Rational(1, 4)));
  CHECK((a * b) == GaussianRational(Rational(7, 4), Rational(-1)));
  CHECK((a / a) == GaussianRational(1));
  CHECK(a.conj() == GaussianRational(Rational(1, 2), Rational(3, 4)));
  CHECK((GaussianRational::unit_i() * GaussianRational::unit_i()) == GaussianRational(-1));

  CHECK(to_string(a) == "1/2-3/4*i");
  CHECK(to_string(GaussianRational(0)) == "0");
  CHECK(to_string(GaussianRational::unit_i()) == "i");
  for (auto& z : {a, b, GaussianRational(0), -a, GaussianRational(Rational(0), Rational(-7, 3))})
    CHECK(gaussian_from_string(to_string(z)) == z);
  CHECK_THROWS_AS(gaussian_from_string("1..2"), error);
  CHECK_THROWS_AS(rational_from_string("x"), error);
}

TEST_CASE("jet construction and truncation") {
  Jet x = Jet::variable(2, 3, 1);
  Jet y = Jet::variable(2, 3, 2);
  Jet p = (Jet::constant(2, 3, GaussianRational(1)) + x) *
          (Jet::constant(2, 3, GaussianRational(1)) - x);
  CHECK(p.coeff(zero_index(2)) == GaussianRational(1));
  CHECK(p.coeff({2, 0}) == GaussianRational(-1));
  CHECK(p.coeff({1, 0}) == GaussianRational(0));

  // Products truncate above the reliable order.
  Jet q = x * x * y * y;  // degree 4 > order 3
  CHECK(q.is_zero());
  CHECK_THROWS_AS(Jet(2, -1), error);
}

TEST_CASE("derivative consumes one order") {
  Jet x = Jet::variable(2, 3, 1);
  Jet f = x * x * x;
  Jet d = f.derivative(1);
  CHECK(d.order() == 2);
  // x^3 -> 3x^2 but degree 2 < order 2 is still reliable and kept
  CHECK(d.coeff({2, 0}) == GaussianRational(3));
}

TEST_CASE("agree_at_reliable_order compares the common range") {
  Jet a(2, 4, {{{0, 0}, GaussianRational(1)}, {{3, 0}, GaussianRational(5)}});
  Jet b(2, 2, {{{0, 0}, GaussianRational(1)}});
  CHECK(agree_at_reliable_order(a, b));  // degree-3 term is beyond b's order
  Jet c(2, 2, {{{0, 0}, GaussianRational(2)}});
  CHECK_FALSE(agree_at_reliable_order(a, c));
}

TEST_CASE("matrix inverse on jets") {
  int n = 2, order = 5;
  JetMatrix m = JetMatrix::identity(n, n, order);
  m.at(0, 1) = Jet::variable(n, order, 1);
  m.at(1, 0) = Jet::variable(n, order, 2).scaled(GaussianRational(Rational(1, 3)));
  m.at(1, 1) = m.at(1, 1) + Jet::variable(n, order, 1) * Jet::variable(n, order, 2);
  JetMatrix inv = invert(m);
  CHECK((m * inv).equals_reliably(JetMatrix::identity(n, n, order)));
  CHECK((inv * m).equals_reliably(JetMatrix::identity(n, n, order)));

  JetMatrix sing = JetMatrix::zero(n, n, n, order);
  sing.at(0, 0) = Jet::variable(n, order, 1);  // singular constant term
  sing.at(1, 1) = Jet::constant(n, order, GaussianRational(1));
  CHECK_THROWS_AS(invert(sing), error);
}

TEST_CASE("tensor storage round trip") {
  JetTensor t(3, 3, Jet(3, 2));
  t.at({1, 2, 3}) = Jet::variable(3, 2, 2);
  CHECK(t.at({1, 2, 3}) == Jet::variable(3, 2, 2));
  CHECK(t.at({3, 2, 1}).is_zero());
  CHECK_FALSE(t.is_reliably_zero());
}
