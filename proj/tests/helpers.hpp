#ifndef AKDQ_TEST_HELPERS_HPP
#define AKDQ_TEST_HELPERS_HPP

#include <random>
#include <vector>

#include "akdq/fedosov.hpp"

namespace akdq::testing {

inline GaussianRational random_scalar(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-4, 4), den(1, 3), imag(0, 2);
  Rational re(num(rng), den(rng));
  Rational im = imag(rng) == 0 ? Rational(num(rng), den(rng)) : Rational(0);
  return {re, im};
}

inline Jet random_jet(std::mt19937& rng, int dim, int order, int max_degree) {
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::uniform_int_distribution<int> var(0, dim - 1);
  Jet f(dim, order);
  int terms = 2 + static_cast<int>(rng() % 4);
  for (int t = 0; t < terms; ++t) {
    MultiIndex a = zero_index(dim);
    int d = deg(rng);
    for (int k = 0; k < d; ++k) ++a[var(rng)];
    GaussianRational c = random_scalar(rng);
    if (!c.is_zero()) f = f + Jet(dim, order, {{a, c}});
  }
  return f;
}

// Real-coefficient random polynomial (star inputs in the axioms are ordinary
// polynomials).
inline Jet random_polynomial(std::mt19937& rng, int dim, int order, int max_degree) {
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::uniform_int_distribution<int> var(0, dim - 1);
  std::uniform_int_distribution<int> num(-3, 3), den(1, 2);
  Jet f(dim, order);
  int terms = 3 + static_cast<int>(rng() % 3);
  for (int t = 0; t < terms; ++t) {
    MultiIndex a = zero_index(dim);
    int d = deg(rng);
    for (int k = 0; k < d; ++k) ++a[var(rng)];
    Rational c(num(rng), den(rng));
    if (c != 0) f = f + Jet(dim, order, {{a, GaussianRational(c)}});
  }
  return f;
}

inline WickElement random_element(std::mt19937& rng, int dim, int order, int deg_a) {
  WickElement e(dim, order);
  std::uniform_int_distribution<int> nu(0, 1), ydeg(0, 3), var(0, dim - 1);
  int terms = 2 + static_cast<int>(rng() % 3);
  for (int t = 0; t < terms; ++t) {
    MultiIndex y = zero_index(dim);
    int d = ydeg(rng);
    for (int k = 0; k < d; ++k) ++y[var(rng)];
    uint32_t dx = 0;
    while (popcount(dx) < deg_a) dx |= 1u << var(rng);
    e.add_key(WickKey{nu(rng), y, dx}, random_jet(rng, dim, order, 2));
  }
  return e;
}

// Independent Moyal-Weyl oracle on a constant-coefficient symplectic chart:
// C_r(f,g) = (1/r!) (i/2)^r w^{j1 k1} ... w^{jr kr} d_{j1..jr} f d_{k1..kr} g.
inline Jet moyal_coefficient(const JetMatrix& omega_inv_const, const Jet& f, const Jet& g,
                             int r) {
  int dim = f.dim();
  Jet acc(dim, std::max(0, std::min(f.order(), g.order()) - r));
  std::vector<int> pair_idx(r, 0);  // each in [0, dim*dim)
  for (;;) {
    Jet df = f, dg = g;
    GaussianRational w(1);
    for (int m = 0; m < r; ++m) {
      int j = pair_idx[m] / dim, k = pair_idx[m] % dim;
      w *= omega_inv_const.at(j, k).value_at_base();
      if (!w.is_zero()) {
        df = df.derivative(j + 1);
        dg = dg.derivative(k + 1);
      }
    }
    if (!w.is_zero()) acc = acc + (df * dg).scaled(w);
    int m = 0;
    while (m < r && ++pair_idx[m] == dim * dim) pair_idx[m++] = 0;
    if (m == r) break;
  }
  GaussianRational c(1);
  for (int m = 1; m <= r; ++m) c = c * GaussianRational(Rational(0), Rational(1, 2 * m));
  return acc.scaled(c);
}

}  // namespace akdq::testing

#endif
