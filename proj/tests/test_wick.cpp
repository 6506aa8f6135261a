#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "akdq/chart_io.hpp"
#include "helpers.hpp"

using namespace akdq;
using namespace akdq::testing;

namespace {

std::shared_ptr<DerivedGeometry> corpus(const std::string& name, int order = 6) {
  return std::make_shared<DerivedGeometry>(
      derive_all(load_chart(std::string(CHARTS_DIR) + "/" + name + ".json", order)));
}

const TruncationPolicy kWide{40};

}  // namespace

TEST_CASE("wedge sign bookkeeping") {
  CHECK(wedge_sign(0, 0) == 1);
  CHECK(wedge_sign(0b01, 0b10) == 1);   // dx1 ^ dx2 in order
  CHECK(wedge_sign(0b10, 0b01) == -1);  // dx2 ^ dx1 swaps
  CHECK(wedge_sign(0b01, 0b01) == 0);   // repeated factor
  CHECK(wedge_sign(0b101, 0b010) == -1);
}

TEST_CASE("flat chart hand values") {
  auto d = corpus("flat2d");
  JetMatrix lam = wick_pairing(*d);
  CHECK(lam.at(0, 0).value_at_base() == -GaussianRational::unit_i());
  CHECK(lam.at(0, 1).value_at_base() == GaussianRational(-1));
  CHECK(lam.at(1, 0).value_at_base() == GaussianRational(1));
  CHECK(lam.at(1, 1).value_at_base() == -GaussianRational::unit_i());

  WickElement y1 = WickElement::y_monomial(2, 6, {1, 0});
  WickElement y2 = WickElement::y_monomial(2, 6, {0, 1});

  // y1 o y1 = y1^2 + nu/2
  WickElement sq = fiber_product(y1, y1, lam, kWide);
  WickElement expect = WickElement::y_monomial(2, 6, {2, 0});
  expect.add_key(WickKey{1, {0, 0}, 0}, Jet::constant(2, 6, GaussianRational(1, 2)));
  CHECK(reliably_equal(sq, expect));

  // [y1, y2] = -i nu (the symmetric -i g^{-1} part of the pairing cancels)
  WickElement comm = graded_commutator(y1, y2, lam, kWide);
  WickElement c(2, 6);
  c.add_key(WickKey{1, {0, 0}, 0}, Jet::constant(2, 6, -GaussianRational::unit_i()));
  CHECK(reliably_equal(comm, c));

  // Weyl commutator: y1 o' y2 - y2 o' y1 = -i nu
  WickElement wcomm = graded_commutator(y1, y2, d->omega_inv, kWide);
  WickElement wc(2, 6);
  wc.add_key(WickKey{1, {0, 0}, 0}, Jet::constant(2, 6, -GaussianRational::unit_i()));
  CHECK(reliably_equal(wcomm, wc));
}

TEST_CASE("parallel fiber product matches the serial reference") {
  std::mt19937 rng(7);
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name);
    JetMatrix lam = wick_pairing(*d);
    for (int t = 0; t < 10; ++t) {
      WickElement a = random_element(rng, d->chart.dim, 6, t % 3);
      WickElement b = random_element(rng, d->chart.dim, 6, (t + 1) % 3);
      TruncationPolicy p{6};
      WickElement par = fiber_product(a, b, lam, p);
      WickElement ser = fiber_product_serial(a, b, lam, p);
      CHECK(reliably_equal(par, ser));
      CHECK(par.dropped() == ser.dropped());
    }
  }
}

TEST_CASE("delta, delta_inv and the decomposition identity") {
  std::mt19937 rng(11);
  for (const char* name : {"flat2d", "nonintegrable4d"}) {
    auto d = corpus(name);
    for (int t = 0; t < 20; ++t) {
      WickElement a = random_element(rng, d->chart.dim, 6, t % 3);
      CHECK(reliably_zero(fedosov_delta(fedosov_delta(a))));
      CHECK(reliably_zero(fedosov_delta_inv(fedosov_delta_inv(a))));
      WickElement rebuilt = fedosov_delta(fedosov_delta_inv(a)) +
                            fedosov_delta_inv(fedosov_delta(a)) + sigma_project(a);
      CHECK(reliably_equal(rebuilt, a));
      HodgeParts h = hodge_decompose(a);
      CHECK(reliably_equal(h.dd_inv + h.d_inv_d + h.sigma, a));
    }
  }
}

TEST_CASE("delta and nabla are graded derivations of the fiber product") {
  std::mt19937 rng(13);
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name);
    JetMatrix lam = wick_pairing(*d);
    for (int t = 0; t < 20; ++t) {
      int qa = t % 2, qb = (t / 2) % 2;
      WickElement a = random_element(rng, d->chart.dim, 6, qa);
      WickElement b = random_element(rng, d->chart.dim, 6, qb);
      WickElement ab = fiber_product(a, b, lam, kWide);
      GaussianRational sgn(qa % 2 == 0 ? 1 : -1);

      WickElement lhs = fedosov_delta(ab);
      WickElement rhs = fiber_product(fedosov_delta(a), b, lam, kWide) +
                        fiber_product(a, fedosov_delta(b), lam, kWide).scaled(sgn);
      CHECK(reliably_equal(lhs, rhs));

      WickElement nlhs = extend_connection(ab, d->Gamma);
      WickElement nrhs = fiber_product(extend_connection(a, d->Gamma), b, lam, kWide) +
                         fiber_product(a, extend_connection(b, d->Gamma), lam, kWide).scaled(sgn);
      CHECK(reliably_equal(nlhs, nrhs));
    }
  }
}

TEST_CASE("torsion and curvature commutation relations") {
  std::mt19937 rng(17);
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name);
    JetMatrix lam = wick_pairing(*d);
    WickElement T = torsion_element(*d);
    WickElement R = curvature_element(*d);
    for (int t = 0; t < 20; ++t) {
      WickElement a = random_element(rng, d->chart.dim, 6, t % 3);
      // [nabla, delta] a = (i/nu)[T, a]
      WickElement lhs =
          extend_connection(fedosov_delta(a), d->Gamma) + fedosov_delta(extend_connection(a, d->Gamma));
      CHECK(reliably_equal(lhs, ad_div_nu(T, a, lam, kWide)));
      // nabla^2 a = -(i/nu)[R, a]
      WickElement n2 = extend_connection(extend_connection(a, d->Gamma), d->Gamma);
      CHECK(reliably_equal(n2, -ad_div_nu(R, a, lam, kWide)));
    }
  }
}

TEST_CASE("laplacian and G commute with delta and nabla") {
  std::mt19937 rng(19);
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name);
    for (int t = 0; t < 20; ++t) {
      WickElement a = random_element(rng, d->chart.dim, 6, t % 3);
      WickElement dl = laplacian(fedosov_delta(a), d->g_inv);
      WickElement ld = fedosov_delta(laplacian(a, d->g_inv));
      CHECK(reliably_equal(dl, ld));
      WickElement nl = laplacian(extend_connection(a, d->Gamma), d->g_inv);
      WickElement ln = extend_connection(laplacian(a, d->g_inv), d->Gamma);
      CHECK(reliably_equal(nl, ln));

      WickElement dg = equivalence_G(fedosov_delta(a), d->g_inv, +1, kWide);
      WickElement gd = fedosov_delta(equivalence_G(a, d->g_inv, +1, kWide));
      CHECK(reliably_equal(dg, gd));
      WickElement ng = equivalence_G(extend_connection(a, d->Gamma), d->g_inv, +1, kWide);
      WickElement gn = extend_connection(equivalence_G(a, d->g_inv, +1, kWide), d->Gamma);
      CHECK(reliably_equal(ng, gn));

      // G round trip
      WickElement rt = equivalence_G(equivalence_G(a, d->g_inv, +1, kWide), d->g_inv, -1, kWide);
      CHECK(reliably_equal(rt, a));
    }
  }
}

TEST_CASE("weyl product is the G-conjugated wick product") {
  std::mt19937 rng(23);
  for (const char* name : {"flat_c2", "nonintegrable4d"}) {
    auto d = corpus(name);
    JetMatrix lam = wick_pairing(*d);
    for (int t = 0; t < 10; ++t) {
      WickElement a = random_element(rng, d->chart.dim, 6, t % 2);
      WickElement b = random_element(rng, d->chart.dim, 6, (t + 1) % 2);
      WickElement weyl = fiber_product(a, b, d->omega_inv, kWide);
      WickElement conj = equivalence_G(
          fiber_product(equivalence_G(a, d->g_inv, -1, kWide),
                        equivalence_G(b, d->g_inv, -1, kWide), lam, kWide),
          d->g_inv, +1, kWide);
      CHECK(reliably_equal(weyl, conj));
    }
  }
}

TEST_CASE("error paths") {
  auto d = corpus("flat2d");
  WickElement y1 = WickElement::y_monomial(2, 6, {1, 0});
  // product with a nu^0 term is not divisible by nu
  WickElement sq = fiber_product(y1, y1, wick_pairing(*d), kWide);
  CHECK_THROWS_AS(nu_divide(sq), error);
  // commutators, by contrast, always are
  WickElement comm = graded_commutator(y1, y1, wick_pairing(*d), kWide);
  CHECK_NOTHROW(nu_divide(comm));

  WickElement mixed = y1;
  mixed.add_term(0, {0, 0}, {1}, Jet::constant(2, 6, GaussianRational(1)));
  CHECK_THROWS_AS(graded_commutator(mixed, y1, wick_pairing(*d), kWide), error);

  WickElement notscalar = y1;
  CHECK_THROWS_AS(two_form_of(notscalar), error);
}

TEST_CASE("truncation policy counts what it drops") {
  auto d = corpus("flat2d");
  WickElement y1 = WickElement::y_monomial(2, 6, {3, 0});
  TruncationPolicy tight{3};
  WickElement p = fiber_product(y1, y1, wick_pairing(*d), tight);
  CHECK(p.dropped() > 0);
  WickElement full = fiber_product(y1, y1, wick_pairing(*d), kWide);
  CHECK(full.dropped() == 0);
}
