#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "akdq/chart_io.hpp"
#include "helpers.hpp"

using namespace akdq;
using namespace akdq::testing;

namespace {

std::shared_ptr<DerivedGeometry> corpus(const std::string& name, int order) {
  return std::make_shared<DerivedGeometry>(
      derive_all(load_chart(std::string(CHARTS_DIR) + "/" + name + ".json", order)));
}

FormalFunction star(const FedosovSolution& s, const Jet& f, const Jet& g, int N, Variant v) {
  return star_multiply(s, FormalFunction::from_jet(f), FormalFunction::from_jet(g), N, v);
}

}  // namespace

TEST_CASE("r vanishes identically on flat charts") {
  for (const char* name : {"flat2d", "flat_c2"}) {
    FedosovSolution sol(corpus(name, 8), 7);
    for (int k = 2; k <= 7; ++k) {
      CHECK(reliably_zero(sol.r_component(k)));
      CHECK(reliably_zero(sol.r_component(k, Variant::weyl)));
    }
  }
}

TEST_CASE("leading r component matches the torsion formula") {
  // r^{(2)} = (1/3) omega_{s a} T^a_{tl} y^s y^t dx^l
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name, 8);
    FedosovSolution sol(d, 5);
    int n = d->chart.dim;
    WickElement expect(n, d->chart.order);
    for (int s = 1; s <= n; ++s)
      for (int t = 1; t <= n; ++t)
        for (int l = 1; l <= n; ++l) {
          Jet c(n, d->chart.order);
          for (int a = 1; a <= n; ++a)
            c = c + d->chart.omega.at(s - 1, a - 1) * d->T.at({a, t, l});
          MultiIndex y = zero_index(n);
          ++y[s - 1];
          ++y[t - 1];
          expect.add_term(0, y, {l}, c.scaled(GaussianRational(1, 3)));
        }
    CHECK(reliably_equal(sol.r_component(2), expect));
    if (std::string(name) == "kahler2d") CHECK(reliably_zero(sol.r_component(2)));
  }
}

TEST_CASE("fedosov equation residual vanishes per degree") {
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    FedosovSolution sol(corpus(name, 8), 7);
    for (int d = 1; d <= 6; ++d) {
      INFO(name, " degree ", d);
      CHECK(reliably_zero(sol.equation_residual(d)));
    }
  }
}

TEST_CASE("fedosov connection is flat on random sections") {
  std::mt19937 rng(31);
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name, 8);
    FedosovSolution sol(d, 7);
    for (int t = 0; t < 10; ++t) {
      WickElement a = random_element(rng, d->chart.dim, 8, 0);
      for (Variant v : {Variant::wick, Variant::weyl}) {
        int guaranteed = 0;
        WickElement res = sol.flatness_residual(a, v, &guaranteed);
        INFO(name, " guaranteed through Deg ", guaranteed);
        CHECK(guaranteed >= 4);
        CHECK(reliably_zero(res));
      }
    }
  }
}

TEST_CASE("tau sections are flat and project back") {
  std::mt19937 rng(37);
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name, 8);
    FedosovSolution sol(d, 7);
    for (int t = 0; t < 5; ++t) {
      Jet f = random_polynomial(rng, d->chart.dim, 8, 3);
      for (Variant v : {Variant::wick, Variant::weyl}) {
        TauExpansion tau = lift_tau(sol, f, v, 5);
        CHECK(reliably_zero(tau_flatness_residual(sol, tau, v)));
        CHECK(agree_at_reliable_order(sigma_project(tau.total()).terms().begin()->second, f));
      }
    }
  }
}

TEST_CASE("star axioms at second order") {
  std::mt19937 rng(41);
  const int N = 2;
  StarBudget budget{N};
  for (const char* name : {"flat2d", "kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name, budget.jet_order());
    FedosovSolution sol(d, budget.r_max_deg());
    int n = d->chart.dim;
    Jet one = Jet::constant(n, d->chart.order, GaussianRational(1));
    for (int t = 0; t < 4; ++t) {
      Jet f = random_polynomial(rng, n, d->chart.order, 3);
      Jet g = random_polynomial(rng, n, d->chart.order, 3);
      Jet h = random_polynomial(rng, n, d->chart.order, 2);
      for (Variant v : {Variant::wick, Variant::weyl}) {
        // unit
        CHECK(reliably_equal(star(sol, one, f, N, v), FormalFunction::from_jet(f), N));
        CHECK(reliably_equal(star(sol, f, one, N, v), FormalFunction::from_jet(f), N));
        // C0 = fg
        FormalFunction fg = star(sol, f, g, N, v);
        CHECK(agree_at_reliable_order(fg.coefficient(0, n, 0), f * g));
        // associativity through nu^N
        FormalFunction lhs = star_multiply(sol, fg, FormalFunction::from_jet(h), N, v);
        FormalFunction rhs = star_multiply(sol, FormalFunction::from_jet(f),
                                           star(sol, g, h, N, v), N, v);
        CHECK(reliably_equal(lhs, rhs, N));
      }
      // bracket normalizations
      FormalFunction fg = star(sol, f, g, N, Variant::wick);
      FormalFunction gf = star(sol, g, f, N, Variant::wick);
      Jet pb = poisson_bracket(*d, f, g);
      CHECK(agree_at_reliable_order(fg.coefficient(1, n, 0) - gf.coefficient(1, n, 0),
                                    pb.scaled(GaussianRational::unit_i())));
      FormalFunction fgp = star(sol, f, g, N, Variant::weyl);
      CHECK(agree_at_reliable_order(fgp.coefficient(1, n, 0),
                                    pb.scaled(GaussianRational(Rational(0), Rational(1, 2)))));
    }
  }
}

TEST_CASE("normalized product matches the moyal-weyl oracle on flat charts") {
  const int N = 3;
  StarBudget budget{N};
  for (const char* name : {"flat2d", "flat_c2"}) {
    auto d = corpus(name, budget.jet_order());
    FedosovSolution sol(d, budget.r_max_deg());
    int n = d->chart.dim;
    std::mt19937 rng(43);
    for (int t = 0; t < 6; ++t) {
      Jet f = random_polynomial(rng, n, d->chart.order, 3);
      Jet g = random_polynomial(rng, n, d->chart.order, 3);
      FormalFunction fg = star(sol, f, g, N, Variant::weyl);
      for (int r = 0; r <= N; ++r) {
        Jet oracle = moyal_coefficient(d->omega_inv, f, g, r);
        CHECK(agree_at_reliable_order(fg.coefficient(r, n, 0), oracle));
      }
    }
  }
}

TEST_CASE("B intertwines the two products") {
  std::mt19937 rng(47);
  const int N = 2;
  StarBudget budget{N};
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name, budget.jet_order());
    FedosovSolution sol(d, budget.r_max_deg());
    int n = d->chart.dim;
    for (int t = 0; t < 3; ++t) {
      Jet f = random_polynomial(rng, n, d->chart.order, 3);
      Jet g = random_polynomial(rng, n, d->chart.order, 3);
      FormalFunction lhs = apply_B(sol, star(sol, f, g, N, Variant::wick), N);
      FormalFunction rhs = star_multiply(sol, apply_B(sol, FormalFunction::from_jet(f), N),
                                         apply_B(sol, FormalFunction::from_jet(g), N), N,
                                         Variant::weyl);
      CHECK(reliably_equal(lhs, rhs, N));
    }
  }
}

TEST_CASE("coefficient tables agree with direct star products") {
  const int N = 2;
  StarBudget budget{N};
  auto d = corpus("kahler2d", budget.jet_order());
  FedosovSolution sol(d, budget.r_max_deg());
  StarTables par = extract_tables(sol, N, Variant::wick, 2, true);
  StarTables ser = extract_tables(sol, N, Variant::wick, 2, false);
  CHECK(par.entries == ser.entries);
  for (auto& [key, vals] : par.entries) {
    Jet f(2, d->chart.order, {{key.first, GaussianRational(1)}});
    Jet g(2, d->chart.order, {{key.second, GaussianRational(1)}});
    FormalFunction fg = star(sol, f, g, N, Variant::wick);
    for (int r = 0; r <= N; ++r) CHECK(vals[r] == fg.value_at_base(r));
  }
}

TEST_CASE("second-order antisymmetric coefficient is consistent") {
  std::mt19937 rng(53);
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name, 10);
    FedosovSolution sol(d, 7);
    for (int t = 0; t < 3; ++t) {
      Jet f = random_polynomial(rng, d->chart.dim, d->chart.order, 2);
      Jet g = random_polynomial(rng, d->chart.dim, d->chart.order, 2);
      CHECK_NOTHROW(c2_minus(sol, f, g));  // throws if the two routes disagree
    }
  }
}

TEST_CASE("commutator laplace relation on random quadratic elements") {
  std::mt19937 rng(59);
  for (const char* name : {"kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name, 8);
    JetMatrix lam = wick_pairing(*d);
    TruncationPolicy p{30};
    int n = d->chart.dim;
    for (int t = 0; t < 20; ++t) {
      // Deg = 2, deg_s = 2, deg_a = 0 random pairs
      WickElement a(n, 8), b(n, 8);
      for (int k = 0; k < 3; ++k) {
        MultiIndex y = zero_index(n);
        ++y[rng() % n];
        ++y[rng() % n];
        a.add_key(WickKey{0, y, 0}, random_jet(rng, n, 8, 2));
        MultiIndex z = zero_index(n);
        ++z[rng() % n];
        ++z[rng() % n];
        b.add_key(WickKey{0, z, 0}, random_jet(rng, n, 8, 2));
      }
      WickElement c = nu_divide(graded_commutator(a, b, lam, p))
                          .scaled(GaussianRational::unit_i());
      WickElement c0 = c.deg_s_component(0);
      WickElement c2 = c.deg_s_component(2);
      CHECK(reliably_equal(c0, laplacian(c2, d->g_inv).times_nu(1)));
    }
  }
}

TEST_CASE("characteristic class routes and identities") {
  StarBudget budget{2};
  for (const char* name : {"flat2d", "flat_c2", "kahler2d", "nonintegrable4d"}) {
    auto d = corpus(name, budget.jet_order());
    FedosovSolution sol(d, budget.r_max_deg());
    ClassCheckReport rep = canonical_class_check(sol);
    INFO(name);
    CHECK(rep.routes_agree);
    CHECK(rep.c2_route_agrees);
    CHECK(rep.lambda_equals_dmu);
    CHECK(rep.lemma_split_holds);
    CHECK(rep.lemma_laplace_holds);
    CHECK(rep.exactness_witness_holds);
    CHECK(rep.kappa_closed);
    CHECK(rep.gamma_closed);
    CHECK(rep.trace_R_zero);
    if (std::string(name).starts_with("flat")) CHECK(rep.kappa.is_reliably_zero());
    if (std::string(name) == "kahler2d") CHECK_FALSE(rep.kappa.is_reliably_zero());
  }
}

TEST_CASE("kahler separation of variables at first order") {
  // On an integrable chart C_1 differentiates f only along (0,1)-directions
  // and g along (1,0)-directions at the base point, detected through the
  // projector Pi = (Id - iJ)/2 acting on the extracted C_1 matrix.
  StarBudget budget{1};
  auto d = corpus("kahler2d", budget.jet_order());
  FedosovSolution sol(d, budget.r_max_deg());
  int n = d->chart.dim;
  CHECK(reliably_zero(sol.torsion_elt()));
  CHECK(reliably_zero(sol.r_component(2)));
  for (auto& m : d->mu_form) CHECK(m.is_zero());

  // C_1(x^a, x^b) at base as a matrix M_{ab}
  std::vector<std::vector<GaussianRational>> M(n, std::vector<GaussianRational>(n));
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b) {
      Jet xa = Jet::variable(n, d->chart.order, a);
      Jet xb = Jet::variable(n, d->chart.order, b);
      M[a - 1][b - 1] = star(sol, xa, xb, 1, Variant::wick).value_at_base(1);
    }
  // Pi-bar * M = 0 and M * Pi^T = 0 with Pi = (Id - iJ)/2 at the base point
  GaussianRational i = GaussianRational::unit_i(), half(1, 2);
  std::vector<std::vector<GaussianRational>> Pi(n, std::vector<GaussianRational>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      GaussianRational id(r == c ? 1 : 0);
      Pi[r][c] = (id - i * d->chart.J.at(r, c).value_at_base()) * half;
    }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      GaussianRational left, right;
      for (int k = 0; k < n; ++k) {
        left += Pi[r][k].conj() * M[k][c];
        right += M[r][k] * Pi[c][k];
      }
      CHECK(left == GaussianRational(0));
      CHECK(right == GaussianRational(0));
    }
}
