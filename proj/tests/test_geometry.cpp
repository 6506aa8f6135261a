#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "akdq/chart_io.hpp"
#include "akdq/geometry.hpp"

using namespace akdq;

namespace {

ChartGeometry corpus(const std::string& name, int order = 6) {
  return load_chart(std::string(CHARTS_DIR) + "/" + name + ".json", order);
}

// Oracle for the Levi-Civita symbols: instead of the closed formula, verify
// the defining properties directly -- symmetry in the lower indices and
// metricity of g.
bool is_levi_civita_of(const JetTensor& Gamma, const DerivedGeometry& d) {
  int n = d.chart.dim;
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = j + 1; k <= n; ++k)
        if (!agree_at_reliable_order(Gamma.at({l, j, k}), Gamma.at({l, k, j}))) return false;
  return covariant_derivative_lower2(Gamma, d.g).is_reliably_zero();
}

}  // namespace

TEST_CASE("corpus charts validate") {
  for (const char* name : {"flat2d", "flat_c2", "kahler2d", "nonintegrable4d"}) {
    ChartGeometry c = corpus(name);
    ValidationReport rep = validate_chart(c);
    INFO(name, ": ", rep.first_failure());
    CHECK(rep.all_pass());
  }
}

TEST_CASE("broken charts are rejected") {
  ChartGeometry c = corpus("flat2d");
  ChartGeometry bad = c;
  bad.J.at(0, 1) = Jet::constant(2, 6, GaussianRational(2));  // J^2 != -Id
  CHECK_FALSE(validate_chart(bad).all_pass());
  CHECK_THROWS_AS(require_valid(bad), error);

  ChartGeometry degen = c;
  degen.omega.at(0, 1) = Jet::variable(2, 6, 1);  // omega singular at base
  degen.omega.at(1, 0) = -Jet::variable(2, 6, 1);
  ValidationReport rep = validate_chart(degen);
  CHECK_FALSE(rep.all_pass());
}

TEST_CASE("metric compatibility identities") {
  for (const char* name : {"flat2d", "flat_c2", "kahler2d", "nonintegrable4d"}) {
    DerivedGeometry d = derive_all(corpus(name));
    int n = d.chart.dim;
    // g_{jk} = J^a_j omega_{ak}, g symmetric positive at base (diagonal 1 here)
    JetMatrix g2 = d.chart.J.transposed() * d.chart.omega;
    CHECK(g2.equals_reliably(d.g));
    CHECK(d.g.equals_reliably(d.g.transposed()));
    // omega^{-1} and g^{-1} really invert
    CHECK((d.omega_inv * d.chart.omega).equals_reliably(JetMatrix::identity(n, n, d.chart.order)));
    CHECK((d.g_inv * d.g).equals_reliably(JetMatrix::identity(n, n, d.chart.order)));
  }
}

TEST_CASE("nijenhuis tensor properties") {
  DerivedGeometry flat = derive_all(corpus("flat2d"));
  CHECK(flat.N.is_reliably_zero());
  DerivedGeometry kah = derive_all(corpus("kahler2d"));
  CHECK(kah.N.is_reliably_zero());
  DerivedGeometry non = derive_all(corpus("nonintegrable4d"));
  CHECK_FALSE(non.N.is_reliably_zero());
  // antisymmetry N^l_{jk} = -N^l_{kj}
  int n = non.chart.dim;
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        CHECK(agree_at_reliable_order(non.N.at({l, j, k}), -non.N.at({l, k, j})));
}

TEST_CASE("yano connection parallelizes the whole structure") {
  for (const char* name : {"flat2d", "flat_c2", "kahler2d", "nonintegrable4d"}) {
    DerivedGeometry d = derive_all(corpus(name));
    int n = d.chart.dim;
    CHECK(covariant_derivative_lower2(d.Gamma, d.g).is_reliably_zero());
    CHECK(covariant_derivative_lower2(d.Gamma, d.chart.omega).is_reliably_zero());
    CHECK(covariant_derivative_mixed(d.Gamma, d.chart.J).is_reliably_zero());
    CHECK(d.Z.is_reliably_zero());
    // torsion = Gamma antisymmetrization and equals -N/4
    for (int l = 1; l <= n; ++l)
      for (int j = 1; j <= n; ++j)
        for (int k = 1; k <= n; ++k) {
          Jet t = d.Gamma.at({l, j, k}) - d.Gamma.at({l, k, j});
          CHECK(agree_at_reliable_order(t, d.T.at({l, j, k})));
          CHECK(agree_at_reliable_order(d.T.at({l, j, k}),
                                        d.N.at({l, j, k}).scaled(GaussianRational(-1, 4))));
        }
    CHECK(cyclic_torsion_identity_holds(d.Gamma, d.T, d.chart.omega));
  }
}

TEST_CASE("levi-civita oracle and the kahler degeneration") {
  for (const char* name : {"flat2d", "flat_c2", "kahler2d", "nonintegrable4d"}) {
    DerivedGeometry d = derive_all(corpus(name));
    JetTensor lc = levi_civita(d.g, d.g_inv);
    CHECK(is_levi_civita_of(lc, d));
    if (d.N.is_reliably_zero()) {
      // Yano == Levi-Civita on integrable charts
      int n = d.chart.dim;
      for (int l = 1; l <= n; ++l)
        for (int j = 1; j <= n; ++j)
          for (int k = 1; k <= n; ++k)
            CHECK(agree_at_reliable_order(d.Gamma.at({l, j, k}), lc.at({l, j, k})));
      CHECK(d.T.is_reliably_zero());
    }
  }
}

TEST_CASE("curvature identities") {
  for (const char* name : {"flat2d", "flat_c2", "kahler2d", "nonintegrable4d"}) {
    DerivedGeometry d = derive_all(corpus(name));
    int n = d.chart.dim;
    // omega-lowered symmetry in the first two slots
    for (int s = 1; s <= n; ++s)
      for (int t = 1; t <= n; ++t)
        for (int k = 1; k <= n; ++k)
          for (int l = 1; l <= n; ++l) {
            Jet lhs(n, d.chart.order - 2), rhs(n, d.chart.order - 2);
            for (int a = 1; a <= n; ++a) {
              lhs = lhs + d.chart.omega.at(s - 1, a - 1) * d.R.at({a, t, k, l});
              rhs = rhs + d.chart.omega.at(t - 1, a - 1) * d.R.at({a, s, k, l});
            }
            CHECK(agree_at_reliable_order(lhs, rhs));
          }
    // trace freedom and closed Chern-Weil form
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l) {
        Jet tr(n, d.chart.order - 2);
        for (int t = 1; t <= n; ++t) tr = tr + d.R.at({t, t, k, l});
        CHECK(tr.is_zero());
      }
    CHECK(exterior_derivative(d.gamma_form).is_reliably_zero());
  }
}

TEST_CASE("flat charts are flat and kahler2d has zero mu") {
  for (const char* name : {"flat2d", "flat_c2"}) {
    DerivedGeometry d = derive_all(corpus(name));
    CHECK(d.R.is_reliably_zero());
    CHECK(d.gamma_form.is_reliably_zero());
  }
  DerivedGeometry kah = derive_all(corpus("kahler2d"));
  CHECK_FALSE(kah.R.is_reliably_zero());
  for (auto& m : kah.mu_form) CHECK(m.is_zero());
}
