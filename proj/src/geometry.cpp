#include "akdq/geometry.hpp"

#include <sstream>

namespace akdq {

namespace {

std::string component_witness(const std::string& tensor, std::initializer_list<int> idx,
                              const Jet& value) {
  std::ostringstream out;
  out << tensor << "[";
  bool first = true;
  for (int i : idx) {
    if (!first) out << ",";
    first = false;
    out << i;
  }
  out << "] = " << value.to_string();
  return out.str();
}

}  // namespace

bool ValidationReport::all_pass() const {
  for (auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::first_failure() const {
  for (auto& c : checks)
    if (!c.pass) return c.name + ": " + c.witness;
  return "";
}

bool TwoForm::is_reliably_zero() const {
  for (int k = 0; k < comp.rows(); ++k)
    for (int l = 0; l < comp.cols(); ++l)
      if (!comp.at(k, l).is_zero()) return false;
  return true;
}

TwoForm exterior_derivative(const std::vector<Jet>& one_form) {
  int n = static_cast<int>(one_form.size());
  int dim = one_form[0].dim();
  int order = one_form[0].order();
  TwoForm d{JetMatrix::zero(n, n, dim, order - 1)};
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      d.comp.at(k, l) = one_form[l].derivative(k + 1) - one_form[k].derivative(l + 1);
  return d;
}

JetTensor exterior_derivative(const TwoForm& phi) {
  int n = phi.comp.rows();
  int dim = phi.comp.at(0, 0).dim();
  int order = phi.comp.at(0, 0).order();
  JetTensor d(dim, 3, Jet(dim, order - 1));
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l)
        d.at({j, k, l}) = phi.comp.at(k - 1, l - 1).derivative(j) +
                          phi.comp.at(l - 1, j - 1).derivative(k) +
                          phi.comp.at(j - 1, k - 1).derivative(l);
  return d;
}

ValidationReport validate_chart(const ChartGeometry& c) {
  ValidationReport rep;
  if (c.dim <= 0 || c.dim % 2 != 0)
    throw error(errc::input, "chart dimension must be even and positive");
  if (c.omega.rows() != c.dim || c.omega.cols() != c.dim || c.J.rows() != c.dim ||
      c.J.cols() != c.dim)
    throw error(errc::input, "omega and J must be dim x dim");
  int n = c.dim;

  {
    Check chk{"omega antisymmetric", true, ""};
    for (int j = 0; j < n && chk.pass; ++j)
      for (int k = 0; k < n && chk.pass; ++k) {
        Jet r = c.omega.at(j, k) + c.omega.at(k, j);
        if (!r.is_zero()) {
          chk.pass = false;
          chk.witness = component_witness("omega[j,k]+omega[k,j]", {j + 1, k + 1}, r);
        }
      }
    rep.checks.push_back(chk);
  }
  {
    Check chk{"J^2 = -Id", true, ""};
    JetMatrix r = c.J * c.J + JetMatrix::identity(n, c.dim, c.order);
    for (int j = 0; j < n && chk.pass; ++j)
      for (int k = 0; k < n && chk.pass; ++k)
        if (!r.at(j, k).is_zero()) {
          chk.pass = false;
          chk.witness = component_witness("J^2+Id", {j + 1, k + 1}, r.at(j, k));
        }
    rep.checks.push_back(chk);
  }
  {
    Check chk{"d omega = 0", true, ""};
    for (int j = 1; j <= n && chk.pass; ++j)
      for (int k = j + 1; k <= n && chk.pass; ++k)
        for (int l = k + 1; l <= n && chk.pass; ++l) {
          Jet r = c.omega.at(k - 1, l - 1).derivative(j) +
                  c.omega.at(l - 1, j - 1).derivative(k) +
                  c.omega.at(j - 1, k - 1).derivative(l);
          if (!r.is_zero()) {
            chk.pass = false;
            chk.witness = component_witness("d omega", {j, k, l}, r);
          }
        }
    rep.checks.push_back(chk);
  }
  {
    Check chk{"J^T omega J = omega", true, ""};
    JetMatrix r = c.J.transposed() * c.omega * c.J - c.omega;
    for (int j = 0; j < n && chk.pass; ++j)
      for (int k = 0; k < n && chk.pass; ++k)
        if (!r.at(j, k).is_zero()) {
          chk.pass = false;
          chk.witness = component_witness("J^T omega J - omega", {j + 1, k + 1}, r.at(j, k));
        }
    rep.checks.push_back(chk);
  }
  {
    // g_{jk} = J^a_j omega_{ak}
    JetMatrix g = c.J.transposed() * c.omega;
    Check sym{"g symmetric", true, ""};
    for (int j = 0; j < n && sym.pass; ++j)
      for (int k = 0; k < n && sym.pass; ++k) {
        Jet r = g.at(j, k) - g.at(k, j);
        if (!r.is_zero()) {
          sym.pass = false;
          sym.witness = component_witness("g[j,k]-g[k,j]", {j + 1, k + 1}, r);
        }
      }
    rep.checks.push_back(sym);

    Check nondeg{"g and omega nondegenerate at base point", true, ""};
    try {
      (void)invert(g);
      (void)invert(c.omega);
    } catch (const error& e) {
      if (e.kind() != errc::degeneracy) throw;
      nondeg.pass = false;
      nondeg.witness = e.what();
    }
    rep.checks.push_back(nondeg);
  }
  return rep;
}

void require_valid(const ChartGeometry& c) {
  ValidationReport rep = validate_chart(c);
  for (auto& chk : rep.checks)
    if (!chk.pass) {
      errc kind = chk.name.find("nondegenerate") != std::string::npos ? errc::degeneracy
                                                                      : errc::invalid_geometry;
      throw error(kind, "chart '" + c.name + "' failed check '" + chk.name + "': " + chk.witness);
    }
}

void derive_metric(DerivedGeometry& d) {
  const ChartGeometry& c = d.chart;
  d.g = c.J.transposed() * c.omega;
  d.g_inv = invert(d.g);
  d.omega_inv = invert(c.omega);

  // Both halves of the compatibility relation J = g omega^{-1} = g^{-1} omega.
  JetMatrix r1 = (d.g * d.omega_inv).transposed() - c.J;
  JetMatrix r2 = d.g_inv * c.omega - c.J;
  for (int j = 0; j < c.dim; ++j)
    for (int k = 0; k < c.dim; ++k) {
      if (!r1.at(j, k).is_zero())
        throw error(errc::internal_consistency,
                    component_witness("J - g.omega_inv", {j + 1, k + 1}, r1.at(j, k)));
      if (!r2.at(j, k).is_zero())
        throw error(errc::internal_consistency,
                    component_witness("J - g_inv.omega", {j + 1, k + 1}, r2.at(j, k)));
    }
}

void nijenhuis_tensor(DerivedGeometry& d) {
  const ChartGeometry& c = d.chart;
  int n = c.dim;
  d.N = JetTensor(n, 3, Jet(n, c.order - 1));
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        Jet acc(n, c.order - 1);
        for (int a = 1; a <= n; ++a) {
          acc = acc + c.J.at(l - 1, j - 1).derivative(a) * c.J.at(a - 1, k - 1);
          acc = acc - c.J.at(l - 1, k - 1).derivative(a) * c.J.at(a - 1, j - 1);
          acc = acc + (c.J.at(a - 1, k - 1).derivative(j) - c.J.at(a - 1, j - 1).derivative(k)) *
                          c.J.at(l - 1, a - 1);
        }
        d.N.at({l, j, k}) = acc;
      }

  // Antisymmetry and both type identities.
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        Jet anti = d.N.at({l, j, k}) + d.N.at({l, k, j});
        if (!anti.is_zero())
          throw error(errc::internal_consistency,
                      component_witness("N antisymmetry", {l, j, k}, anti));
        Jet id1(n, c.order - 1), id2(n, c.order - 1);
        for (int a = 1; a <= n; ++a)
          for (int b = 1; b <= n; ++b) {
            id1 = id1 + c.J.at(a - 1, j - 1) * d.N.at({b, a, k}) * c.J.at(l - 1, b - 1);
            id2 = id2 + c.J.at(a - 1, j - 1) * d.N.at({l, a, b}) * c.J.at(b - 1, k - 1);
          }
        Jet r1 = d.N.at({l, j, k}) - id1;
        Jet r2 = d.N.at({l, j, k}) + id2;
        if (!r1.is_zero())
          throw error(errc::internal_consistency,
                      component_witness("N type identity 1", {l, j, k}, r1));
        if (!r2.is_zero())
          throw error(errc::internal_consistency,
                      component_witness("N type identity 2", {l, j, k}, r2));
      }
}

JetTensor levi_civita(const JetMatrix& g, const JetMatrix& g_inv) {
  int n = g.rows();
  int dim = g.at(0, 0).dim();
  int order = g.at(0, 0).order() - 1;
  JetTensor lc(dim, 3, Jet(dim, order));
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        Jet acc(dim, order);
        for (int m = 1; m <= n; ++m) {
          Jet low = g.at(m - 1, k - 1).derivative(j) + g.at(m - 1, j - 1).derivative(k) -
                    g.at(j - 1, k - 1).derivative(m);
          acc = acc + g_inv.at(l - 1, m - 1) * low;
        }
        lc.at({l, j, k}) = acc.scaled(GaussianRational(1, 2));
      }
  return lc;
}

JetTensor covariant_derivative_lower2(const JetTensor& Gamma, const JetMatrix& A) {
  int n = A.rows();
  int dim = A.at(0, 0).dim();
  int order = std::min(A.at(0, 0).order() - 1, Gamma.at({1, 1, 1}).order());
  JetTensor nab(dim, 3, Jet(dim, order));
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l) {
        Jet acc = A.at(k - 1, l - 1).derivative(j);
        for (int a = 1; a <= n; ++a) {
          acc = acc - Gamma.at({a, j, k}) * A.at(a - 1, l - 1);
          acc = acc - Gamma.at({a, j, l}) * A.at(k - 1, a - 1);
        }
        nab.at({j, k, l}) = acc.truncated(order);
      }
  return nab;
}

JetTensor covariant_derivative_mixed(const JetTensor& Gamma, const JetMatrix& J) {
  int n = J.rows();
  int dim = J.at(0, 0).dim();
  int order = std::min(J.at(0, 0).order() - 1, Gamma.at({1, 1, 1}).order());
  JetTensor nab(dim, 3, Jet(dim, order));
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l) {
        Jet acc = J.at(k - 1, l - 1).derivative(j);
        for (int a = 1; a <= n; ++a) {
          acc = acc + Gamma.at({k, j, a}) * J.at(a - 1, l - 1);
          acc = acc - Gamma.at({a, j, l}) * J.at(k - 1, a - 1);
        }
        nab.at({j, k, l}) = acc.truncated(order);
      }
  return nab;
}

bool cyclic_torsion_identity_holds(const JetTensor& Gamma, const JetTensor& T,
                                   const JetMatrix& omega) {
  int n = omega.rows();
  JetTensor nab = covariant_derivative_lower2(Gamma, omega);
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l) {
        Jet lhs = nab.at({j, k, l}) + nab.at({k, l, j}) + nab.at({l, j, k});
        Jet rhs(omega.at(0, 0).dim(), lhs.order());
        for (int a = 1; a <= n; ++a)
          rhs = rhs + T.at({a, j, k}) * omega.at(a - 1, l - 1) +
                T.at({a, k, l}) * omega.at(a - 1, j - 1) +
                T.at({a, l, j}) * omega.at(a - 1, k - 1);
        if (!agree_at_reliable_order(lhs, -rhs)) return false;
      }
  return true;
}

void yano_connection(DerivedGeometry& d) {
  const ChartGeometry& c = d.chart;
  int n = c.dim;

  // Torsion choice T = -N/4.
  d.T = JetTensor(n, 3, Jet(n, c.order - 1));
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        d.T.at({l, j, k}) = d.N.at({l, j, k}).scaled(GaussianRational(-1, 4));

  // S built from T must cancel N exactly (necessary condition for J-parallelism).
  d.S = JetTensor(n, 3, Jet(n, c.order - 1));
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        Jet acc = d.T.at({l, j, k});
        for (int a = 1; a <= n; ++a)
          for (int b = 1; b <= n; ++b) {
            acc = acc - c.J.at(a - 1, j - 1) * d.T.at({l, a, b}) * c.J.at(b - 1, k - 1);
            acc = acc + c.J.at(a - 1, j - 1) * d.T.at({b, a, k}) * c.J.at(l - 1, b - 1);
            acc = acc - c.J.at(a - 1, k - 1) * d.T.at({b, a, j}) * c.J.at(l - 1, b - 1);
          }
        d.S.at({l, j, k}) = acc;
        Jet r = d.N.at({l, j, k}) + acc;
        if (!agree_at_reliable_order(r, Jet(n, r.order())))
          throw error(errc::internal_consistency, component_witness("N+S", {l, j, k}, r));
      }

  // Metric connection with the prescribed torsion: Levi-Civita plus contorsion
  // (1/2)(T_{jkl} - T_{jlk} - T_{klj}) with T_{abc} = g_{ca} T^a_{ab}.
  JetTensor lc = levi_civita(d.g, d.g_inv);
  JetTensor t_low(n, 3, Jet(n, c.order - 1));
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l) {
        Jet acc(n, c.order - 1);
        for (int a = 1; a <= n; ++a) acc = acc + d.g.at(l - 1, a - 1) * d.T.at({a, j, k});
        t_low.at({j, k, l}) = acc;
      }
  d.Gamma = JetTensor(n, 3, Jet(n, c.order - 1));
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        Jet acc = lc.at({l, j, k});
        for (int m = 1; m <= n; ++m) {
          Jet contorsion = t_low.at({j, k, m}) - t_low.at({j, m, k}) - t_low.at({k, m, j});
          acc = acc + d.g_inv.at(l - 1, m - 1) * contorsion.scaled(GaussianRational(1, 2));
        }
        d.Gamma.at({l, j, k}) = acc;
      }

  // Defining properties, verified before returning.
  for (int l = 1; l <= n; ++l)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        Jet r = d.Gamma.at({l, j, k}) - d.Gamma.at({l, k, j}) - d.T.at({l, j, k});
        if (!r.is_zero())
          throw error(errc::internal_consistency, component_witness("torsion", {l, j, k}, r));
      }
  JetTensor nab_g = covariant_derivative_lower2(d.Gamma, d.g);
  JetTensor nab_omega = covariant_derivative_lower2(d.Gamma, c.omega);
  JetTensor nab_J = covariant_derivative_mixed(d.Gamma, c.J);
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l) {
        if (!nab_g.at({j, k, l}).is_zero())
          throw error(errc::internal_consistency,
                      component_witness("nabla g", {j, k, l}, nab_g.at({j, k, l})));
        if (!nab_omega.at({j, k, l}).is_zero())
          throw error(errc::internal_consistency,
                      component_witness("nabla omega", {j, k, l}, nab_omega.at({j, k, l})));
        if (!nab_J.at({j, k, l}).is_zero())
          throw error(errc::internal_consistency,
                      component_witness("nabla J", {j, k, l}, nab_J.at({j, k, l})));
      }

  // Z vanishes for this connection (the final step of the uniqueness proof).
  d.Z = JetTensor(n, 3, Jet(n, c.order - 1));
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l) {
        Jet acc(n, c.order - 1);
        for (int a = 1; a <= n; ++a)
          acc = acc + d.T.at({a, j, k}) * c.omega.at(a - 1, l - 1) +
                d.T.at({a, k, l}) * c.omega.at(a - 1, j - 1) +
                d.T.at({a, l, j}) * c.omega.at(a - 1, k - 1);
        d.Z.at({j, k, l}) = acc;
        if (!acc.is_zero())
          throw error(errc::internal_consistency, component_witness("Z", {j, k, l}, acc));
      }
}

void curvature_tensor(DerivedGeometry& d) {
  const ChartGeometry& c = d.chart;
  int n = c.dim;
  if (c.order < 2) throw error(errc::order, "jet order >= 2 required for curvature");
  int order = c.order - 2;
  d.R = JetTensor(n, 4, Jet(n, order));
  for (int s = 1; s <= n; ++s)
    for (int t = 1; t <= n; ++t)
      for (int k = 1; k <= n; ++k)
        for (int l = 1; l <= n; ++l) {
          Jet acc = d.Gamma.at({s, l, t}).derivative(k) - d.Gamma.at({s, k, t}).derivative(l);
          for (int a = 1; a <= n; ++a)
            acc = acc + d.Gamma.at({s, k, a}) * d.Gamma.at({a, l, t}) -
                  d.Gamma.at({s, l, a}) * d.Gamma.at({a, k, t});
          d.R.at({s, t, k, l}) = acc.truncated(order);
        }

  // omega_{sa} R^a_{tkl} symmetric in (s,t); trace R^t_{tkl} = 0.
  for (int k = 1; k <= n; ++k)
    for (int l = 1; l <= n; ++l) {
      Jet trace(n, order);
      for (int t = 1; t <= n; ++t) trace = trace + d.R.at({t, t, k, l});
      if (!agree_at_reliable_order(trace, Jet(n, order)))
        throw error(errc::internal_consistency, component_witness("tr R", {k, l}, trace));
      for (int s = 1; s <= n; ++s)
        for (int t = 1; t <= n; ++t) {
          Jet lhs(n, order), rhs(n, order);
          for (int a = 1; a <= n; ++a) {
            lhs = lhs + c.omega.at(s - 1, a - 1) * d.R.at({a, t, k, l});
            rhs = rhs + c.omega.at(t - 1, a - 1) * d.R.at({a, s, k, l});
          }
          if (!agree_at_reliable_order(lhs, rhs))
            throw error(errc::internal_consistency,
                        component_witness("omega.R symmetry", {s, t, k, l}, lhs - rhs));
        }
    }
}

void chern_weil_form(DerivedGeometry& d) {
  const ChartGeometry& c = d.chart;
  int n = c.dim;
  int order = c.order - 2;
  d.gamma_form.comp = JetMatrix::zero(n, n, n, order);
  for (int k = 1; k <= n; ++k)
    for (int l = 1; l <= n; ++l) {
      Jet acc(n, order);
      for (int s = 1; s <= n; ++s)
        for (int t = 1; t <= n; ++t)
          acc = acc + c.J.at(t - 1, s - 1) * d.R.at({s, t, k, l});
      d.gamma_form.comp.at(k - 1, l - 1) = acc.scaled(GaussianRational(-1, 2));
    }

  d.mu_form.assign(n, Jet(n, c.order - 1));
  for (int l = 1; l <= n; ++l) {
    Jet acc(n, c.order - 1);
    for (int s = 1; s <= n; ++s)
      for (int t = 1; t <= n; ++t)
        acc = acc + c.J.at(t - 1, s - 1) * d.T.at({s, t, l});
    d.mu_form[l - 1] = acc.scaled(GaussianRational(1, 6));
  }

  if (order >= 1) {
    JetTensor dgamma = exterior_derivative(d.gamma_form);
    if (!dgamma.is_reliably_zero())
      throw error(errc::internal_consistency, "Chern-Weil form is not closed");
  }
}

DerivedGeometry derive_all(const ChartGeometry& c) {
  require_valid(c);
  DerivedGeometry d;
  d.chart = c;
  derive_metric(d);
  nijenhuis_tensor(d);
  yano_connection(d);
  curvature_tensor(d);
  chern_weil_form(d);
  return d;
}

}  // namespace akdq
