#ifndef AKDQ_GEOMETRY_HPP
#define AKDQ_GEOMETRY_HPP

#include <string>
#include <vector>

#include "akdq/jet.hpp"

namespace akdq {

// Chart data at the base point: omega.at(j,k) = omega_{jk} and
// J.at(k,j) = J^k_j (upper index is the row, so J acts on vector components
// by plain matrix multiplication).
struct ChartGeometry {
  int dim = 0;
  int order = 0;
  JetMatrix omega;
  JetMatrix J;
  std::string name;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string witness;  // first failing component, empty when pass
};

struct ValidationReport {
  std::vector<Check> checks;
  bool all_pass() const;
  std::string first_failure() const;
};

// A 2-form phi = (1/2) A_{kl} dx^k /\ dx^l with A antisymmetric.
struct TwoForm {
  JetMatrix comp;
  bool is_reliably_zero() const;
  bool equals_reliably(const TwoForm& o) const { return comp.equals_reliably(o.comp); }
  TwoForm operator-(const TwoForm& o) const { return {comp - o.comp}; }
  TwoForm scaled(const GaussianRational& c) const { return {comp.scaled(c)}; }
};

TwoForm exterior_derivative(const std::vector<Jet>& one_form);
// Components (d phi)_{jkl} of the 3-form differential; zero iff phi is closed.
JetTensor exterior_derivative(const TwoForm& phi);

// Everything the star-product construction needs, derived from (omega, J).
struct DerivedGeometry {
  ChartGeometry chart;
  JetMatrix g;          // g_{jk}
  JetMatrix g_inv;      // g^{jk}
  JetMatrix omega_inv;  // omega^{jk}
  JetTensor N;          // N^l_{jk}, indices (l,j,k)
  JetTensor S;          // S^l_{jk}
  JetTensor Gamma;      // Gamma^l_{jk}, indices (l,j,k)
  JetTensor T;          // torsion T^l_{jk} = -N^l_{jk}/4
  JetTensor R;          // R^s_{tkl}, indices (s,t,k,l)
  JetTensor Z;          // Z_{jkl}
  TwoForm gamma_form;   // Chern-Weil form
  std::vector<Jet> mu_form;  // mu_l
};

// Exact identity checks on the raw chart data: omega antisymmetric, J^2=-Id,
// d omega = 0, J^T omega J = omega, g symmetric with invertible constant term.
ValidationReport validate_chart(const ChartGeometry& c);

// Throws errc::invalid_geometry (or errc::degeneracy for a singular g/omega)
// when any check fails.
void require_valid(const ChartGeometry& c);

// Individual derivation steps.  Each verifies its own postconditions and
// throws errc::internal_consistency with a witness if they fail.
void derive_metric(DerivedGeometry& d);
void nijenhuis_tensor(DerivedGeometry& d);
void yano_connection(DerivedGeometry& d);
void curvature_tensor(DerivedGeometry& d);
void chern_weil_form(DerivedGeometry& d);

// validate + all five steps.
DerivedGeometry derive_all(const ChartGeometry& c);

// Christoffel symbols of the Levi-Civita connection of g, indices (l,j,k).
JetTensor levi_civita(const JetMatrix& g, const JetMatrix& g_inv);

// Covariant derivative helpers for a connection with symbols Gamma.
// nabla_lower2: nabla_j A_{kl} for a (0,2)-tensor; indices (j,k,l).
JetTensor covariant_derivative_lower2(const JetTensor& Gamma, const JetMatrix& A);
// nabla_mixed: nabla_j J^k_l for a (1,1)-tensor; indices (j,k,l).
JetTensor covariant_derivative_mixed(const JetTensor& Gamma, const JetMatrix& J);

// The cyclic identity relating sum_cyc nabla omega to the torsion trilinear
// term; holds for any metric-free connection as a consequence of d omega = 0.
bool cyclic_torsion_identity_holds(const JetTensor& Gamma, const JetTensor& T,
                                   const JetMatrix& omega);

}  // namespace akdq

#endif
