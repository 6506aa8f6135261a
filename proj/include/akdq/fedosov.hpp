#ifndef AKDQ_FEDOSOV_HPP
#define AKDQ_FEDOSOV_HPP

#include <memory>

#include "akdq/wick.hpp"

namespace akdq {

// Formal series sum_r nu^r f_r with Jet coefficients.
struct FormalFunction {
  int dim = 0;
  std::map<int, Jet> coeff;

  static FormalFunction from_jet(const Jet& f);
  Jet coefficient(int r, int dim_hint, int order_hint) const;
  FormalFunction operator+(const FormalFunction& o) const;
  FormalFunction operator-(const FormalFunction& o) const;
  FormalFunction truncated_nu(int max_r) const;
  GaussianRational value_at_base(int r) const;
};

bool reliably_equal(const FormalFunction& a, const FormalFunction& b, int through_nu);

enum class Variant { wick, weyl };  // plain * vs normalized *'

// Degree bookkeeping guaranteeing C_r exactly for r <= N.
struct StarBudget {
  int N = 2;
  int r_max_deg() const { return 2 * N + 3; }
  int tau_max_deg() const { return 2 * N + 1; }
  int jet_order() const { return 2 * N + 4; }
};

// Solution of the recursion for r, by Deg-homogeneous components, together
// with the pushed-forward r' = Gr.
class FedosovSolution {
public:
  FedosovSolution(std::shared_ptr<const DerivedGeometry> geom, int max_deg);

  const DerivedGeometry& geom() const { return *geom_; }
  int max_deg() const { return max_deg_; }
  const JetMatrix& pairing(Variant v) const {
    return v == Variant::wick ? lambda_ : geom_->omega_inv;
  }
  const WickElement& torsion_elt() const { return t_elt_; }
  const WickElement& curvature_elt() const { return r_elt_; }
  const WickElement& r_component(int deg) const { return r_.at(deg); }
  const WickElement& r_component(int deg, Variant v) const {
    return v == Variant::wick ? r_.at(deg) : r_primed_.at(deg);
  }
  WickElement r_total(Variant v) const;

  // Residual of the defining equation, Deg-homogeneous component d
  // (1 <= d <= max_deg - 1).  Zero by the theorem; computed independently.
  WickElement equation_residual(int d) const;

  // D a = -delta a + nabla a - (i/nu)[r, a].
  WickElement apply_D(const WickElement& a, Variant v, const TruncationPolicy& p) const;

  // D^2 a restricted to the Deg range guaranteed by max_deg(); empty result
  // means flat within range.  `guaranteed` receives the top checked Deg.
  WickElement flatness_residual(const WickElement& a, Variant v, int* guaranteed) const;

private:
  std::shared_ptr<const DerivedGeometry> geom_;
  int max_deg_;
  JetMatrix lambda_;
  WickElement t_elt_, r_elt_;
  std::vector<WickElement> r_;
  std::vector<WickElement> r_primed_;
  // quad_[k] = sum_l r^{(l+2)} o r^{(k-l+2)}, kept from the solve so that
  // equation_residual does not redo the expensive fiber products.
  std::vector<WickElement> quad_;
};

// tau(f) (or tau'(f)) by Deg-homogeneous components, deg_a = 0 each.
struct TauExpansion {
  std::vector<WickElement> comp;
  WickElement total() const;
};

// With sigma_cap >= 0, terms with nu + deg_s > sigma_cap are dropped at every
// recursion stage.  The recursion never decreases nu + deg_s (the connection
// preserves it, (i/nu)[r, .] lowers it by at most one, delta^{-1} raises it
// by one), so the surviving part of the lift is exact; it is precisely the
// part a sigma-projected product through nu^sigma_cap can see.
TauExpansion lift_tau(const FedosovSolution& sol, const Jet& f, Variant v, int tau_max_deg,
                      int sigma_cap = -1);

// D tau(f) per Deg component within the range guaranteed by the solution and
// the expansion depth; empty means flat.
WickElement tau_flatness_residual(const FedosovSolution& sol, const TauExpansion& tau,
                                  Variant v);

// f * g = sigma(tau(f) o tau(g)) through nu^N, as a formal function.
FormalFunction star_multiply(const FedosovSolution& sol, const FormalFunction& f,
                             const FormalFunction& g, int N, Variant v);

// B f = sigma(G tau(f)): the equivalence (C[[nu]], *) -> (C[[nu]], *').
FormalFunction apply_B(const FedosovSolution& sol, const FormalFunction& f, int N);

// Poisson bracket omega^{jk} d_j f d_k g.
Jet poisson_bracket(const DerivedGeometry& d, const Jet& f, const Jet& g);

// Bidifferential coefficient tables: C_r(x^a, x^b) at the base point for all
// monomial pairs with |a|,|b| <= max_input_degree and r <= N.
struct StarTables {
  int N = 0;
  Variant variant = Variant::wick;
  // key: (alpha, beta); value: C_0..C_N at the base point.
  std::map<std::pair<MultiIndex, MultiIndex>, std::vector<GaussianRational>> entries;
};

StarTables extract_tables(const FedosovSolution& sol, int N, Variant v, int max_input_degree,
                          bool parallel = true);

// C_2^-(f,g) both ways: from the t_0/t_1 formula and from antisymmetrizing
// the nu^2 star coefficient.  Mismatch throws errc::internal_consistency.
GaussianRational c2_minus(const FedosovSolution& sol, const Jet& f, const Jet& g);

// The three routes to the closed 2-form kappa, plus its reconstruction from
// C_2^- on coordinate functions (constant matrix at the base point).
TwoForm kappa_from_rprime(const FedosovSolution& sol);                // (i/nu) delta (r')^{(3)}_1
TwoForm kappa_from_laplacian(const FedosovSolution& sol);             // -i Delta(R + nabla r^{(2)})
TwoForm kappa_from_curvature(const FedosovSolution& sol);             // (i/2) gamma - i d mu
JetMatrix kappa_at_base_from_c2(const FedosovSolution& sol);

struct ClassCheckReport {
  TwoForm kappa;
  bool routes_agree = false;
  bool c2_route_agrees = false;
  bool lambda_equals_dmu = false;      // Delta(nabla r^{(2)}) = d mu
  bool lemma_split_holds = false;      // delta r3_1 = -c0, delta r3_3 = R + nabla r2 - c2
  bool lemma_laplace_holds = false;    // c0 = nu Delta(c2)
  bool exactness_witness_holds = false;  // kappa - (i/2) gamma = -i d mu
  bool kappa_closed = false;
  bool gamma_closed = false;
  bool trace_R_zero = false;
};

ClassCheckReport canonical_class_check(const FedosovSolution& sol);

}  // namespace akdq

#endif
