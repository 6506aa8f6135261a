#ifndef AKDQ_WICK_HPP
#define AKDQ_WICK_HPP

#include <cstdint>

#include "akdq/geometry.hpp"

namespace akdq {

// Deg cap for the formal series machinery.  Components of Deg <= max_deg are
// exact; terms above the cap (or above the nu cap) are discarded and counted.
struct TruncationPolicy {
  int max_deg = 0;
  int max_nu = 1 << 20;
  bool parallel = true;  // OpenMP fiber products; serial path kept as reference
};

// One monomial slot of W (x) Lambda: nu^r y^alpha dx_I with I a strictly
// increasing index set stored as a bitmask (bit j-1 for dx^j).
struct WickKey {
  int nu = 0;
  MultiIndex y;
  uint32_t dx = 0;

  bool operator==(const WickKey& o) const { return nu == o.nu && dx == o.dx && y == o.y; }
  bool operator<(const WickKey& o) const {
    if (nu != o.nu) return nu < o.nu;
    if (dx != o.dx) return dx < o.dx;
    return y < o.y;
  }
};

int popcount(uint32_t m);

// Sign of dx_A /\ dx_B as a permutation of sorted(A u B); 0 when A and B meet.
int wedge_sign(uint32_t a, uint32_t b);

// Element of the formal Wick algebra with Jet coefficients.  Gradings per
// term: deg_nu = r, deg_s = |alpha|, deg_a = |I|, Deg = 2r + |alpha|.
class WickElement {
public:
  WickElement() : dim_(0), order_(0) {}
  WickElement(int dim, int order) : dim_(dim), order_(order) {}

  static WickElement scalar(const Jet& f);
  static WickElement y_monomial(int dim, int order, const MultiIndex& alpha);

  int dim() const { return dim_; }
  int order() const { return order_; }
  const std::map<WickKey, Jet>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  long long dropped() const { return dropped_; }

  // Accumulates c * nu^r y^alpha dx_I.  `dx_sequence` may be unsorted; the
  // wedge reordering sign is applied (duplicate indices give zero).
  void add_term(int nu, const MultiIndex& alpha, const std::vector<int>& dx_sequence,
                const Jet& c);
  void add_key(const WickKey& k, const Jet& c);
  void add_key_scaled(const WickKey& k, const Jet& c, const GaussianRational& s);
  void note_dropped(long long n) { dropped_ += n; }

  WickElement operator+(const WickElement& o) const;
  WickElement operator-(const WickElement& o) const;
  WickElement operator-() const;
  WickElement scaled(const GaussianRational& c) const;
  WickElement times_nu(int power) const;

  // Grading filters.
  WickElement deg_component(int deg) const;          // Deg = 2 deg_nu + deg_s
  WickElement deg_s_component(int s) const;
  WickElement nu_coefficient(int r) const;           // terms with deg_nu = r, nu stripped off
  int min_deg_a() const;
  int max_deg_a() const;
  int max_deg() const;
  // min > max happens only when every stored jet is zero, which is trivially
  // homogeneous.
  bool deg_a_homogeneous() const { return min_deg_a() >= max_deg_a(); }

  WickElement truncated(const TruncationPolicy& p) const;
  WickElement with_jet_order(int order) const;

private:
  int dim_;
  int order_;
  std::map<WickKey, Jet> terms_;
  long long dropped_ = 0;
};

bool reliably_zero(const WickElement& a);
bool reliably_equal(const WickElement& a, const WickElement& b);

// The fiberwise product twisted by the pairing P^{jk}: the Wick product for
// P = Lambda = omega^{-1} - i g^{-1}, the Weyl product for P = omega^{-1}.
WickElement fiber_product(const WickElement& a, const WickElement& b, const JetMatrix& pairing,
                          const TruncationPolicy& p);
WickElement fiber_product_serial(const WickElement& a, const WickElement& b,
                                 const JetMatrix& pairing, const TruncationPolicy& p);

// Lambda^{jk} = omega^{jk} - i g^{jk}.
JetMatrix wick_pairing(const DerivedGeometry& d);

// deg_a-graded commutator; requires both arguments deg_a-homogeneous.
WickElement graded_commutator(const WickElement& a, const WickElement& b,
                              const JetMatrix& pairing, const TruncationPolicy& p);

// Exact division by nu; errc::divisibility when a nu^0 term is present.
WickElement nu_divide(const WickElement& a);

// (i/nu)[a, b].
WickElement ad_div_nu(const WickElement& a, const WickElement& b, const JetMatrix& pairing,
                      const TruncationPolicy& p);

// Fedosov operators.
WickElement fedosov_delta(const WickElement& a);
WickElement fedosov_delta_inv(const WickElement& a);
WickElement sigma_project(const WickElement& a);  // bidegree-(0,0) part

struct HodgeParts {
  WickElement dd_inv;   // delta delta^{-1} a
  WickElement d_inv_d;  // delta^{-1} delta a
  WickElement sigma;
};
HodgeParts hodge_decompose(const WickElement& a);

// Connection extension to W (x) Lambda; consumes one order of x-jets.
WickElement extend_connection(const WickElement& a, const JetTensor& Gamma);

// T = (1/2) omega_{sa} T^a_{kl} y^s dx^k /\ dx^l  and
// R = (1/4) omega_{sa} R^a_{tkl} y^s y^t dx^k /\ dx^l.
WickElement torsion_element(const DerivedGeometry& d);
WickElement curvature_element(const DerivedGeometry& d);

// Fiberwise Laplacian (1/4) g^{jk} d^2/dy^j dy^k and G = exp(-nu Laplacian);
// direction +1 applies G, -1 applies G^{-1}.
WickElement laplacian(const WickElement& a, const JetMatrix& g_inv);
WickElement equivalence_G(const WickElement& a, const JetMatrix& g_inv, int direction,
                          const TruncationPolicy& p);

// Coefficient matrix A_{kl} of a purely scalar 2-form element (deg_s = 0,
// deg_nu = 0, deg_a = 2), as (1/2) A_{kl} dx^k /\ dx^l.
TwoForm two_form_of(const WickElement& a);

}  // namespace akdq

#endif
