#include "akdq/wick.hpp"

#include <bit>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace akdq {

int popcount(uint32_t m) { return std::popcount(m); }

int wedge_sign(uint32_t a, uint32_t b) {
  if (a & b) return 0;
  // Count pairs (i in a, j in b) with i > j.
  int inversions = 0;
  for (uint32_t bb = b; bb; bb &= bb - 1) {
    int j = std::countr_zero(bb);
    inversions += popcount(a & ~((2u << j) - 1));
  }
  return inversions % 2 == 0 ? 1 : -1;
}

WickElement WickElement::scalar(const Jet& f) {
  WickElement e(f.dim(), f.order());
  e.add_key(WickKey{0, zero_index(f.dim()), 0}, f);
  return e;
}

WickElement WickElement::y_monomial(int dim, int order, const MultiIndex& alpha) {
  WickElement e(dim, order);
  e.add_key(WickKey{0, alpha, 0}, Jet::constant(dim, order, GaussianRational(1)));
  return e;
}

void WickElement::add_key(const WickKey& k, const Jet& c) {
  // Each coefficient keeps its own reliable order; merging two contributions
  // takes the minimum via Jet::operator+.  Stored-zero jets are kept: they
  // still cap the reliable order of whatever else lands on the same slot, so
  // neither they nor cancelled sums may be pruned.
  if (c.dim() == 0) return;
  auto [it, fresh] = terms_.emplace(k, c);
  if (!fresh) it->second.accumulate(c, GaussianRational(1));
}

void WickElement::add_key_scaled(const WickKey& k, const Jet& c, const GaussianRational& s) {
  // Same retention contract as add_key: a zero or zero-scaled contribution
  // still lands (or stays) in the slot so its reliable order keeps capping it.
  if (c.dim() == 0) return;
  auto it = terms_.find(k);
  if (it == terms_.end())
    terms_.emplace(k, c.scaled(s));
  else
    it->second.accumulate(c, s);
}

void WickElement::add_term(int nu, const MultiIndex& alpha, const std::vector<int>& dx_sequence,
                           const Jet& c) {
  uint32_t mask = 0;
  int sign = 1;
  for (int j : dx_sequence) {
    uint32_t bit = 1u << (j - 1);
    int s = wedge_sign(mask, bit);
    if (s == 0) return;
    sign *= s;
    mask |= bit;
  }
  add_key(WickKey{nu, alpha, mask}, sign == 1 ? c : -c);
}

WickElement WickElement::operator+(const WickElement& o) const {
  if (dim_ != o.dim_) throw error(errc::input, "wick element dimension mismatch");
  WickElement r(dim_, std::min(order_, o.order_));
  r.dropped_ = dropped_ + o.dropped_;
  for (auto& [k, c] : terms_) r.add_key(k, c);
  for (auto& [k, c] : o.terms_) r.add_key(k, c);
  return r;
}

WickElement WickElement::operator-(const WickElement& o) const { return *this + (-o); }

WickElement WickElement::operator-() const {
  WickElement r(dim_, order_);
  r.dropped_ = dropped_;
  for (auto& [k, c] : terms_) r.terms_.emplace(k, -c);
  return r;
}

WickElement WickElement::scaled(const GaussianRational& c) const {
  WickElement r(dim_, order_);
  r.dropped_ = dropped_;
  if (c.is_zero()) return r;
  for (auto& [k, v] : terms_) r.terms_.emplace(k, v.scaled(c));
  return r;
}

WickElement WickElement::times_nu(int power) const {
  WickElement r(dim_, order_);
  r.dropped_ = dropped_;
  for (auto& [k, v] : terms_) {
    WickKey nk = k;
    nk.nu += power;
    if (nk.nu < 0) throw error(errc::divisibility, "negative nu power");
    r.terms_.emplace(nk, v);
  }
  return r;
}

WickElement WickElement::deg_component(int deg) const {
  WickElement r(dim_, order_);
  for (auto& [k, v] : terms_)
    if (2 * k.nu + degree(k.y) == deg) r.terms_.emplace(k, v);
  return r;
}

WickElement WickElement::deg_s_component(int s) const {
  WickElement r(dim_, order_);
  for (auto& [k, v] : terms_)
    if (degree(k.y) == s) r.terms_.emplace(k, v);
  return r;
}

WickElement WickElement::nu_coefficient(int rr) const {
  WickElement r(dim_, order_);
  for (auto& [k, v] : terms_)
    if (k.nu == rr) {
      WickKey nk = k;
      nk.nu = 0;
      r.terms_.emplace(nk, v);
    }
  return r;
}

int WickElement::min_deg_a() const {
  int m = 32;
  for (auto& [k, v] : terms_)
    if (!v.is_zero()) m = std::min(m, popcount(k.dx));
  return m;
}

int WickElement::max_deg_a() const {
  int m = 0;
  for (auto& [k, v] : terms_)
    if (!v.is_zero()) m = std::max(m, popcount(k.dx));
  return m;
}

int WickElement::max_deg() const {
  int m = 0;
  for (auto& [k, v] : terms_)
    if (!v.is_zero()) m = std::max(m, 2 * k.nu + degree(k.y));
  return m;
}

WickElement WickElement::truncated(const TruncationPolicy& p) const {
  WickElement r(dim_, order_);
  r.dropped_ = dropped_;
  for (auto& [k, v] : terms_) {
    if (2 * k.nu + degree(k.y) > p.max_deg || k.nu > p.max_nu)
      ++r.dropped_;
    else
      r.terms_.emplace(k, v);
  }
  return r;
}

WickElement WickElement::with_jet_order(int order) const {
  WickElement r(dim_, std::min(order, order_));
  r.dropped_ = dropped_;
  for (auto& [k, v] : terms_) {
    Jet t = v.truncated(r.order_);
    if (!t.is_zero()) r.terms_.emplace(k, t);
  }
  return r;
}

bool reliably_zero(const WickElement& a) {
  for (auto& [k, v] : a.terms())
    if (!v.is_zero()) return false;
  return true;
}

bool reliably_equal(const WickElement& a, const WickElement& b) {
  // Jet subtraction truncates each coefficient to the common reliable order,
  // so the difference is empty exactly when a and b agree where both are
  // trustworthy.
  return reliably_zero(a - b);
}

namespace {

// Accumulates the pairwise product of two monomial terms into `out`.
void product_of_terms(const WickKey& ka, const Jet& ca, const WickKey& kb, const Jet& cb,
                      const JetMatrix& pairing, const TruncationPolicy& p, WickElement& out) {
  int sign = wedge_sign(ka.dx, kb.dx);
  if (sign == 0) return;
  int deg = 2 * (ka.nu + kb.nu) + degree(ka.y) + degree(kb.y);
  if (deg > p.max_deg) {
    out.note_dropped(1);
    return;
  }
  int dim = out.dim();
  uint32_t mask = ka.dx | kb.dx;
  if (dim > detail::kPackMaxDim ||
      degree(ka.y) + degree(kb.y) > detail::kPackMaxExp)
    throw error(errc::input, "fiber product supports dimension <= 12 and fiber degree <= 31");

  // States after m contractions: remaining y-exponents on each side (packed
  // into uint64 fields; caps keep exponents within field range) plus the
  // accumulated coefficient.
  std::map<std::pair<uint64_t, uint64_t>, Jet> states;
  Jet base = sign == 1 ? ca * cb : -(ca * cb);
  states.emplace(std::make_pair(detail::pack_index(ka.y), detail::pack_index(kb.y)), base);

  GaussianRational qm(1);  // (i/2)^m / m!
  int m = 0;
  while (!states.empty()) {
    int nu = ka.nu + kb.nu + m;
    if (nu > p.max_nu) {
      out.note_dropped(static_cast<long long>(states.size()));
      break;
    }
    for (auto& [ab, c] : states)
      out.add_key_scaled(WickKey{nu, detail::unpack_index(ab.first + ab.second, dim), mask},
                         c, qm);
    // Next contraction level.
    std::map<std::pair<uint64_t, uint64_t>, Jet> next;
    for (auto& [ab, c] : states) {
      for (int j = 0; j < dim; ++j) {
        int sj = detail::kPackBits * (dim - 1 - j);
        int aj = static_cast<int>((ab.first >> sj) & detail::kPackMaxExp);
        if (aj == 0) continue;
        for (int k = 0; k < dim; ++k) {
          int sk = detail::kPackBits * (dim - 1 - k);
          int bk = static_cast<int>((ab.second >> sk) & detail::kPackMaxExp);
          if (bk == 0) continue;
          const Jet& pjk = pairing.at(j, k);
          if (pjk.is_zero()) continue;
          std::pair<uint64_t, uint64_t> nab{ab.first - (uint64_t(1) << sj),
                                            ab.second - (uint64_t(1) << sk)};
          Jet t = c * pjk;
          GaussianRational f{Rational(aj) * bk};
          auto it = next.find(nab);
          if (it == next.end())
            next.emplace(nab, t.scaled(f));
          else
            it->second.accumulate(t, f);
        }
      }
    }
    states = std::move(next);
    ++m;
    qm = qm * GaussianRational(Rational(0), Rational(1, 2 * m));  // * (i/2) / m
  }
}

}  // namespace

WickElement fiber_product_serial(const WickElement& a, const WickElement& b,
                                 const JetMatrix& pairing, const TruncationPolicy& p) {
  if (a.dim() != b.dim()) throw error(errc::input, "wick element dimension mismatch");
  int order = std::min({a.order(), b.order(), pairing.at(0, 0).order()});
  WickElement out(a.dim(), order);
  out.note_dropped(a.dropped() + b.dropped());
  for (auto& [ka, ca] : a.terms())
    for (auto& [kb, cb] : b.terms()) product_of_terms(ka, ca, kb, cb, pairing, p, out);
  return out;
}

WickElement fiber_product(const WickElement& a, const WickElement& b, const JetMatrix& pairing,
                          const TruncationPolicy& p) {
#ifdef _OPENMP
  if (p.parallel && a.terms().size() > 1) {
    if (a.dim() != b.dim()) throw error(errc::input, "wick element dimension mismatch");
    int order = std::min({a.order(), b.order(), pairing.at(0, 0).order()});
    std::vector<const std::pair<const WickKey, Jet>*> rows;
    rows.reserve(a.terms().size());
    for (auto& kv : a.terms()) rows.push_back(&kv);
    WickElement out(a.dim(), order);
    out.note_dropped(a.dropped() + b.dropped());
#pragma omp parallel
    {
      WickElement local(a.dim(), order);
#pragma omp for schedule(dynamic) nowait
      for (long i = 0; i < static_cast<long>(rows.size()); ++i)
        for (auto& [kb, cb] : b.terms())
          product_of_terms(rows[i]->first, rows[i]->second, kb, cb, pairing, p, local);
#pragma omp critical
      {
        for (auto& [k, c] : local.terms()) out.add_key(k, c);
        out.note_dropped(local.dropped());
      }
    }
    return out;
  }
#endif
  return fiber_product_serial(a, b, pairing, p);
}

JetMatrix wick_pairing(const DerivedGeometry& d) {
  return d.omega_inv - d.g_inv.scaled(GaussianRational::unit_i());
}

WickElement graded_commutator(const WickElement& a, const WickElement& b,
                              const JetMatrix& pairing, const TruncationPolicy& p) {
  if (!a.deg_a_homogeneous() || !b.deg_a_homogeneous())
    throw error(errc::grading, "graded commutator requires deg_a-homogeneous arguments");
  WickElement ab = fiber_product(a, b, pairing, p);
  WickElement ba = fiber_product(b, a, pairing, p);
  bool odd_odd = !a.is_zero() && !b.is_zero() && a.min_deg_a() % 2 == 1 && b.min_deg_a() % 2 == 1;
  return odd_odd ? ab + ba : ab - ba;
}

WickElement nu_divide(const WickElement& a) {
  WickElement r(a.dim(), a.order());
  r.note_dropped(a.dropped());
  for (auto& [k, v] : a.terms()) {
    if (k.nu == 0) {
      if (!v.is_zero())
        throw error(errc::divisibility, "element has a nu^0 term; cannot divide by nu");
      continue;  // stored-zero: divisible, and the quotient slot is gone
    }
    WickKey nk = k;
    --nk.nu;
    r.add_key(nk, v);
  }
  return r;
}

WickElement ad_div_nu(const WickElement& a, const WickElement& b, const JetMatrix& pairing,
                      const TruncationPolicy& p) {
  return nu_divide(graded_commutator(a, b, pairing, p)).scaled(GaussianRational::unit_i());
}

WickElement fedosov_delta(const WickElement& a) {
  WickElement r(a.dim(), a.order());
  r.note_dropped(a.dropped());
  for (auto& [k, v] : a.terms())
    for (int j = 1; j <= a.dim(); ++j) {
      int e = k.y[j - 1];
      if (e == 0) continue;
      uint32_t bit = 1u << (j - 1);
      int s = wedge_sign(bit, k.dx);
      if (s == 0) continue;
      WickKey nk = k;
      --nk.y[j - 1];
      nk.dx |= bit;
      r.add_key(nk, v.scaled(GaussianRational(Rational(s * e))));
    }
  return r;
}

WickElement fedosov_delta_inv(const WickElement& a) {
  WickElement r(a.dim(), a.order());
  r.note_dropped(a.dropped());
  for (auto& [k, v] : a.terms()) {
    int p = degree(k.y);
    int q = popcount(k.dx);
    if (p + q == 0) continue;
    for (int j = 1; j <= a.dim(); ++j) {
      uint32_t bit = 1u << (j - 1);
      if (!(k.dx & bit)) continue;
      // Interior contraction: sign by the position of dx^j in the sorted set.
      int pos = popcount(k.dx & (bit - 1));
      int s = pos % 2 == 0 ? 1 : -1;
      WickKey nk = k;
      ++nk.y[j - 1];
      nk.dx &= ~bit;
      r.add_key(nk, v.scaled(GaussianRational(Rational(s, p + q))));
    }
  }
  return r;
}

WickElement sigma_project(const WickElement& a) {
  WickElement r(a.dim(), a.order());
  for (auto& [k, v] : a.terms())
    if (degree(k.y) == 0 && k.dx == 0) r.add_key(k, v);
  return r;
}

HodgeParts hodge_decompose(const WickElement& a) {
  return {fedosov_delta(fedosov_delta_inv(a)), fedosov_delta_inv(fedosov_delta(a)),
          sigma_project(a)};
}

WickElement extend_connection(const WickElement& a, const JetTensor& Gamma) {
  int dim = a.dim();
  int gorder = Gamma.at({1, 1, 1}).order();
  int order = std::min(a.order() - 1, gorder);
  WickElement r(dim, order);
  r.note_dropped(a.dropped());
  for (auto& [k, v] : a.terms())
    for (int j = 1; j <= dim; ++j) {
      uint32_t bit = 1u << (j - 1);
      int s = wedge_sign(bit, k.dx);
      if (s == 0) continue;
      GaussianRational sgn{Rational(s)};
      if (v.order() == 0)
        throw error(errc::order, "jet order exhausted in connection extension");
      // d/dx^j on the coefficient.
      WickKey nk = k;
      nk.dx |= bit;
      r.add_key(nk, v.derivative(j).scaled(sgn));
      // -Gamma^l_{jk} y^k d/dy^l.
      for (int l = 1; l <= dim; ++l) {
        int e = k.y[l - 1];
        if (e == 0) continue;
        for (int kk = 1; kk <= dim; ++kk) {
          const Jet& gam = Gamma.at({l, j, kk});
          if (gam.is_zero()) continue;
          WickKey mk = nk;
          --mk.y[l - 1];
          ++mk.y[kk - 1];
          r.add_key(mk, (v * gam).scaled(sgn * GaussianRational(Rational(-e))));
        }
      }
    }
  return r;
}

WickElement torsion_element(const DerivedGeometry& d) {
  int n = d.chart.dim;
  int order = d.T.at({1, 1, 1}).order();
  WickElement e(n, order);
  for (int s = 1; s <= n; ++s)
    for (int k = 1; k <= n; ++k)
      for (int l = 1; l <= n; ++l) {
        Jet c(n, order);
        for (int a = 1; a <= n; ++a) c = c + d.chart.omega.at(s - 1, a - 1) * d.T.at({a, k, l});
        MultiIndex ym = zero_index(n);
        ym[s - 1] = 1;
        e.add_term(0, ym, {k, l}, c.scaled(GaussianRational(1, 2)));
      }
  return e;
}

WickElement curvature_element(const DerivedGeometry& d) {
  int n = d.chart.dim;
  int order = d.R.at({1, 1, 1, 1}).order();
  WickElement e(n, order);
  for (int s = 1; s <= n; ++s)
    for (int t = 1; t <= n; ++t)
      for (int k = 1; k <= n; ++k)
        for (int l = 1; l <= n; ++l) {
          Jet c(n, order);
          for (int a = 1; a <= n; ++a)
            c = c + d.chart.omega.at(s - 1, a - 1) * d.R.at({a, t, k, l});
          MultiIndex ym = zero_index(n);
          ++ym[s - 1];
          ++ym[t - 1];
          e.add_term(0, ym, {k, l}, c.scaled(GaussianRational(1, 4)));
        }
  return e;
}

WickElement laplacian(const WickElement& a, const JetMatrix& g_inv) {
  int dim = a.dim();
  int order = std::min(a.order(), g_inv.at(0, 0).order());
  WickElement r(dim, order);
  for (auto& [k, v] : a.terms())
    for (int j = 1; j <= dim; ++j)
      for (int l = 1; l <= dim; ++l) {
        int factor = j == l ? k.y[j - 1] * (k.y[j - 1] - 1) : k.y[j - 1] * k.y[l - 1];
        if (factor <= 0) continue;
        const Jet& g = g_inv.at(j - 1, l - 1);
        if (g.is_zero()) continue;
        WickKey nk = k;
        --nk.y[j - 1];
        --nk.y[l - 1];
        r.add_key(nk, (v * g).scaled(GaussianRational(Rational(factor, 4))));
      }
  return r;
}

WickElement equivalence_G(const WickElement& a, const JetMatrix& g_inv, int direction,
                          const TruncationPolicy& p) {
  // exp(-dir * nu * Laplacian); terminates because each step lowers deg_s by 2.
  WickElement acc = a;
  WickElement cur = a;
  Rational m_fact = 1;
  int m = 0;
  while (!cur.is_zero()) {
    cur = laplacian(cur, g_inv);
    if (cur.is_zero()) break;
    ++m;
    m_fact *= m;
    int s = (direction > 0 ? m % 2 == 1 : false) ? -1 : 1;
    acc = acc + cur.times_nu(m).scaled(GaussianRational(Rational(s, 1) / m_fact));
  }
  return acc.truncated(p);
}

TwoForm two_form_of(const WickElement& a) {
  int n = a.dim();
  TwoForm f{JetMatrix::zero(n, n, n, a.order())};
  for (auto& [k, v] : a.terms()) {
    if (v.is_zero()) continue;
    if (k.nu != 0 || degree(k.y) != 0 || popcount(k.dx) != 2)
      throw error(errc::grading, "element is not a scalar 2-form");
    int i1 = std::countr_zero(k.dx);
    uint32_t rest = k.dx & (k.dx - 1);
    int i2 = std::countr_zero(rest);
    f.comp.at(i1, i2) = f.comp.at(i1, i2) + v;
    f.comp.at(i2, i1) = f.comp.at(i2, i1) - v;
  }
  return f;
}

}  // namespace akdq
