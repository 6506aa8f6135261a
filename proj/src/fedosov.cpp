#include "akdq/fedosov.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace akdq {

FormalFunction FormalFunction::from_jet(const Jet& f) {
  FormalFunction r;
  r.dim = f.dim();
  if (!f.is_zero()) r.coeff.emplace(0, f);
  return r;
}

Jet FormalFunction::coefficient(int r, int dim_hint, int order_hint) const {
  auto it = coeff.find(r);
  return it == coeff.end() ? Jet(dim_hint, order_hint) : it->second;
}

FormalFunction FormalFunction::operator+(const FormalFunction& o) const {
  FormalFunction r = *this;
  for (auto& [k, f] : o.coeff) {
    auto it = r.coeff.find(k);
    if (it == r.coeff.end())
      r.coeff.emplace(k, f);
    else
      it->second = it->second + f;
  }
  return r;
}

FormalFunction FormalFunction::operator-(const FormalFunction& o) const {
  FormalFunction neg = o;
  for (auto& [k, f] : neg.coeff) f = -f;
  return *this + neg;
}

FormalFunction FormalFunction::truncated_nu(int max_r) const {
  FormalFunction r;
  r.dim = dim;
  for (auto& [k, f] : coeff)
    if (k <= max_r) r.coeff.emplace(k, f);
  return r;
}

GaussianRational FormalFunction::value_at_base(int r) const {
  auto it = coeff.find(r);
  return it == coeff.end() ? GaussianRational() : it->second.value_at_base();
}

bool reliably_equal(const FormalFunction& a, const FormalFunction& b, int through_nu) {
  for (int r = 0; r <= through_nu; ++r) {
    bool in_a = a.coeff.count(r) != 0;
    bool in_b = b.coeff.count(r) != 0;
    if (!in_a && !in_b) continue;
    if (!in_a) {
      if (!b.coeff.at(r).is_zero()) return false;
      continue;
    }
    if (!in_b) {
      if (!a.coeff.at(r).is_zero()) return false;
      continue;
    }
    if (!agree_at_reliable_order(a.coeff.at(r), b.coeff.at(r))) return false;
  }
  return true;
}

FedosovSolution::FedosovSolution(std::shared_ptr<const DerivedGeometry> geom, int max_deg)
    : geom_(std::move(geom)), max_deg_(max_deg) {
  if (max_deg_ < 2) throw error(errc::input, "max_deg must be at least 2");
  lambda_ = wick_pairing(*geom_);
  t_elt_ = torsion_element(*geom_);
  r_elt_ = curvature_element(*geom_);

  TruncationPolicy p{max_deg_ + 2};
  int dim = geom_->chart.dim;
  int order = geom_->chart.order;
  r_.assign(max_deg_ + 1, WickElement(dim, order));

  quad_.assign(std::max(max_deg_ - 2, 1), WickElement(dim, order));

  r_[2] = fedosov_delta_inv(t_elt_);
  if (max_deg_ >= 3) {
    quad_[0] = fiber_product(r_[2], r_[2], lambda_, p);
    WickElement rhs = r_elt_ + extend_connection(r_[2], geom_->Gamma) -
                      nu_divide(quad_[0]).scaled(GaussianRational::unit_i());
    r_[3] = fedosov_delta_inv(rhs);
  }
  for (int k = 1; k + 3 <= max_deg_; ++k) {
    WickElement sum(dim, order);
    for (int l = 0; l <= k; ++l)
      sum = sum + fiber_product(r_[l + 2], r_[k - l + 2], lambda_, p);
    quad_[k] = sum;
    WickElement rhs = extend_connection(r_[k + 2], geom_->Gamma) -
                      nu_divide(sum).scaled(GaussianRational::unit_i());
    r_[k + 3] = fedosov_delta_inv(rhs);
  }

  for (int k = 2; k <= max_deg_; ++k) {
    if (reliably_zero(r_[k])) continue;
    if (r_[k].min_deg_a() != 1 || r_[k].max_deg_a() != 1)
      throw error(errc::internal_consistency, "r component has deg_a != 1");
    if (!reliably_zero(fedosov_delta_inv(r_[k])))
      throw error(errc::internal_consistency, "delta^{-1} r != 0");
    for (auto& [key, c] : r_[k].terms())
      if (!c.is_zero() && 2 * key.nu + degree(key.y) != k)
        throw error(errc::internal_consistency, "r component not Deg-homogeneous");
  }

  r_primed_.assign(max_deg_ + 1, WickElement(dim, order));
  for (int k = 2; k <= max_deg_; ++k)
    r_primed_[k] = equivalence_G(r_[k], geom_->g_inv, +1, p);
}

WickElement FedosovSolution::r_total(Variant v) const {
  WickElement acc(geom_->chart.dim, geom_->chart.order);
  for (int k = 2; k <= max_deg_; ++k) acc = acc + r_component(k, v);
  return acc;
}

WickElement FedosovSolution::equation_residual(int d) const {
  if (d < 1 || d + 1 > max_deg_) throw error(errc::input, "residual degree out of range");
  int dim = geom_->chart.dim;
  WickElement rhs(dim, geom_->chart.order);
  if (d == 1) rhs = rhs + t_elt_;
  if (d == 2) rhs = rhs + r_elt_;
  if (d >= 2) rhs = rhs + extend_connection(r_[d], geom_->Gamma);
  if (d >= 2 && !quad_[d - 2].is_zero())
    rhs = rhs - nu_divide(quad_[d - 2]).scaled(GaussianRational::unit_i());
  return fedosov_delta(r_[d + 1]) - rhs;
}

namespace {

// (i/nu) [x, a] with a possibly non-homogeneous in deg_a.
WickElement ad_div_nu_any(const WickElement& x, const WickElement& a, const JetMatrix& pairing,
                          const TruncationPolicy& p) {
  WickElement acc(a.dim(), a.order());
  for (int q = 0; q <= a.dim(); ++q) {
    WickElement part(a.dim(), a.order());
    bool any = false;
    for (auto& [k, c] : a.terms())
      if (popcount(k.dx) == q) {
        part.add_key(k, c);
        any = true;
      }
    if (any) acc = acc + ad_div_nu(x, part, pairing, p);
  }
  return acc;
}

}  // namespace

WickElement FedosovSolution::apply_D(const WickElement& a, Variant v,
                                     const TruncationPolicy& p) const {
  WickElement res = -fedosov_delta(a) + extend_connection(a, geom_->Gamma);
  WickElement rt = r_total(v);
  if (!rt.is_zero()) res = res - ad_div_nu_any(rt, a, pairing(v), p);
  return res.truncated(p);
}

WickElement FedosovSolution::flatness_residual(const WickElement& a, Variant v,
                                               int* guaranteed) const {
  int d_min = 0;
  bool any = false;
  for (auto& [k, c] : a.terms())
    if (!c.is_zero()) {
      int deg = 2 * k.nu + degree(k.y);
      d_min = any ? std::min(d_min, deg) : deg;
      any = true;
    }
  int top = d_min + max_deg_ - 3;
  if (guaranteed) *guaranteed = top;
  // The adjoint part of D raises Deg and its nu-division consumes two Deg
  // levels of the underlying product, so the inner pass must be complete
  // through top+1 (cap top+3) and the outer through top (cap top+2).
  // Anything above top+1 in the intermediate element is junk for the final
  // truncation and only inflates the second pass, so cut it eagerly.
  WickElement da = apply_D(a, v, TruncationPolicy{top + 3});
  da = da.truncated(TruncationPolicy{top + 1});
  WickElement dda = apply_D(da, v, TruncationPolicy{top + 2});
  WickElement res(a.dim(), dda.order());
  for (auto& [k, c] : dda.terms())
    if (2 * k.nu + degree(k.y) <= top) res.add_key(k, c);
  return res;
}

WickElement TauExpansion::total() const {
  WickElement acc;
  for (auto& c : comp) acc = acc.dim() == 0 ? c : acc + c;
  return acc;
}

TauExpansion lift_tau(const FedosovSolution& sol, const Jet& f, Variant v, int tau_max_deg,
                      int sigma_cap) {
  if (tau_max_deg + 1 > sol.max_deg())
    throw error(errc::order, "solution depth insufficient for requested tau depth");
  TruncationPolicy p{tau_max_deg + 2};
  // The products below feed a division by nu, so leave one unit of headroom.
  if (sigma_cap >= 0) p.max_nu = sigma_cap + 1;
  auto capped = [&](WickElement e) {
    if (sigma_cap < 0) return e;
    WickElement out(e.dim(), e.order());
    for (auto& [k, c] : e.terms())
      if (k.nu + degree(k.y) <= sigma_cap) out.add_key(k, c);
    return out;
  };
  // In a product term, each contraction consumes one y from each factor and
  // adds one nu, so nu + deg_s of the term is at least nu + deg_s of either
  // factor's term.  Terms of r beyond the cap therefore cannot reach the
  // capped part of the lift and are dropped up front.
  auto r_relevant = [&](const WickElement& e) {
    if (sigma_cap < 0) return e;
    WickElement out(e.dim(), e.order());
    for (auto& [k, c] : e.terms())
      if (k.nu + degree(k.y) <= sigma_cap) out.add_key(k, c);
    return out;
  };
  std::vector<WickElement> rcomp;
  rcomp.reserve(tau_max_deg);
  for (int l = 0; l + 1 <= tau_max_deg; ++l) rcomp.push_back(r_relevant(sol.r_component(l + 2, v)));
  TauExpansion tau;
  tau.comp.reserve(tau_max_deg + 1);
  tau.comp.push_back(WickElement::scalar(f));
  for (int k = 0; k + 1 <= tau_max_deg; ++k) {
    WickElement rhs = extend_connection(tau.comp[k], sol.geom().Gamma);
    for (int l = 0; l <= k; ++l) {
      const WickElement& rl = rcomp[l];
      if (rl.is_zero() || tau.comp[k - l].is_zero()) continue;
      rhs = rhs - ad_div_nu(rl, tau.comp[k - l], sol.pairing(v), p);
    }
    tau.comp.push_back(capped(fedosov_delta_inv(rhs.truncated(p))));
  }
  return tau;
}

WickElement tau_flatness_residual(const FedosovSolution& sol, const TauExpansion& tau,
                                  Variant v) {
  // D tau components of Deg <= depth-1 are fully determined by the expansion.
  int depth = static_cast<int>(tau.comp.size()) - 1;
  int top = std::min(depth - 1, sol.max_deg() - 2);
  TruncationPolicy p{top + 2};
  WickElement da = sol.apply_D(tau.total(), v, p);
  WickElement res(da.dim(), da.order());
  for (auto& [k, c] : da.terms())
    if (2 * k.nu + degree(k.y) <= top) res.add_key(k, c);
  return res;
}

namespace {

WickElement lift_formal(const FedosovSolution& sol, const FormalFunction& f, int N, Variant v,
                        int sigma_cap = -1) {
  int tau_max = 2 * N + 1;
  WickElement acc(sol.geom().chart.dim, sol.geom().chart.order);
  for (auto& [s, js] : f.coeff) {
    if (2 * s > tau_max) continue;
    // times_nu(s) below shifts nu + deg_s by s, so the inner cap tightens.
    TauExpansion tau = lift_tau(sol, js, v, tau_max - 2 * s,
                                sigma_cap < 0 ? -1 : std::max(sigma_cap - s, 0));
    acc = acc + tau.total().times_nu(s);
  }
  return acc;
}

// Keeps only the terms of a product factor that can survive the sigma
// projection through nu^N.  Every y of a product term must be contracted
// away for sigma to keep it, each contraction pairs one y from each factor
// and contributes one power of nu, so a factor term with nu + deg_s > N can
// never reach a surviving nu^{<=N} coefficient.  Dropping the rest is exact
// and shrinks the dominant fiber product dramatically.
WickElement sigma_relevant(const WickElement& e, int N) {
  WickElement out(e.dim(), e.order());
  for (auto& [k, c] : e.terms())
    if (k.nu + degree(k.y) <= N) out.add_key(k, c);
  return out;
}

FormalFunction collect_sigma(const WickElement& e, int N) {
  FormalFunction out;
  out.dim = e.dim();
  WickElement s = sigma_project(e);
  for (auto& [k, c] : s.terms())
    if (k.nu <= N) out.coeff.emplace(k.nu, c);
  return out;
}

}  // namespace

FormalFunction star_multiply(const FedosovSolution& sol, const FormalFunction& f,
                             const FormalFunction& g, int N, Variant v) {
  TruncationPolicy p{2 * N + 2};
  p.max_nu = N;
  WickElement tf = sigma_relevant(lift_formal(sol, f, N, v, N), N);
  WickElement tg = sigma_relevant(lift_formal(sol, g, N, v, N), N);
  return collect_sigma(fiber_product(tf, tg, sol.pairing(v), p), N);
}

FormalFunction apply_B(const FedosovSolution& sol, const FormalFunction& f, int N) {
  TruncationPolicy p{2 * N + 2};
  WickElement lifted = lift_formal(sol, f, N, Variant::wick);
  return collect_sigma(equivalence_G(lifted, sol.geom().g_inv, +1, p), N);
}

Jet poisson_bracket(const DerivedGeometry& d, const Jet& f, const Jet& g) {
  int n = d.chart.dim;
  Jet acc(f.dim(), std::min(f.order(), g.order()) - 1);
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k) {
      const Jet& w = d.omega_inv.at(j - 1, k - 1);
      if (w.is_zero()) continue;
      acc = acc + w * f.derivative(j) * g.derivative(k);
    }
  return acc;
}

namespace {

void enumerate_multiindices(int dim, int max_deg, MultiIndex& cur, int pos,
                            std::vector<MultiIndex>& out) {
  if (pos == dim) {
    out.push_back(cur);
    return;
  }
  int used = degree(cur);
  for (int e = 0; e + used <= max_deg; ++e) {
    cur[pos] = e;
    enumerate_multiindices(dim, max_deg, cur, pos + 1, out);
  }
  cur[pos] = 0;
}

Jet monomial_jet(int dim, int order, const MultiIndex& a) {
  return Jet(dim, order, {{a, GaussianRational(1)}});
}

}  // namespace

StarTables extract_tables(const FedosovSolution& sol, int N, Variant v, int max_input_degree,
                          bool parallel) {
  int dim = sol.geom().chart.dim;
  int order = sol.geom().chart.order;
  std::vector<MultiIndex> monos;
  MultiIndex cur = zero_index(dim);
  enumerate_multiindices(dim, max_input_degree, cur, 0, monos);

  std::vector<WickElement> lifted(monos.size());
  for (size_t i = 0; i < monos.size(); ++i)
    lifted[i] = sigma_relevant(
        lift_formal(sol, FormalFunction::from_jet(monomial_jet(dim, order, monos[i])), N, v, N),
        N);

  StarTables tab;
  tab.N = N;
  tab.variant = v;
  TruncationPolicy p{2 * N + 2};
  p.max_nu = N;
  p.parallel = false;  // pair-level parallelism below
  size_t npairs = monos.size() * monos.size();
  std::vector<std::vector<GaussianRational>> values(npairs);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (long idx = 0; idx < static_cast<long>(npairs); ++idx) {
    size_t i = idx / monos.size(), j = idx % monos.size();
    FormalFunction prod = collect_sigma(fiber_product(lifted[i], lifted[j], sol.pairing(v), p), N);
    std::vector<GaussianRational> row(N + 1);
    for (int r = 0; r <= N; ++r) row[r] = prod.value_at_base(r);
    values[idx] = std::move(row);
  }
  for (size_t i = 0; i < monos.size(); ++i)
    for (size_t j = 0; j < monos.size(); ++j)
      tab.entries.emplace(std::make_pair(monos[i], monos[j]),
                          std::move(values[i * monos.size() + j]));
  return tab;
}

namespace {

// deg_s = 1 component of tau'(f) at a fixed nu power, as the vector of jets
// multiplying y^p.
std::vector<Jet> y_linear_coefficients(const WickElement& e, int nu_power) {
  int dim = e.dim();
  std::vector<Jet> out(dim, Jet(dim, e.order()));
  for (auto& [k, c] : e.terms()) {
    if (k.nu != nu_power || k.dx != 0 || degree(k.y) != 1) continue;
    for (int p = 0; p < dim; ++p)
      if (k.y[p] == 1) out[p] = out[p] + c;
  }
  return out;
}

Jet c2_minus_from_taus(const FedosovSolution& sol, const TauExpansion& tf,
                       const TauExpansion& tg) {
  int dim = sol.geom().chart.dim;
  WickElement f_all = tf.total();
  WickElement g_all = tg.total();
  std::vector<Jet> t0f = y_linear_coefficients(f_all, 0);
  std::vector<Jet> t1f = y_linear_coefficients(f_all, 1);
  std::vector<Jet> t0g = y_linear_coefficients(g_all, 0);
  std::vector<Jet> t1g = y_linear_coefficients(g_all, 1);
  Jet acc(dim, sol.geom().chart.order);
  for (int p = 1; p <= dim; ++p)
    for (int q = 1; q <= dim; ++q) {
      const Jet& w = sol.geom().omega_inv.at(p - 1, q - 1);
      if (w.is_zero()) continue;
      acc = acc + w * (t0f[p - 1] * t1g[q - 1] + t1f[p - 1] * t0g[q - 1]);
    }
  return acc.scaled(GaussianRational(Rational(0), Rational(1, 2)));
}

}  // namespace

GaussianRational c2_minus(const FedosovSolution& sol, const Jet& f, const Jet& g) {
  TauExpansion tf = lift_tau(sol, f, Variant::weyl, 3);
  TauExpansion tg = lift_tau(sol, g, Variant::weyl, 3);
  GaussianRational via_formula = c2_minus_from_taus(sol, tf, tg).value_at_base();

  FormalFunction ff = FormalFunction::from_jet(f);
  FormalFunction gg = FormalFunction::from_jet(g);
  GaussianRational fg2 = star_multiply(sol, ff, gg, 2, Variant::weyl).value_at_base(2);
  GaussianRational gf2 = star_multiply(sol, gg, ff, 2, Variant::weyl).value_at_base(2);
  GaussianRational via_table = (fg2 - gf2) * GaussianRational(1, 2);

  if (via_formula != via_table)
    throw error(errc::internal_consistency,
                "C2^- routes disagree: " + to_string(via_formula) + " vs " + to_string(via_table));
  return via_formula;
}

TwoForm kappa_from_rprime(const FedosovSolution& sol) {
  WickElement rp3 = sol.r_component(3, Variant::weyl).deg_s_component(1);
  WickElement k = nu_divide(fedosov_delta(rp3)).scaled(GaussianRational::unit_i());
  return two_form_of(k);
}

TwoForm kappa_from_laplacian(const FedosovSolution& sol) {
  WickElement inner =
      sol.curvature_elt() + extend_connection(sol.r_component(2), sol.geom().Gamma);
  WickElement k = laplacian(inner, sol.geom().g_inv).scaled(-GaussianRational::unit_i());
  return two_form_of(k);
}

TwoForm kappa_from_curvature(const FedosovSolution& sol) {
  GaussianRational i = GaussianRational::unit_i();
  TwoForm dmu = exterior_derivative(sol.geom().mu_form);
  return sol.geom().gamma_form.scaled(i * GaussianRational(1, 2)) - dmu.scaled(i);
}

JetMatrix kappa_at_base_from_c2(const FedosovSolution& sol) {
  int n = sol.geom().chart.dim;
  int order = sol.geom().chart.order;
  JetMatrix omega_base = JetMatrix::zero(n, n, n, 0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      omega_base.at(j, k) = Jet::constant(n, 0, sol.geom().chart.omega.at(j, k).value_at_base());

  std::vector<std::vector<GaussianRational>> c2(n, std::vector<GaussianRational>(n));
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b) {
      GaussianRational v =
          c2_minus(sol, Jet::variable(n, order, a), Jet::variable(n, order, b));
      c2[a - 1][b - 1] = v;
      c2[b - 1][a - 1] = -v;
    }
  JetMatrix kappa = JetMatrix::zero(n, n, n, 0);
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= n; ++k) {
      GaussianRational acc;
      for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b)
          acc += omega_base.at(j - 1, a - 1).value_at_base() *
                 omega_base.at(k - 1, b - 1).value_at_base() * c2[a - 1][b - 1];
      kappa.at(j - 1, k - 1) = Jet::constant(n, 0, acc * GaussianRational(2));
    }
  return kappa;
}

ClassCheckReport canonical_class_check(const FedosovSolution& sol) {
  ClassCheckReport rep;
  const DerivedGeometry& g = sol.geom();
  TruncationPolicy p{sol.max_deg() + 2};

  TwoForm ka = kappa_from_rprime(sol);
  TwoForm kb = kappa_from_laplacian(sol);
  TwoForm kc = kappa_from_curvature(sol);
  rep.kappa = ka;
  rep.routes_agree = ka.equals_reliably(kb) && ka.equals_reliably(kc);

  JetMatrix kc2 = kappa_at_base_from_c2(sol);
  rep.c2_route_agrees = true;
  for (int j = 0; j < g.chart.dim; ++j)
    for (int k = 0; k < g.chart.dim; ++k)
      if (ka.comp.at(j, k).value_at_base() != kc2.at(j, k).value_at_base())
        rep.c2_route_agrees = false;

  // lambda = Delta(nabla r^{(2)}) = d mu.
  WickElement nr2 = extend_connection(sol.r_component(2), g.Gamma);
  TwoForm lambda = two_form_of(laplacian(nr2, g.g_inv));
  TwoForm dmu = exterior_derivative(g.mu_form);
  rep.lambda_equals_dmu = lambda.equals_reliably(dmu);

  // Lemma route: split of delta r^{(3)} and the Laplace relation.
  WickElement c = nu_divide(fiber_product(sol.r_component(2), sol.r_component(2),
                                          sol.pairing(Variant::wick), p))
                      .scaled(GaussianRational::unit_i());
  WickElement c0 = c.deg_s_component(0);
  WickElement c2 = c.deg_s_component(2);
  WickElement dr3_1 = fedosov_delta(sol.r_component(3).deg_s_component(1));
  WickElement dr3_3 = fedosov_delta(sol.r_component(3).deg_s_component(3));
  rep.lemma_split_holds = reliably_equal(dr3_1, -c0) &&
                          reliably_equal(dr3_3, sol.curvature_elt() + nr2 - c2);
  rep.lemma_laplace_holds = reliably_equal(c0, laplacian(c2, g.g_inv).times_nu(1));

  // Exactness witness kappa - (i/2) gamma = -i d mu.
  GaussianRational i = GaussianRational::unit_i();
  TwoForm lhs = ka - g.gamma_form.scaled(i * GaussianRational(1, 2));
  rep.exactness_witness_holds = lhs.equals_reliably(dmu.scaled(-i));

  rep.gamma_closed = g.chart.order < 3 || exterior_derivative(g.gamma_form).is_reliably_zero();
  rep.kappa_closed = true;
  if (ka.comp.at(0, 0).order() >= 1)
    rep.kappa_closed = exterior_derivative(ka).is_reliably_zero();

  rep.trace_R_zero = true;
  for (int k = 1; k <= g.chart.dim && rep.trace_R_zero; ++k)
    for (int l = 1; l <= g.chart.dim && rep.trace_R_zero; ++l) {
      Jet tr(g.chart.dim, g.chart.order - 2);
      for (int t = 1; t <= g.chart.dim; ++t) tr = tr + g.R.at({t, t, k, l});
      if (!tr.is_zero()) rep.trace_R_zero = false;
    }
  return rep;
}

}  // namespace akdq
