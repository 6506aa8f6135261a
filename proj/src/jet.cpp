#include "akdq/jet.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace akdq {

int degree(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

MultiIndex zero_index(int dim) { return MultiIndex(dim, 0); }

Jet::Jet(int dim, int order, std::map<MultiIndex, GaussianRational> coeffs) : Jet(dim, order) {
  for (auto& [a, c] : coeffs) {
    if (static_cast<int>(a.size()) != dim)
      throw error(errc::input, "multi-index length does not match jet dimension");
    for (int e : a)
      if (e < 0) throw error(errc::input, "negative exponent in multi-index");
    if (degree(a) > order)
      throw error(errc::input, "multi-index degree " + std::to_string(degree(a)) +
                                   " exceeds jet order " + std::to_string(order));
    if (!c.is_zero()) coeffs_.emplace(a, std::move(c));
  }
}

Jet Jet::constant(int dim, int order, const GaussianRational& c) {
  Jet j(dim, order);
  if (!c.is_zero()) j.coeffs_.emplace(zero_index(dim), c);
  return j;
}

Jet Jet::variable(int dim, int order, int v) {
  if (v < 1 || v > dim) throw error(errc::input, "variable index out of range");
  if (order < 1) throw error(errc::order, "jet order too small for a variable");
  Jet j(dim, order);
  MultiIndex a = zero_index(dim);
  a[v - 1] = 1;
  j.coeffs_.emplace(std::move(a), GaussianRational(1));
  return j;
}

GaussianRational Jet::coeff(const MultiIndex& a) const {
  auto it = coeffs_.find(a);
  return it == coeffs_.end() ? GaussianRational() : it->second;
}

void Jet::insert(const MultiIndex& a, const GaussianRational& c) {
  if (c.is_zero()) return;
  auto [it, fresh] = coeffs_.emplace(a, c);
  if (!fresh) {
    it->second += c;
    if (it->second.is_zero()) coeffs_.erase(it);
  }
}

Jet Jet::truncated(int new_order) const {
  if (new_order >= order_) {
    Jet j = *this;
    return j;
  }
  Jet j(dim_, new_order);
  for (auto& [a, c] : coeffs_)
    if (degree(a) <= new_order) j.coeffs_.emplace(a, c);
  return j;
}

namespace {
void check_shapes(const Jet& a, const Jet& b) {
  if (a.dim() != b.dim())
    throw error(errc::input, "jet dimension mismatch");
}
}  // namespace

Jet Jet::operator+(const Jet& o) const {
  check_shapes(*this, o);
  Jet r(dim_, std::min(order_, o.order_));
  // Linear merge of the two sorted coefficient maps.  Degree filtering is
  // only needed on the operand whose order exceeds the result order.
  bool ta = order_ > r.order_, tb = o.order_ > r.order_;
  auto ia = coeffs_.begin(), ea = coeffs_.end();
  auto ib = o.coeffs_.begin(), eb = o.coeffs_.end();
  while (ia != ea || ib != eb) {
    if (ib == eb || (ia != ea && ia->first < ib->first)) {
      if (!ta || degree(ia->first) <= r.order_)
        r.coeffs_.emplace_hint(r.coeffs_.end(), ia->first, ia->second);
      ++ia;
    } else if (ia == ea || ib->first < ia->first) {
      if (!tb || degree(ib->first) <= r.order_)
        r.coeffs_.emplace_hint(r.coeffs_.end(), ib->first, ib->second);
      ++ib;
    } else {
      if (!ta || degree(ia->first) <= r.order_) {
        GaussianRational s = ia->second + ib->second;
        if (!s.is_zero())
          r.coeffs_.emplace_hint(r.coeffs_.end(), ia->first, std::move(s));
      }
      ++ia;
      ++ib;
    }
  }
  return r;
}

void Jet::accumulate(const Jet& o, const GaussianRational& s) {
  check_shapes(*this, o);
  if (o.order_ < order_) {
    order_ = o.order_;
    for (auto it = coeffs_.begin(); it != coeffs_.end();)
      it = degree(it->first) > order_ ? coeffs_.erase(it) : std::next(it);
  }
  if (s.is_zero()) return;
  bool unit = s.im == 0 && s.re == 1;
  for (auto& [a, c] : o.coeffs_) {
    if (degree(a) > order_) continue;
    insert(a, unit ? c : c * s);
  }
}

Jet Jet::operator-(const Jet& o) const { return *this + (-o); }

Jet Jet::operator-() const {
  Jet r(dim_, order_);
  for (auto& [a, c] : coeffs_) r.coeffs_.emplace(a, -c);
  return r;
}

Jet Jet::operator*(const Jet& o) const {
  check_shapes(*this, o);
  Jet r(dim_, std::min(order_, o.order_));
  if (coeffs_.empty() || o.coeffs_.empty()) return r;
  if (dim_ <= detail::kPackMaxDim && r.order_ <= detail::kPackMaxExp) {
    // Enumerate surviving coefficient pairs as (packed product key, operand
    // index pair), sort by key, then do all the rational arithmetic in one
    // ordered accumulation pass straight into the result map.
    size_t na = coeffs_.size(), nb = o.coeffs_.size();
    std::vector<const GaussianRational*> va, vb;
    std::vector<std::pair<uint64_t, int>> pa, pb;
    va.reserve(na); pa.reserve(na);
    vb.reserve(nb); pb.reserve(nb);
    for (auto& [a, c] : coeffs_) {
      pa.emplace_back(detail::pack_index(a), degree(a));
      va.push_back(&c);
    }
    for (auto& [b, c] : o.coeffs_) {
      pb.emplace_back(detail::pack_index(b), degree(b));
      vb.push_back(&c);
    }
    std::vector<std::pair<uint64_t, uint32_t>> prods;
    prods.reserve(na * nb);
    for (size_t i = 0; i < na; ++i) {
      if (pa[i].second > r.order_) continue;
      for (size_t j = 0; j < nb; ++j) {
        if (pa[i].second + pb[j].second > r.order_) continue;
        prods.emplace_back(pa[i].first + pb[j].first,
                           static_cast<uint32_t>(i * nb + j));
      }
    }
    std::sort(prods.begin(), prods.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (size_t s = 0; s < prods.size();) {
      uint64_t key = prods[s].first;
      GaussianRational acc;
      do {
        uint32_t ij = prods[s].second;
        acc += *va[ij / nb] * *vb[ij % nb];
        ++s;
      } while (s < prods.size() && prods[s].first == key);
      if (!acc.is_zero())
        r.coeffs_.emplace_hint(r.coeffs_.end(), detail::unpack_index(key, dim_),
                               std::move(acc));
    }
    return r;
  }
  MultiIndex sum(dim_);
  for (auto& [a, ca] : coeffs_) {
    int da = degree(a);
    if (da > r.order_) continue;
    for (auto& [b, cb] : o.coeffs_) {
      if (da + degree(b) > r.order_) continue;
      for (int k = 0; k < dim_; ++k) sum[k] = a[k] + b[k];
      r.insert(sum, ca * cb);
    }
  }
  return r;
}

Jet Jet::scaled(const GaussianRational& c) const {
  Jet r(dim_, order_);
  if (c.is_zero()) return r;
  for (auto& [a, v] : coeffs_) r.coeffs_.emplace(a, v * c);
  return r;
}

Jet Jet::derivative(int j) const {
  if (j < 1 || j > dim_) throw error(errc::input, "derivative direction out of range");
  if (order_ == 0) throw error(errc::order, "jet order exhausted by differentiation");
  Jet r(dim_, order_ - 1);
  for (auto& [a, c] : coeffs_) {
    int e = a[j - 1];
    if (e == 0) continue;
    MultiIndex b = a;
    b[j - 1] = e - 1;
    r.coeffs_.emplace(std::move(b), c * GaussianRational(Rational(e)));
  }
  return r;
}

bool Jet::operator==(const Jet& o) const {
  return dim_ == o.dim_ && order_ == o.order_ && coeffs_ == o.coeffs_;
}

std::string Jet::to_string() const {
  if (coeffs_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (auto& [a, c] : coeffs_) {
    if (!first) out << " + ";
    first = false;
    out << "(" << akdq::to_string(c) << ")";
    for (int k = 0; k < dim_; ++k)
      if (a[k] > 0) {
        out << "*x" << (k + 1);
        if (a[k] > 1) out << "^" << a[k];
      }
  }
  return out.str();
}

bool agree_at_reliable_order(const Jet& a, const Jet& b) {
  if (a.dim() != b.dim()) return false;
  int k = std::min(a.order(), b.order());
  return a.truncated(k).coeffs() == b.truncated(k).coeffs();
}

JetMatrix::JetMatrix(int rows, int cols, const Jet& fill)
    : rows_(rows), cols_(cols), entries_(static_cast<size_t>(rows) * cols, fill) {}

JetMatrix JetMatrix::identity(int n, int dim, int order) {
  JetMatrix m = zero(n, n, dim, order);
  for (int k = 0; k < n; ++k) m.at(k, k) = Jet::constant(dim, order, GaussianRational(1));
  return m;
}

JetMatrix JetMatrix::zero(int rows, int cols, int dim, int order) {
  return JetMatrix(rows, cols, Jet(dim, order));
}

JetMatrix JetMatrix::operator+(const JetMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw error(errc::input, "matrix shape mismatch");
  JetMatrix r = *this;
  for (size_t k = 0; k < entries_.size(); ++k) r.entries_[k] = entries_[k] + o.entries_[k];
  return r;
}

JetMatrix JetMatrix::operator-(const JetMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw error(errc::input, "matrix shape mismatch");
  JetMatrix r = *this;
  for (size_t k = 0; k < entries_.size(); ++k) r.entries_[k] = entries_[k] - o.entries_[k];
  return r;
}

JetMatrix JetMatrix::operator*(const JetMatrix& o) const {
  if (cols_ != o.rows_) throw error(errc::input, "matrix shape mismatch");
  JetMatrix r = zero(rows_, o.cols_, entries_[0].dim(),
                     std::min(entries_[0].order(), o.entries_[0].order()));
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < o.cols_; ++j) {
      Jet acc = r.at(i, j);
      for (int k = 0; k < cols_; ++k) acc = acc + at(i, k) * o.at(k, j);
      r.at(i, j) = acc;
    }
  return r;
}

JetMatrix JetMatrix::scaled(const GaussianRational& c) const {
  JetMatrix r = *this;
  for (auto& e : r.entries_) e = e.scaled(c);
  return r;
}

JetMatrix JetMatrix::transposed() const {
  JetMatrix r(cols_, rows_, entries_[0]);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

JetMatrix JetMatrix::truncated(int order) const {
  JetMatrix r = *this;
  for (auto& e : r.entries_) e = e.truncated(order);
  return r;
}

bool JetMatrix::equals_reliably(const JetMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) return false;
  for (size_t k = 0; k < entries_.size(); ++k)
    if (!agree_at_reliable_order(entries_[k], o.entries_[k])) return false;
  return true;
}

namespace {

// Exact inverse of a constant Gaussian-rational matrix by Gauss-Jordan.
std::vector<GaussianRational> invert_constant(std::vector<GaussianRational> m, int n) {
  std::vector<GaussianRational> inv(static_cast<size_t>(n) * n);
  for (int k = 0; k < n; ++k) inv[k * n + k] = GaussianRational(1);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (!m[r * n + col].is_zero()) {
        pivot = r;
        break;
      }
    if (pivot < 0)
      throw error(errc::degeneracy, "singular constant term in jet matrix inversion");
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(m[pivot * n + c], m[col * n + c]);
        std::swap(inv[pivot * n + c], inv[col * n + c]);
      }
    GaussianRational p = m[col * n + col];
    for (int c = 0; c < n; ++c) {
      m[col * n + c] = m[col * n + c] / p;
      inv[col * n + c] = inv[col * n + c] / p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || m[r * n + col].is_zero()) continue;
      GaussianRational f = m[r * n + col];
      for (int c = 0; c < n; ++c) {
        m[r * n + c] -= f * m[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  return inv;
}

}  // namespace

JetMatrix invert(const JetMatrix& m) {
  if (m.rows() != m.cols()) throw error(errc::input, "cannot invert a non-square matrix");
  int n = m.rows();
  int dim = m.at(0, 0).dim();
  int order = m.at(0, 0).order();

  std::vector<GaussianRational> c0(static_cast<size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) c0[r * n + c] = m.at(r, c).value_at_base();
  std::vector<GaussianRational> inv0 = invert_constant(std::move(c0), n);

  JetMatrix x = JetMatrix::zero(n, n, dim, order);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) x.at(r, c) = Jet::constant(dim, order, inv0[r * n + c]);

  // Newton: X <- X(2I - MX) doubles the valid jet order per step.
  JetMatrix id = JetMatrix::identity(n, dim, order);
  JetMatrix two_id = id.scaled(GaussianRational(2));
  int valid = 0;
  while (valid < order) {
    x = x * (two_id - m * x);
    valid = 2 * valid + 1;
  }
  // Exact residual check; the iteration count above is generous.
  JetMatrix residual = m * x - id;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (!residual.at(r, c).is_zero())
        throw error(errc::internal_consistency, "jet matrix inversion residual nonzero");
  return x;
}

JetTensor::JetTensor(int dim, int rank, const Jet& fill) : dim_(dim), rank_(rank) {
  size_t n = 1;
  for (int k = 0; k < rank; ++k) n *= dim;
  entries_.assign(n, fill);
}

size_t JetTensor::offset(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != rank_) throw error(errc::input, "tensor rank mismatch");
  size_t off = 0;
  for (int i : idx) {
    if (i < 1 || i > dim_) throw error(errc::input, "tensor index out of range");
    off = off * dim_ + (i - 1);
  }
  return off;
}

bool JetTensor::is_reliably_zero() const {
  for (auto& e : entries_)
    if (!e.is_zero()) return false;
  return true;
}

}  // namespace akdq
