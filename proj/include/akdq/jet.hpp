#ifndef AKDQ_JET_HPP
#define AKDQ_JET_HPP

#include <boost/container/small_vector.hpp>
#include <cstdint>
#include <map>
#include <vector>

#include "akdq/scalar.hpp"

namespace akdq {

// Exponent vector of a monomial x^a = x1^a1 ... xn^an.  Ordered
// lexicographically so that coefficient maps iterate deterministically.
// Inline storage avoids a heap allocation per map key on charts of
// dimension up to 8.
using MultiIndex = boost::container::small_vector<int, 8>;

int degree(const MultiIndex& a);
MultiIndex zero_index(int dim);

namespace detail {

// Exponent vectors with dim <= 12 and entries <= 31 pack into a uint64 whose
// natural order matches the lexicographic order on MultiIndex.  Sums of packed
// indices never carry between fields as long as summed exponents stay <= 31,
// which the callers guarantee through their order / Deg caps.
constexpr int kPackBits = 5;
constexpr int kPackMaxDim = 12;
constexpr int kPackMaxExp = (1 << kPackBits) - 1;

inline uint64_t pack_index(const MultiIndex& a) {
  uint64_t k = 0;
  for (int e : a) k = (k << kPackBits) | static_cast<uint64_t>(e);
  return k;
}

inline MultiIndex unpack_index(uint64_t k, int dim) {
  MultiIndex a(dim);
  for (int i = dim - 1; i >= 0; --i) {
    a[i] = static_cast<int>(k & kPackMaxExp);
    k >>= kPackBits;
  }
  return a;
}

}  // namespace detail

// Truncated Taylor expansion at the chart base point (the origin).
//
// `order` is the *reliable* order: coefficients with |a| > order are never
// stored, and operations that consume top-degree information (differentiation)
// return a Jet of lower order.  Binary operations take the minimum order of
// their operands.  Coefficients are exact; zero coefficients are dropped.
class Jet {
public:
  Jet() : dim_(0), order_(0) {}
  Jet(int dim, int order) : dim_(dim), order_(order) {
    if (dim <= 0) throw error(errc::input, "jet dimension must be positive");
    if (order < 0) throw error(errc::order, "jet order exhausted");
  }
  Jet(int dim, int order, std::map<MultiIndex, GaussianRational> coeffs);

  static Jet constant(int dim, int order, const GaussianRational& c);
  static Jet variable(int dim, int order, int j);  // x_j, 1-based

  int dim() const { return dim_; }
  int order() const { return order_; }
  const std::map<MultiIndex, GaussianRational>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }

  GaussianRational coeff(const MultiIndex& a) const;
  GaussianRational value_at_base() const { return coeff(zero_index(dim_)); }

  Jet truncated(int new_order) const;

  Jet operator+(const Jet& o) const;
  Jet operator-(const Jet& o) const;
  Jet operator-() const;
  Jet operator*(const Jet& o) const;
  Jet scaled(const GaussianRational& c) const;

  // In-place *this += o * s with the same order bookkeeping as operator+:
  // the reliable order drops to min(order(), o.order()) even when o stores
  // no coefficients.
  void accumulate(const Jet& o, const GaussianRational& s);

  // Formal partial derivative d/dx_j (1-based).  Result order is order()-1.
  Jet derivative(int j) const;

  // Equality of stored data (same dim, order and coefficients).
  bool operator==(const Jet& o) const;
  bool operator!=(const Jet& o) const { return !(*this == o); }

  std::string to_string() const;

private:
  void insert(const MultiIndex& a, const GaussianRational& c);
  int dim_;
  int order_;
  std::map<MultiIndex, GaussianRational> coeffs_;
};

// True when a and b agree on every coefficient of total degree <= the smaller
// of the two reliable orders.  This is the comparison used by all identity
// checks: data beyond the reliable order is not trusted.
bool agree_at_reliable_order(const Jet& a, const Jet& b);

// Dense matrix of Jets sharing dim and order.
class JetMatrix {
public:
  JetMatrix() : rows_(0), cols_(0) {}
  JetMatrix(int rows, int cols, const Jet& fill);
  static JetMatrix identity(int n, int dim, int order);
  static JetMatrix zero(int rows, int cols, int dim, int order);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Jet& at(int r, int c) { return entries_[r * cols_ + c]; }
  const Jet& at(int r, int c) const { return entries_[r * cols_ + c]; }

  JetMatrix operator+(const JetMatrix& o) const;
  JetMatrix operator-(const JetMatrix& o) const;
  JetMatrix operator*(const JetMatrix& o) const;
  JetMatrix scaled(const GaussianRational& c) const;
  JetMatrix transposed() const;
  JetMatrix truncated(int order) const;

  bool equals_reliably(const JetMatrix& o) const;

private:
  int rows_, cols_;
  std::vector<Jet> entries_;
};

// Inverse by exact Gaussian elimination of the constant term followed by
// Newton iteration on the jet tail.  Throws errc::degeneracy when the
// constant term is singular.
JetMatrix invert(const JetMatrix& m);

// Dense rank-r tensor with every index running over 1..dim.  Indices are
// 1-based to match the tensor formulas they implement.
class JetTensor {
public:
  JetTensor() : dim_(0), rank_(0) {}
  JetTensor(int dim, int rank, const Jet& fill);

  int dim() const { return dim_; }
  int rank() const { return rank_; }

  Jet& at(std::initializer_list<int> idx) { return entries_[offset(idx)]; }
  const Jet& at(std::initializer_list<int> idx) const { return entries_[offset(idx)]; }

  bool is_reliably_zero() const;

private:
  size_t offset(std::initializer_list<int> idx) const;
  int dim_, rank_;
  std::vector<Jet> entries_;
};

}  // namespace akdq

#endif
