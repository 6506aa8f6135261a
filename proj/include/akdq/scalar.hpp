#ifndef AKDQ_SCALAR_HPP
#define AKDQ_SCALAR_HPP

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <utility>

namespace akdq {

using Integer = mpz_class;

// GMP-backed exact rational.  mpq_class leaves two-argument construction
// uncanonicalized; this wrapper canonicalizes so that Rational(2, 4) == 1/2
// and denominators stay positive, which the rest of the code relies on.
class Rational : public mpq_class {
public:
  Rational() = default;
  Rational(const mpq_class& q) : mpq_class(q) {}
  Rational(mpq_class&& q) : mpq_class(std::move(q)) {}
  template <class T, class U>
  Rational(const __gmp_expr<T, U>& e) : mpq_class(e) {}
  Rational(int n) : mpq_class(n) {}
  Rational(long n) : mpq_class(n) {}
  Rational(long n, long d) : mpq_class(n, d) { canonicalize(); }
  Rational(const Integer& n, const Integer& d) : mpq_class(n, d) { canonicalize(); }
};

inline const mpz_class& numerator(const Rational& q) { return q.get_num(); }
inline const mpz_class& denominator(const Rational& q) { return q.get_den(); }

// Error taxonomy shared by all modules.  The CLI maps kinds to exit codes.
enum class errc {
  input,                // malformed input, bad shapes, parse errors
  degeneracy,           // singular constant term (degenerate omega or g)
  order,                // jet order exhausted
  grading,              // non-homogeneous element where homogeneity is required
  divisibility,         // division by nu of a term with nu-power 0
  invalid_geometry,     // a chart identity failed
  internal_consistency  // two routes disagree, or a postcondition failed
};

class error : public std::runtime_error {
public:
  error(errc kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  errc kind() const { return kind_; }

private:
  errc kind_;
};

// Exact complex scalar over Q[i].
struct GaussianRational {
  Rational re;
  Rational im;

  GaussianRational() = default;
  GaussianRational(Rational r) : re(std::move(r)) {}
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  GaussianRational(long r) : re(r) {}
  GaussianRational(long n, long d) : re(Rational(n, d)) {}

  static GaussianRational unit_i() { return GaussianRational(Rational(0), Rational(1)); }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  GaussianRational conj() const { return {re, -im}; }

  GaussianRational operator-() const { return {-re, -im}; }
  GaussianRational operator+(const GaussianRational& o) const { return {re + o.re, im + o.im}; }
  GaussianRational operator-(const GaussianRational& o) const { return {re - o.re, im - o.im}; }
  GaussianRational operator*(const GaussianRational& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  GaussianRational operator/(const GaussianRational& o) const {
    Rational n = o.re * o.re + o.im * o.im;
    if (n == 0) throw error(errc::degeneracy, "division by zero Gaussian rational");
    return {(re * o.re + im * o.im) / n, (im * o.re - re * o.im) / n};
  }
  GaussianRational& operator+=(const GaussianRational& o) { re += o.re; im += o.im; return *this; }
  GaussianRational& operator-=(const GaussianRational& o) { re -= o.re; im -= o.im; return *this; }
  GaussianRational& operator*=(const GaussianRational& o) { *this = *this * o; return *this; }

  bool operator==(const GaussianRational& o) const { return re == o.re && im == o.im; }
  bool operator!=(const GaussianRational& o) const { return !(*this == o); }
};

// Canonical rendering: "p/q" (q omitted when 1), imaginary part appended as
// "+r/s*i" / "-r/s*i"; pure imaginary values render without a real part.
std::string to_string(const Rational& q);
std::string to_string(const GaussianRational& z);

// Inverse of to_string; accepts exactly the canonical forms plus an optional
// leading sign.  Throws errc::input on anything else.
Rational rational_from_string(const std::string& s);
GaussianRational gaussian_from_string(const std::string& s);

}  // namespace akdq

#endif
