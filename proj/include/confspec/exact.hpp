#pragma once

#include <complex>
#include <iosfwd>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace confspec {

using Rational = boost::multiprecision::cpp_rational;

/// Gaussian rational re + i*im.
struct GaussRational {
  Rational re{0};
  Rational im{0};

  GaussRational() = default;
  GaussRational(Rational r) : re(std::move(r)) {}  // NOLINT(implicit)
  GaussRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return re == 0 && im == 0; }
  GaussRational conj() const { return {re, -im}; }

  friend GaussRational operator+(const GaussRational& a, const GaussRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussRational operator-(const GaussRational& a, const GaussRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussRational operator-(const GaussRational& a) { return {-a.re, -a.im}; }
  friend GaussRational operator*(const GaussRational& a, const GaussRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  GaussRational inverse() const;
  friend bool operator==(const GaussRational& a, const GaussRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

/// Element a + b*rho of the field Q(i)(rho), where rho = sqrt(r) for a
/// positive rational r that is not a perfect square.
///
/// On a flat torus of volume V the L2-normalized sine and cosine
/// eigenfunctions carry the amplitude sqrt(2/V); taking r = 2/V keeps every
/// product, gradient pairing and integral of those functions exact.
/// A value with b == 0 does not need r, so r == 0 means "not yet bound".
class ExactScalar {
 public:
  ExactScalar() = default;
  ExactScalar(long long v) : a_(Rational(v)) {}  // NOLINT(implicit)
  ExactScalar(Rational v) : a_(std::move(v)) {}  // NOLINT(implicit)
  ExactScalar(GaussRational v) : a_(std::move(v)) {}  // NOLINT(implicit)

  static ExactScalar fraction(long long num, long long den) { return Rational(num, den); }
  static ExactScalar imaginary_unit() { return GaussRational(Rational(0), Rational(1)); }
  /// sqrt(r); folds to a rational when r is a perfect square.
  static ExactScalar sqrt_of(const Rational& r);

  const GaussRational& rational_part() const { return a_; }
  const GaussRational& rho_part() const { return b_; }
  const Rational& rho_squared() const { return r_; }

  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }
  bool is_real() const { return a_.im == 0 && b_.im == 0; }
  ExactScalar conj() const;
  ExactScalar real_part() const;
  ExactScalar imag_part() const;
  ExactScalar inverse() const;

  std::complex<double> to_complex() const;
  double to_double() const { return to_complex().real(); }
  std::string to_string() const;

  friend ExactScalar operator+(const ExactScalar& x, const ExactScalar& y);
  friend ExactScalar operator-(const ExactScalar& x, const ExactScalar& y);
  friend ExactScalar operator-(const ExactScalar& x);
  friend ExactScalar operator*(const ExactScalar& x, const ExactScalar& y);
  friend ExactScalar operator/(const ExactScalar& x, const ExactScalar& y) {
    return x * y.inverse();
  }
  ExactScalar& operator+=(const ExactScalar& y) { return *this = *this + y; }
  ExactScalar& operator-=(const ExactScalar& y) { return *this = *this - y; }
  ExactScalar& operator*=(const ExactScalar& y) { return *this = *this * y; }
  friend bool operator==(const ExactScalar& x, const ExactScalar& y) { return (x - y).is_zero(); }

 private:
  ExactScalar(GaussRational a, GaussRational b, Rational r)
      : a_(std::move(a)), b_(std::move(b)), r_(std::move(r)) {}
  static Rational merge_rho(const ExactScalar& x, const ExactScalar& y);

  GaussRational a_;
  GaussRational b_;
  Rational r_{0};
};

std::ostream& operator<<(std::ostream& os, const ExactScalar& x);

/// Best rational approximation with bounded denominator; returns false when
/// no fraction with denominator <= max_den reproduces x to within tol.
bool rationalize(double x, Rational& out, long long max_den = 1000000, double tol = 1e-14);

}  // namespace confspec
