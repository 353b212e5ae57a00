#include "confspec/exact.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <boost/multiprecision/integer.hpp>

#include "confspec/errors.hpp"

namespace confspec {

namespace mp = boost::multiprecision;

GaussRational GaussRational::inverse() const {
  const Rational den = re * re + im * im;
  if (den == 0) throw Error(ErrorKind::InternalConsistency, "division by exact zero");
  return {re / den, -im / den};
}

namespace {

bool integer_sqrt(const mp::cpp_int& v, mp::cpp_int& root) {
  if (v < 0) return false;
  root = mp::sqrt(v);
  return root * root == v;
}

}  // namespace

ExactScalar ExactScalar::sqrt_of(const Rational& r) {
  if (r <= 0) throw Error(ErrorKind::InvalidInput, "sqrt_of requires a positive rational");
  mp::cpp_int num_root, den_root;
  if (integer_sqrt(mp::numerator(r), num_root) && integer_sqrt(mp::denominator(r), den_root)) {
    return ExactScalar(Rational(num_root, den_root));
  }
  return ExactScalar(GaussRational{}, GaussRational(Rational(1)), r);
}

Rational ExactScalar::merge_rho(const ExactScalar& x, const ExactScalar& y) {
  if (x.r_ == 0) return y.r_;
  if (y.r_ == 0 || x.r_ == y.r_) return x.r_;
  throw Error(ErrorKind::InternalConsistency, "exact scalars over different quadratic fields");
}

ExactScalar ExactScalar::conj() const { return {a_.conj(), b_.conj(), r_}; }

ExactScalar ExactScalar::real_part() const {
  return {GaussRational(a_.re), GaussRational(b_.re), r_};
}

ExactScalar ExactScalar::imag_part() const {
  return {GaussRational(a_.im), GaussRational(b_.im), r_};
}

ExactScalar ExactScalar::inverse() const {
  if (b_.is_zero()) return {a_.inverse(), GaussRational{}, r_};
  // (a + b rho)^-1 = (a - b rho) / (a^2 - b^2 r)
  const GaussRational den = a_ * a_ - b_ * b_ * GaussRational(r_);
  const GaussRational inv = den.inverse();
  return {a_ * inv, -(b_ * inv), r_};
}

std::complex<double> ExactScalar::to_complex() const {
  const double rho = r_ == 0 ? 0.0 : std::sqrt(static_cast<double>(r_));
  return {static_cast<double>(a_.re) + rho * static_cast<double>(b_.re),
          static_cast<double>(a_.im) + rho * static_cast<double>(b_.im)};
}

std::string ExactScalar::to_string() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

ExactScalar operator+(const ExactScalar& x, const ExactScalar& y) {
  return {x.a_ + y.a_, x.b_ + y.b_, ExactScalar::merge_rho(x, y)};
}

ExactScalar operator-(const ExactScalar& x, const ExactScalar& y) {
  return {x.a_ - y.a_, x.b_ - y.b_, ExactScalar::merge_rho(x, y)};
}

ExactScalar operator-(const ExactScalar& x) { return {-x.a_, -x.b_, x.r_}; }

ExactScalar operator*(const ExactScalar& x, const ExactScalar& y) {
  const Rational r = ExactScalar::merge_rho(x, y);
  GaussRational a = x.a_ * y.a_;
  if (!x.b_.is_zero() && !y.b_.is_zero()) a = a + x.b_ * y.b_ * GaussRational(r);
  return {std::move(a), x.a_ * y.b_ + x.b_ * y.a_, r};
}

namespace {

void print_gauss(std::ostream& os, const GaussRational& g) {
  if (g.im == 0) {
    os << g.re;
  } else if (g.re == 0) {
    os << g.im << "i";
  } else {
    os << "(" << g.re << (g.im < 0 ? "-" : "+") << mp::abs(g.im) << "i)";
  }
}

}  // namespace

std::ostream& operator<<(std::ostream& os, const ExactScalar& x) {
  if (x.rho_part().is_zero()) {
    print_gauss(os, x.rational_part());
    return os;
  }
  if (!x.rational_part().is_zero()) {
    print_gauss(os, x.rational_part());
    os << " + ";
  }
  print_gauss(os, x.rho_part());
  os << "*sqrt(" << x.rho_squared() << ")";
  return os;
}

bool rationalize(double x, Rational& out, long long max_den, double tol) {
  if (!std::isfinite(x)) return false;
  const double scale_tol = tol * std::max(1.0, std::abs(x));
  // continued fraction convergents
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rem = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double fl = std::floor(rem);
    if (std::abs(fl) > 9.0e15) return false;
    const auto a = static_cast<long long>(fl);
    const long long h2 = a * h1 + h0;
    const long long k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= scale_tol) {
      out = Rational(h1, k1);
      return true;
    }
    const double frac = rem - fl;
    if (frac == 0.0) break;
    rem = 1.0 / frac;
  }
  if (k1 != 0 && std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= scale_tol) {
    out = Rational(h1, k1);
    return true;
  }
  return false;
}

}  // namespace confspec
