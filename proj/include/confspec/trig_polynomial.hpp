#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <numbers>
#include <vector>

#include "confspec/errors.hpp"
#include "confspec/exact.hpp"
#include "confspec/lattice.hpp"

namespace confspec {

using Complex = std::complex<double>;

/// Scalar-dependent arithmetic for the function algebra.
///
/// Float mode (std::complex<double>) measures eigenvalues in absolute units;
/// exact mode (ExactScalar) measures them in units of 4 pi^2 so that every
/// quantity stays in Q(i)(sqrt(2/Vol)). The variation formulas are homogeneous
/// of degree one in the eigenvalue unit, so both modes evaluate the same
/// expressions.
template <class S>
struct Arith;

template <>
struct Arith<Complex> {
  static constexpr bool exact = false;
  /// Value of one eigenvalue unit in absolute terms.
  static constexpr double unit_value = 1.0;

  static Complex spectral_unit() { return 4.0 * std::numbers::pi * std::numbers::pi; }
  static Complex from_ratio(long long num, long long den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static Complex imaginary_unit() { return {0.0, 1.0}; }
  static Complex normsq(const Lattice& lattice, const Freq& c) { return lattice.normsq(c); }
  static Complex dot(const Lattice& lattice, const Freq& a, const Freq& b) {
    return lattice.dot(a, b);
  }
  static Complex volume(const Lattice& lattice) { return lattice.volume(); }
  /// sqrt(2 / Vol): amplitude of an L2-normalized sine or cosine wave.
  static Complex wave_amplitude(const Lattice& lattice) { return std::sqrt(2.0 / lattice.volume()); }
  static bool negligible(const Complex& s) { return std::abs(s) < 1e-15; }
  static bool same_shell(const Complex& q1, const Complex& q2) {
    return confspec::same_shell(q1.real(), q2.real());
  }
  static Complex conj(const Complex& s) { return std::conj(s); }
  static Complex real_part(const Complex& s) { return s.real(); }
  static Complex imag_part(const Complex& s) { return s.imag(); }
  static Complex to_complex(const Complex& s) { return s; }
  static double to_double(const Complex& s) { return s.real(); }
  static double magnitude(const Complex& s) { return std::abs(s); }
};

template <>
struct Arith<ExactScalar> {
  static constexpr bool exact = true;
  static constexpr double unit_value = 4.0 * std::numbers::pi * std::numbers::pi;

  static ExactScalar spectral_unit() { return ExactScalar(1); }
  static ExactScalar from_ratio(long long num, long long den) {
    return ExactScalar::fraction(num, den);
  }
  static ExactScalar imaginary_unit() { return ExactScalar::imaginary_unit(); }
  static const RationalLatticeData& data(const Lattice& lattice) {
    if (const auto* d = lattice.exact()) return *d;
    throw Error(ErrorKind::ExactUnavailable, "exact mode needs a rational lattice basis");
  }
  static ExactScalar dot(const Lattice& lattice, const Freq& a, const Freq& b) {
    const auto& g = data(lattice).dual_gram;
    const int n = lattice.dimension();
    Rational s = 0;
    for (int i = 0; i < n; ++i) {
      if (a[static_cast<std::size_t>(i)] == 0) continue;
      for (int j = 0; j < n; ++j) {
        if (b[static_cast<std::size_t>(j)] == 0) continue;
        s += g[static_cast<std::size_t>(i * n + j)] * a[static_cast<std::size_t>(i)] *
             b[static_cast<std::size_t>(j)];
      }
    }
    return ExactScalar(s);
  }
  static ExactScalar normsq(const Lattice& lattice, const Freq& c) { return dot(lattice, c, c); }
  static ExactScalar volume(const Lattice& lattice) { return ExactScalar(data(lattice).volume); }
  static ExactScalar wave_amplitude(const Lattice& lattice) {
    return ExactScalar::sqrt_of(Rational(2) / data(lattice).volume);
  }
  static bool negligible(const ExactScalar& s) { return s.is_zero(); }
  static bool same_shell(const ExactScalar& q1, const ExactScalar& q2) { return q1 == q2; }
  static ExactScalar conj(const ExactScalar& s) { return s.conj(); }
  static ExactScalar real_part(const ExactScalar& s) { return s.real_part(); }
  static ExactScalar imag_part(const ExactScalar& s) { return s.imag_part(); }
  static Complex to_complex(const ExactScalar& s) { return s.to_complex(); }
  static double to_double(const ExactScalar& s) { return s.to_double(); }
  static double magnitude(const ExactScalar& s) { return std::abs(s.to_complex()); }
};

/// Real trigonometric polynomial on the torus R^n / Gamma: a finite sum of
/// plane waves e_c(x) = exp(2 pi i w_c . x) with Hermitian coefficients.
template <class S>
class TrigPolynomial {
 public:
  using Scalar = S;
  using A = Arith<S>;
  using Terms = std::map<Freq, S>;

  TrigPolynomial() = default;
  explicit TrigPolynomial(std::shared_ptr<const Lattice> lattice) : lattice_(std::move(lattice)) {}

  static TrigPolynomial constant(std::shared_ptr<const Lattice> lattice, const S& value) {
    TrigPolynomial p(std::move(lattice));
    p.add_term(kZeroFreq, value);
    return p;
  }
  /// amplitude * cos(2 pi w_c . x)
  static TrigPolynomial cos_wave(std::shared_ptr<const Lattice> lattice, const Freq& c,
                                 const S& amplitude) {
    TrigPolynomial p(std::move(lattice));
    const S half = amplitude * A::from_ratio(1, 2);
    p.add_term(c, half);
    p.add_term(-c, half);
    return p;
  }
  /// amplitude * sin(2 pi w_c . x)
  static TrigPolynomial sin_wave(std::shared_ptr<const Lattice> lattice, const Freq& c,
                                 const S& amplitude) {
    TrigPolynomial p(std::move(lattice));
    // sin = (e_c - e_{-c}) / 2i
    const S coeff = amplitude * A::from_ratio(-1, 2) * A::imaginary_unit();
    p.add_term(c, coeff);
    p.add_term(-c, S(0) - coeff);
    return p;
  }
  /// Builds from explicit coefficients and checks Hermitian symmetry.
  static TrigPolynomial from_terms(std::shared_ptr<const Lattice> lattice, const Terms& terms) {
    TrigPolynomial p(std::move(lattice));
    for (const auto& [c, v] : terms) p.add_term(c, v);
    p.require_hermitian();
    return p;
  }

  const std::shared_ptr<const Lattice>& lattice_ptr() const { return lattice_; }
  const Lattice& lattice() const { return *lattice_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  S coefficient(const Freq& c) const {
    auto it = terms_.find(c);
    return it == terms_.end() ? S(0) : it->second;
  }

  /// Adds value to the coefficient of e_c, pruning negligible results.
  void add_term(const Freq& c, const S& value) {
    if (A::negligible(value)) return;
    auto [it, inserted] = terms_.try_emplace(c, value);
    if (!inserted) {
      it->second += value;
      if (A::negligible(it->second)) terms_.erase(it);
    }
  }

  /// Largest |coeff(-c) - conj(coeff(c))|.
  double hermitian_defect() const {
    double worst = 0.0;
    for (const auto& [c, v] : terms_) {
      worst = std::max(worst, A::magnitude(coefficient(-c) - A::conj(v)));
    }
    return worst;
  }

  void require_hermitian() const {
    const double defect = hermitian_defect();
    if constexpr (A::exact) {
      for (const auto& [c, v] : terms_) {
        if (!(coefficient(-c) == A::conj(v))) {
          throw Error(ErrorKind::InvalidInput, "trig polynomial is not real-valued");
        }
      }
    } else if (defect > 1e-12) {
      throw Error(ErrorKind::InvalidInput,
                  "trig polynomial is not real-valued (Hermitian defect " + std::to_string(defect) + ")");
    }
  }

  TrigPolynomial& operator+=(const TrigPolynomial& other) {
    check_same_lattice(other);
    if (!lattice_) lattice_ = other.lattice_;
    for (const auto& [c, v] : other.terms_) add_term(c, v);
    return *this;
  }
  TrigPolynomial& operator-=(const TrigPolynomial& other) {
    check_same_lattice(other);
    if (!lattice_) lattice_ = other.lattice_;
    for (const auto& [c, v] : other.terms_) add_term(c, S(0) - v);
    return *this;
  }
  TrigPolynomial& operator*=(const S& s) {
    Terms scaled;
    for (const auto& [c, v] : terms_) {
      S product = v * s;
      if (!A::negligible(product)) scaled.emplace(c, std::move(product));
    }
    terms_ = std::move(scaled);
    return *this;
  }
  friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) { return a += b; }
  friend TrigPolynomial operator-(TrigPolynomial a, const TrigPolynomial& b) { return a -= b; }
  friend TrigPolynomial operator*(TrigPolynomial a, const S& s) { return a *= s; }
  friend TrigPolynomial operator*(const S& s, TrigPolynomial a) { return a *= s; }

  void check_same_lattice(const TrigPolynomial& other) const {
    if (!lattice_ || !other.lattice_ || lattice_ == other.lattice_) return;
    if (!(*lattice_ == *other.lattice_)) {
      throw Error(ErrorKind::LatticeMismatch, "trig polynomials live on different lattices");
    }
  }

  /// Value at the point with lattice coordinates s (x = A s).
  Complex evaluate_lattice_coords(const std::vector<double>& s) const {
    Complex total = 0.0;
    for (const auto& [c, v] : terms_) {
      double phase = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) phase += c[j] * s[j];
      total += A::to_complex(v) * std::polar(1.0, 2.0 * std::numbers::pi * phase);
    }
    return total;
  }

  /// Coefficients as doubles, for float-mode consumers.
  TrigPolynomial<Complex> to_float() const {
    TrigPolynomial<Complex> out(lattice_);
    for (const auto& [c, v] : terms_) out.add_term(c, A::to_complex(v));
    return out;
  }

 private:
  std::shared_ptr<const Lattice> lattice_;
  Terms terms_;
};

/// Coefficient convolution: (fh)(c) = sum_{a+b=c} f(a) h(b).
template <class S>
TrigPolynomial<S> multiply(const TrigPolynomial<S>& f, const TrigPolynomial<S>& h) {
  f.check_same_lattice(h);
  TrigPolynomial<S> out(f.lattice_ptr() ? f.lattice_ptr() : h.lattice_ptr());
  for (const auto& [a, fa] : f.terms()) {
    for (const auto& [b, hb] : h.terms()) out.add_term(a + b, fa * hb);
  }
  return out;
}

/// g(grad f, grad h) as a trig polynomial.
template <class S>
TrigPolynomial<S> gradient_pairing(const TrigPolynomial<S>& f, const TrigPolynomial<S>& h) {
  using A = Arith<S>;
  f.check_same_lattice(h);
  TrigPolynomial<S> out(f.lattice_ptr() ? f.lattice_ptr() : h.lattice_ptr());
  if (f.is_zero() || h.is_zero()) return out;
  const Lattice& lat = out.lattice();
  const S minus_unit = S(0) - A::spectral_unit();
  for (const auto& [a, fa] : f.terms()) {
    if (a == kZeroFreq) continue;
    for (const auto& [b, hb] : h.terms()) {
      if (b == kZeroFreq) continue;
      out.add_term(a + b, fa * hb * minus_unit * A::dot(lat, a, b));
    }
  }
  return out;
}

/// Positive Laplacian: e_c -> 4 pi^2 |w_c|^2 e_c (in the mode's eigenvalue unit).
template <class S>
TrigPolynomial<S> laplacian(const TrigPolynomial<S>& f) {
  using A = Arith<S>;
  TrigPolynomial<S> out(f.lattice_ptr());
  for (const auto& [c, v] : f.terms()) {
    if (c == kZeroFreq) continue;
    out.add_term(c, v * A::spectral_unit() * A::normsq(f.lattice(), c));
  }
  return out;
}

template <class S>
S integrate_exact(const TrigPolynomial<S>& f) {
  if (f.is_zero()) return S(0);
  return Arith<S>::real_part(f.coefficient(kZeroFreq)) * Arith<S>::volume(f.lattice());
}

template <class S>
double integrate(const TrigPolynomial<S>& f) {
  return Arith<S>::to_double(integrate_exact(f));
}

template <class S>
S l2_inner_exact(const TrigPolynomial<S>& f, const TrigPolynomial<S>& h) {
  f.check_same_lattice(h);
  if (f.is_zero() || h.is_zero()) return S(0);
  // only the zero mode of the product survives
  S total(0);
  for (const auto& [a, fa] : f.terms()) total += fa * h.coefficient(-a);
  return Arith<S>::real_part(total) * Arith<S>::volume(f.is_zero() ? h.lattice() : f.lattice());
}

template <class S>
double l2_inner(const TrigPolynomial<S>& f, const TrigPolynomial<S>& h) {
  return Arith<S>::to_double(l2_inner_exact(f, h));
}

/// Restriction to the frequencies whose |w|^2 lies in the shell q.
template <class S>
TrigPolynomial<S> project_shell(const TrigPolynomial<S>& f, const S& q) {
  using A = Arith<S>;
  TrigPolynomial<S> out(f.lattice_ptr());
  for (const auto& [c, v] : f.terms()) {
    const bool keep = (c == kZeroFreq) ? A::negligible(q) : A::same_shell(A::normsq(f.lattice(), c), q);
    if (keep) out.add_term(c, v);
  }
  return out;
}

/// L2-orthogonal projection onto the eigenspace of a flat spectrum level.
template <class S>
TrigPolynomial<S> project(const TrigPolynomial<S>& f, const SpectrumLevel& level) {
  if constexpr (Arith<S>::exact) {
    if (level.index == 0) return project_shell(f, S(0));
    // exact q of a level comes from its representative
    return project_shell(f, Arith<S>::normsq(f.lattice(), level.frequency_pairs.front().coords));
  } else {
    return project_shell(f, S(level.index == 0 ? 0.0 : level.q));
  }
}

/// Distinct |w|^2 shells met by the support of f, ascending.
template <class S>
std::vector<S> support_shells(const TrigPolynomial<S>& f) {
  using A = Arith<S>;
  std::vector<S> shells;
  for (const auto& [c, v] : f.terms()) {
    const S q = (c == kZeroFreq) ? S(0) : A::normsq(f.lattice(), c);
    bool found = false;
    for (const auto& s : shells) {
      if (A::same_shell(s, q) || (A::negligible(s) && A::negligible(q))) {
        found = true;
        break;
      }
    }
    if (!found) shells.push_back(q);
  }
  std::sort(shells.begin(), shells.end(),
            [](const S& x, const S& y) { return A::to_double(x) < A::to_double(y); });
  return shells;
}

/// Largest coefficient magnitude of f - h.
template <class S>
double max_coefficient_gap(const TrigPolynomial<S>& f, const TrigPolynomial<S>& h) {
  const TrigPolynomial<S> d = f - h;
  double worst = 0.0;
  for (const auto& [c, v] : d.terms()) worst = std::max(worst, Arith<S>::magnitude(v));
  return worst;
}

extern template class TrigPolynomial<Complex>;
extern template class TrigPolynomial<ExactScalar>;

}  // namespace confspec
