#include "confspec/casework.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "confspec/errors.hpp"

namespace confspec {

namespace {

using X = ExactScalar;
using AX = Arith<ExactScalar>;
using Poly = TrigPolynomial<ExactScalar>;

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

DualVector require_unique(const Lattice& lattice) {
  auto w = unique_shortest(lattice);
  if (!w) {
    throw Error(ErrorKind::Inapplicable,
                "first eigenspace is not spanned by a single sine/cosine pair (shortest dual vector not unique)");
  }
  return *w;
}

Rational rational_of(const X& x) { return x.rational_part().re; }

}  // namespace

template <class S>
std::pair<TrigPolynomial<S>, TrigPolynomial<S>> build_first_eigenbasis(std::shared_ptr<const Lattice> lattice) {
  const DualVector w = require_unique(*lattice);
  const S rho = Arith<S>::wave_amplitude(*lattice);
  return {TrigPolynomial<S>::sin_wave(lattice, w.coords, rho), TrigPolynomial<S>::cos_wave(lattice, w.coords, rho)};
}

template std::pair<TrigPolynomial<Complex>, TrigPolynomial<Complex>> build_first_eigenbasis<Complex>(
    std::shared_ptr<const Lattice>);
template std::pair<TrigPolynomial<ExactScalar>, TrigPolynomial<ExactScalar>> build_first_eigenbasis<ExactScalar>(
    std::shared_ptr<const Lattice>);

std::vector<IdentityReplay> replay_identities(std::shared_ptr<const Lattice> lattice, const ReplayOptions& options) {
  const DualVector w = require_unique(*lattice);
  const Freq& c = w.coords;
  const auto [u1, u2] = build_first_eigenbasis<ExactScalar>(lattice);
  const X rho = AX::wave_amplitude(*lattice);
  const X inv_vol = AX::volume(*lattice).inverse();
  const X lam = AX::spectral_unit() * AX::normsq(*lattice, c);
  const X half = X::fraction(1, 2);

  const Poly sin2 = Poly::sin_wave(lattice, scaled(c, 2), X(1));
  const Poly cos2 = Poly::cos_wave(lattice, scaled(c, 2), X(1));
  const Poly sin3 = Poly::sin_wave(lattice, scaled(c, 3), X(1));
  const Poly cos3 = Poly::cos_wave(lattice, scaled(c, 3), X(1));

  std::vector<IdentityReplay> out;
  auto add = [&](std::string name, Poly lhs, Poly rhs) {
    if (static_cast<int>(out.size()) == options.perturb_identity) rhs.add_term(scaled(c, 3), X(options.perturbation));
    IdentityReplay r{std::move(name), std::move(lhs), std::move(rhs), 0.0, false};
    r.gap = max_coefficient_gap(r.lhs, r.rhs);
    r.exact_match = (r.lhs - r.rhs).is_zero();
    out.push_back(std::move(r));
  };

  add("u1^3", multiply(multiply(u1, u1), u1),
      u1 * (X::fraction(3, 2) * inv_vol) - sin3 * (rho * half * inv_vol));
  add("u1 cos(4 pi w.x)", multiply(u1, cos2), u1 * (X(0) - half) + sin3 * (rho * half));
  add("g(grad u1, grad cos(4 pi w.x))", gradient_pairing(u1, cos2), u1 * (X(0) - lam) - sin3 * (lam * rho));
  add("u1^2 u2", multiply(multiply(u1, u1), u2), u2 * (half * inv_vol) - cos3 * (rho * half * inv_vol));
  add("u1 sin(4 pi w.x)", multiply(u1, sin2), u2 * half - cos3 * (rho * half));
  add("g(grad u1, grad sin(4 pi w.x))", gradient_pairing(u1, sin2), u2 * lam + cos3 * (lam * rho));

  if (options.throw_on_mismatch) {
    for (const auto& r : out) {
      if (!r.exact_match) {
        std::ostringstream msg;
        msg << "identity '" << r.name << "' has coefficient gap " << r.gap;
        throw Error(ErrorKind::IdentityMismatch, msg.str());
      }
    }
  }
  return out;
}

std::pair<Poly, Poly> s_closed_forms(std::shared_ptr<const Lattice> lattice) {
  const DualVector w = require_unique(*lattice);
  const auto [u1, u2] = build_first_eigenbasis<ExactScalar>(lattice);
  const long long a = lattice->dimension() - 2;
  const X rho = AX::wave_amplitude(*lattice);
  const X lam = AX::spectral_unit() * AX::normsq(*lattice, w.coords);
  const X base = lam * (X(6) * AX::volume(*lattice)).inverse();
  const X shared = base * rho * X(5 - 3 * a + a * a);
  const Poly s1 = u1 * (base * X(1 + 5 * a + a * a)) + Poly::sin_wave(lattice, scaled(w.coords, 3), shared);
  const Poly s2 = u2 * (base * X(-5 - a + a * a)) + Poly::cos_wave(lattice, scaled(w.coords, 3), shared);
  return {s1, s2};
}

const char* to_string(Verdict v) {
  return v == Verdict::NotMaximal ? "NotMaximal" : "Inapplicable";
}

CaseworkReport casework_report(std::shared_ptr<const Lattice> lattice) {
  CaseworkReport r;
  r.lattice = lattice;
  r.n = lattice->dimension();
  r.det_a = lattice->volume();
  const auto shortest = classify_shortest(*lattice);
  r.shortest = shortest.status;
  r.lambda1 = kFourPiSq * shortest.w.normsq;
  if (shortest.status != ShortestStatus::Unique) return r;

  r.w = shortest.w;
  r.verdict = Verdict::NotMaximal;
  const double n = r.n;
  const double scale = r.lambda1 / (6.0 * r.det_a);
  r.t_eigen_u1 = scale * (n * n + n - 5.0);
  r.t_eigen_u2 = scale * (n * n - 5.0 * n + 1.0);
  r.mu = std::min(r.t_eigen_u1, r.t_eigen_u2);
  r.alpha = (n - 1.0) * (n - 1.0) * r.lambda1 / 6.0 * std::pow(r.det_a, (2.0 - n) / n);

  if (const auto* exact = lattice->exact()) {
    const long long k = r.n;
    const Rational q = rational_of(AX::normsq(*lattice, shortest.w.coords));
    const Rational base = q / (6 * exact->volume);
    r.t_eigen_u1_exact = base * (k * k + k - 5);
    r.t_eigen_u2_exact = base * (k * k - 5 * k + 1);
    const Rational mu = std::min(*r.t_eigen_u1_exact, *r.t_eigen_u2_exact);
    // phi = u1 is L2-normalized
    r.alpha_bracket_exact = mu * exact->volume + Rational(k) * q / 2;
    r.identities = replay_identities(lattice);
  }
  return r;
}

std::string render_text(const CaseworkReport& r) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "torus dimension n = " << r.n << ", |det A| = " << r.det_a << "\n";
  os << "shortest dual vector: " << to_string(r.shortest) << "\n";
  if (r.verdict == Verdict::Inapplicable) {
    os << "lambda_1 = " << r.lambda1 << " has multiplicity > 2; phi = u1 construction does not apply\n";
    os << "verdict: " << to_string(r.verdict) << "\n";
    return os.str();
  }
  os << "w coords = (";
  for (int j = 0; j < r.n; ++j) os << (j ? "," : "") << r.w->coords[static_cast<std::size_t>(j)];
  os << "), |w|^2 = " << r.w->normsq << ", lambda_1 = " << r.lambda1 << "\n";
  os << "u1 = sqrt(2/|det A|) sin(2 pi w.x), u2 = sqrt(2/|det A|) cos(2 pi w.x), phi = u1\n";
  if (!r.identities.empty()) {
    os << "identities (exact coefficient gap):\n";
    for (const auto& id : r.identities) {
      os << "  " << std::left << std::setw(34) << id.name << (id.exact_match ? "0" : "NONZERO") << "\n";
    }
  }
  os << "T(u1) = " << r.t_eigen_u1 << " u1   [lambda_1 (n^2+n-5) / (6|det A|)]\n";
  os << "T(u2) = " << r.t_eigen_u2 << " u2   [lambda_1 (n^2-5n+1) / (6|det A|)]\n";
  os << "mu = " << r.mu << "\n";
  if (r.alpha_bracket_exact) {
    os << "mu Vol + (n lambda_1/2)|phi|^2 = 4 pi^2 * " << *r.alpha_bracket_exact << "\n";
  }
  os << "alpha = " << r.alpha << "   [(n-1)^2 lambda_1 / 6 |det A|^{(2-n)/n}]\n";
  os << "verdict: " << to_string(r.verdict) << "\n";
  return os.str();
}

}  // namespace confspec
