#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "confspec/exact.hpp"
#include "confspec/lattice.hpp"
#include "confspec/trig_polynomial.hpp"

// Closed-form second variation on tori whose first eigenspace is spanned by
// one sine/cosine pair, with phi = u1. Independent of the generic
// perturbation code: everything here comes from hand-expanded trig
// identities and is diffed against it in the tests.
namespace confspec {

/// u1 = rho sin(2 pi w.x), u2 = rho cos(2 pi w.x), rho = sqrt(2/Vol), for
/// the unique shortest dual vector w. Throws Inapplicable otherwise.
template <class S>
std::pair<TrigPolynomial<S>, TrigPolynomial<S>> build_first_eigenbasis(
    std::shared_ptr<const Lattice> lattice);

struct IdentityReplay {
  std::string name;
  TrigPolynomial<ExactScalar> lhs;
  TrigPolynomial<ExactScalar> rhs;
  double gap = 0.0;
  bool exact_match = false;
};

struct ReplayOptions {
  /// Index of an identity whose right side gets a spurious sin/cos(6 pi w.x)
  /// coefficient, to exercise the detector. -1 for none.
  int perturb_identity = -1;
  Rational perturbation{0};
  bool throw_on_mismatch = true;
};

/// The six product and gradient identities used to expand S(u1) and S(u2),
/// left sides computed with the trig algebra, right sides hard-coded.
std::vector<IdentityReplay> replay_identities(std::shared_ptr<const Lattice> lattice,
                                              const ReplayOptions& options = {});

/// Hand-expanded S(u1) and S(u2) in exact mode:
///   S(u1) = l/(6V) [1+5a+a^2] u1 + rho l/(6V) [5-3a+a^2] sin(6 pi w.x)
///   S(u2) = l/(6V) [-5-a+a^2] u2 + rho l/(6V) [5-3a+a^2] cos(6 pi w.x)
/// with a = n - 2 and l = lambda_1 in units of 4 pi^2.
std::pair<TrigPolynomial<ExactScalar>, TrigPolynomial<ExactScalar>> s_closed_forms(
    std::shared_ptr<const Lattice> lattice);

enum class Verdict { NotMaximal, Inapplicable };
const char* to_string(Verdict v);

struct CaseworkReport {
  std::shared_ptr<const Lattice> lattice;
  int n = 0;
  std::optional<DualVector> w;
  ShortestStatus shortest = ShortestStatus::Tied;
  double lambda1 = 0.0;
  double det_a = 0.0;
  double t_eigen_u1 = 0.0;  // lambda1 (n^2+n-5) / (6 |det A|)
  double t_eigen_u2 = 0.0;  // lambda1 (n^2-5n+1) / (6 |det A|)
  double mu = 0.0;
  double alpha = 0.0;  // (n-1)^2 lambda1 / 6 |det A|^{(2-n)/n}
  Verdict verdict = Verdict::Inapplicable;

  // Exact values in units of 4 pi^2, present for rational lattices.
  std::optional<Rational> t_eigen_u1_exact;
  std::optional<Rational> t_eigen_u2_exact;
  std::optional<Rational> alpha_bracket_exact;  // mu Vol + (n lambda1 / 2) |phi|^2
  std::vector<IdentityReplay> identities;
};

CaseworkReport casework_report(std::shared_ptr<const Lattice> lattice);

/// Plain-text walk through the identities and the resulting numbers.
std::string render_text(const CaseworkReport& report);

}  // namespace confspec
