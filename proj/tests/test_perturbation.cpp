#include <doctest.h>

#include <cmath>
#include <numbers>

#include "confspec/casework.hpp"
#include "confspec/perturbation.hpp"

using namespace confspec;
using std::numbers::pi;

namespace {

using TP = TrigPolynomial<Complex>;
using XP = TrigPolynomial<ExactScalar>;

std::shared_ptr<const Lattice> diag(std::vector<double> d) {
  return std::make_shared<const Lattice>(Lattice::diagonal(std::move(d)));
}

/// Independent evaluation of the first-order eigenfunction change: sum over
/// the shells met by phi u and g(grad phi, grad u), outside the eigenvalue.
TP correction_oracle(const TP& phi, const EigenspaceCluster<Complex>& cl, const TP& u) {
  const int n = cl.dimension();
  const double lambda = cl.eigenvalue_abs();
  const TP pu = multiply(phi, u);
  const TP gu = gradient_pairing(phi, u);
  TP out(cl.lattice);
  std::vector<Complex> shells = support_shells(pu);
  for (const auto& q : support_shells(gu)) shells.push_back(q);
  std::vector<double> done;
  for (const auto& q : shells) {
    const double qv = q.real();
    bool seen = false;
    for (double d : done) seen = seen || std::abs(d - qv) <= 1e-9 * std::max(1.0, qv);
    if (seen || same_shell(qv, cl.q.real())) continue;
    done.push_back(qv);
    const double li = 4 * pi * pi * qv;
    const TP term = project_shell(pu, q) * Complex(lambda) + project_shell(gu, q) * Complex((n - 2) / 2.0);
    out += term * Complex(1.0 / (li - lambda));
  }
  return out;
}

}  // namespace

TEST_CASE("cluster invariants") {
  for (auto lat : {diag({1, 2}), diag({1, 1, 2}), std::make_shared<const Lattice>(Lattice::identity(2))}) {
    for (int level = 1; level <= 3; ++level) {
      const auto cl = make_cluster<Complex>(lat, level);
      REQUIRE(static_cast<int>(cl.basis.size()) == cl.multiplicity);
      CHECK(cl.gap_ok);
      for (int i = 0; i < cl.multiplicity; ++i) {
        const auto& ui = cl.basis[static_cast<std::size_t>(i)];
        CHECK(max_coefficient_gap(laplacian(ui), ui * Complex(cl.eigenvalue_abs())) < 1e-11);
        for (int j = 0; j < cl.multiplicity; ++j) {
          CHECK(std::abs(l2_inner(ui, cl.basis[static_cast<std::size_t>(j)]) - (i == j ? 1.0 : 0.0)) < 1e-12);
        }
      }
    }
  }
  // index_k counts the constant eigenvalue as position 0
  const auto z2 = make_cluster<Complex>(std::make_shared<const Lattice>(Lattice::identity(2)), 2);
  CHECK(z2.index_k == 5);
  CHECK(z2.multiplicity == 4);
  CHECK_THROWS_AS(make_cluster<Complex>(diag({1, 2}), 0), Error);
}

TEST_CASE("with_basis rejects functions outside the eigenspace") {
  auto lat = diag({1, 2});
  const auto cl = make_cluster<Complex>(lat, 1);
  auto bad = cl.basis;
  bad[1] = TP::cos_wave(lat, Freq{1, 0, 0, 0, 0}, std::sqrt(2.0 / lat->volume()));
  try {
    with_basis(cl, bad);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotInEigenspace);
  }
  auto unnormalized = cl.basis;
  unnormalized[0] *= Complex(2.0);
  CHECK_THROWS_AS(with_basis(cl, unnormalized), Error);
}

TEST_CASE("admissibility") {
  auto lat = diag({1, 2});
  const auto cl = make_cluster<Complex>(lat, 1);
  const auto& u1 = cl.basis[0];
  const auto dir = check_admissible(u1, cl);
  CHECK(dir.residual_mass < 1e-15);
  CHECK(dir.residual_grad < 1e-15);

  try {
    check_admissible(TP::constant(lat, 1.0), cl);
    FAIL("constant accepted");
  } catch (const NotAdmissible& e) {
    CHECK(e.mean() == doctest::Approx(2.0));
  }

  const Freq w2{0, 2, 0, 0, 0};
  const TP cos2 = TP::cos_wave(lat, w2, 1.0);
  CHECK(integrate(multiply(cos2, multiply(u1, u1))) == doctest::Approx(-0.5));
  try {
    check_admissible(cos2, cl);
    FAIL("cos(4 pi w.x) accepted");
  } catch (const NotAdmissible& e) {
    CHECK(e.residual_mass() == doctest::Approx(0.5));
    CHECK(e.residual_grad() > 0.1);
  }
  const auto r = admissibility_residuals(cos2, cl);
  CHECK(r.mean == 0.0);
  CHECK(r.residual_mass == doctest::Approx(0.5));
}

TEST_CASE("admissible subspace") {
  auto lat = diag({1, 2});
  const auto cl = make_cluster<Complex>(lat, 1);
  const auto both = admissible_subspace(cl.basis, cl);
  CHECK(both.size() == 2);
  for (const auto& f : both) CHECK(admissibility_residuals(f, cl).residual_grad < 1e-12);

  const Freq w2{0, 2, 0, 0, 0};
  const std::vector<TP> doubled{TP::cos_wave(lat, w2, 1.0), TP::sin_wave(lat, w2, 1.0)};
  CHECK(admissible_subspace(doubled, cl).empty());
  CHECK_THROWS_AS(admissible_subspace({}, cl), Error);

  // mixing admissible and inadmissible directions keeps exactly the admissible span
  std::vector<TP> mixed = doubled;
  mixed.push_back(cl.basis[0]);
  mixed.push_back(TP::cos_wave(lat, Freq{1, 0, 0, 0, 0}, 1.0));
  const auto kept = admissible_subspace(mixed, cl);
  CHECK(kept.size() == 2);
  for (const auto& f : kept) {
    CHECK(std::abs(l2_inner(f, f) - 1.0) < 1e-12);
    CHECK(admissibility_residuals(f, cl).residual_mass < 1e-12);
  }
}

TEST_CASE("first variation vanishes for admissible phi") {
  for (auto lat : {diag({1, 2}), diag({1, 1, 2}), diag({1, 1, 1, 2})}) {
    const auto cl = make_cluster<Complex>(lat, 1);
    for (const auto& phi : cl.basis) {
      CHECK(first_variation_matrix(phi, cl).to_eigen().cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  auto lat = diag({1, 2});
  const auto cl = make_cluster<Complex>(lat, 1);
  const TP cos2 = TP::cos_wave(lat, Freq{0, 2, 0, 0, 0}, 1.0);
  const auto p = first_variation_matrix(cos2, cl).to_eigen();
  CHECK(p(0, 0) == doctest::Approx(cl.eigenvalue_abs() / 2));
}

TEST_CASE("eigenfunction correction") {
  auto lat = diag({1, 2});
  const auto cl = make_cluster<Complex>(lat, 1);
  const auto& u1 = cl.basis[0];
  const double vol = lat->volume();
  const TP got = eigenfunction_correction(u1, cl, 0);
  // regression value: -1/|det A| - cos(4 pi w.x) / (3 |det A|)
  const TP expect = TP::constant(lat, -1.0 / vol) + TP::cos_wave(lat, Freq{0, 2, 0, 0, 0}, -1.0 / (3 * vol));
  CHECK(max_coefficient_gap(got, expect) < 1e-14);
  CHECK(max_coefficient_gap(got, correction_oracle(u1, cl, u1)) < 1e-14);
  CHECK(project(got, cl.level).is_zero());

  CHECK(eigenfunction_correction(TP(lat), cl, 0).is_zero());
  CHECK_THROWS_AS(eigenfunction_correction(u1, cl, 2), Error);

  auto lat3 = diag({1, 1, 2});
  const auto cl3 = make_cluster<Complex>(lat3, 1);
  for (int j = 0; j < 2; ++j) {
    const auto& u = cl3.basis[static_cast<std::size_t>(j)];
    const TP c3 = eigenfunction_correction(cl3.basis[0], cl3, j);
    CHECK(max_coefficient_gap(c3, correction_oracle(cl3.basis[0], cl3, u)) < 1e-13);
  }
  // at n = 3 the gradient term contributes, so the result differs from the
  // pure product part
  const auto& v = cl3.basis[0];
  TP product_only(lat3);
  for (const auto& q : support_shells(multiply(v, v))) {
    if (same_shell(q.real(), cl3.q.real())) continue;
    const double li = 4 * pi * pi * q.real();
    product_only += project_shell(multiply(v, v), q) * Complex(cl3.eigenvalue_abs() / (li - cl3.eigenvalue_abs()));
  }
  CHECK(max_coefficient_gap(eigenfunction_correction(v, cl3, 0), product_only) > 1e-3);
}

TEST_CASE("S operator against the hand-expanded forms, n = 2..5") {
  for (int n = 2; n <= 5; ++n) {
    std::vector<double> d(static_cast<std::size_t>(n), 1.0);
    d.back() = 2.0;
    auto lat = diag(d);
    const auto cl = make_cluster<ExactScalar>(lat, 1);
    const auto [u1, u2] = build_first_eigenbasis<ExactScalar>(lat);
    const auto [s1, s2] = s_closed_forms(lat);
    const auto got1 = s_apply(u1, cl, u1);
    const auto got2 = s_apply(u1, cl, u2);
    INFO("n = " << n);
    CHECK(max_coefficient_gap(got1, s1) == 0.0);
    CHECK(max_coefficient_gap(got2, s2) == 0.0);

    // coefficient extraction: <u_j, S(u_j)> / (l/(6V)) reproduces the displayed polynomials
    const ExactScalar l = cl.q;
    const ExactScalar v = Arith<ExactScalar>::volume(*lat);
    const ExactScalar unit = l / (ExactScalar(6) * v);
    const long long a = n - 2;
    CHECK(l2_inner_exact(u1, got1) / unit == ExactScalar(1 + 5 * a + a * a));
    CHECK(l2_inner_exact(u2, got2) / unit == ExactScalar(-5 - a + a * a));
    const Freq w = unique_shortest(*lat)->coords;
    const XP s3 = XP::sin_wave(lat, scaled(w, 3), ExactScalar(1));
    const ExactScalar rho = Arith<ExactScalar>::wave_amplitude(*lat);
    const ExactScalar high = l2_inner_exact(s3, got1) / l2_inner_exact(s3, s3);
    CHECK(high / (rho * unit) == ExactScalar(5 - 3 * a + a * a));
  }
}

TEST_CASE("s_apply rejects u outside the eigenspace") {
  auto lat = diag({1, 2});
  const auto cl = make_cluster<Complex>(lat, 1);
  try {
    s_apply(cl.basis[0], cl, TP::cos_wave(lat, Freq{1, 0, 0, 0, 0}, 1.0));
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotInEigenspace);
  }
  CHECK(s_apply(TP(lat), cl, cl.basis[0]).is_zero());
}

TEST_CASE("T matrix closed forms") {
  {
    auto lat = diag({1, 2});
    const auto cl = make_cluster<Complex>(lat, 1);
    const double l = cl.eigenvalue_abs();
    CHECK(l == doctest::Approx(pi * pi));
    const auto t = t_matrix(cl.basis[0], cl);
    const auto m = t.matrix.to_eigen();
    CHECK(std::abs(m(0, 0) - l / 12) < 1e-10 * l);
    CHECK(std::abs(m(1, 1) + 5 * l / 12) < 1e-10 * l);
    CHECK(std::abs(m(0, 1)) < 1e-10 * l);
    CHECK(t.asymmetry < 1e-10);
    CHECK(std::abs(t.eigenvalues[0] + 5 * l / 12) < 1e-10 * l);
    CHECK(std::abs(t.eigenvalues[1] - l / 12) < 1e-10 * l);
  }
  {
    auto lat = diag({1, 1, 2});
    const auto cl = make_cluster<Complex>(lat, 1);
    const double l = cl.eigenvalue_abs();
    const auto t = t_matrix(cl.basis[0], cl);
    CHECK(std::abs(t.eigenvalues[0] + 5 * l / 12) < 1e-10 * l);
    CHECK(std::abs(t.eigenvalues[1] - 7 * l / 12) < 1e-10 * l);
  }
  {
    auto lat = diag({1, 2});
    const auto cl = make_cluster<ExactScalar>(lat, 1);
    const auto t = t_matrix(cl.basis[0], cl);
    REQUIRE(t.exact_eigenvalues);
    // lambda_1 = 1/4 in units of 4 pi^2
    CHECK((*t.exact_eigenvalues)[0] == ExactScalar::fraction(-5, 48));
    CHECK((*t.exact_eigenvalues)[1] == ExactScalar::fraction(1, 48));
  }
  {
    auto lat = diag({1, 2});
    const auto cl = make_cluster<Complex>(lat, 1);
    const auto t = t_matrix(TP(lat), cl);
    CHECK(t.matrix.to_eigen().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("second variation report") {
  {
    auto lat = diag({1, 2});
    const auto cl = make_cluster<Complex>(lat, 1);
    const double l = cl.eigenvalue_abs();
    const auto r = second_variation_alpha(cl.basis[0], cl);
    CHECK(r.n == 2);
    CHECK(r.index_k == 1);
    CHECK(r.volume == doctest::Approx(2.0));
    CHECK(r.phi_normsq == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(r.mu + 5 * l / 12) < 1e-10 * l);
    CHECK(std::abs(r.alpha - l / 6) < 1e-10 * l);
    CHECK(r.p_matrix.to_eigen().cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(alpha_from_parts(r.n, r.lambda_k, r.mu, r.volume, r.phi_normsq) - r.alpha) <= 1e-12 * r.alpha);
  }
  {
    auto lat = diag({1, 1, 2});
    const auto cl = make_cluster<Complex>(lat, 1);
    const double l = cl.eigenvalue_abs();
    const auto r = second_variation_alpha(cl.basis[0], cl);
    CHECK(std::abs(r.alpha - 2 * l / 3 * std::pow(2.0, -1.0 / 3.0)) < 1e-10 * l);
  }
  {
    auto lat = diag({1, 2});
    const auto cl = make_cluster<ExactScalar>(lat, 1);
    const auto r = second_variation_alpha(cl.basis[0], cl);
    REQUIRE(r.alpha_bracket);
    REQUIRE(r.mu_exact);
    // mu V + (n l / 2) |phi|^2 = -5/48 * 2 + 1/4 = 1/24
    CHECK(*r.alpha_bracket == ExactScalar::fraction(1, 24));
    CHECK(*r.mu_exact == ExactScalar::fraction(-5, 48));
    CHECK(r.alpha == doctest::Approx(pi * pi / 6));
  }
  {
    auto lat = diag({1, 2});
    const auto cl = make_cluster<Complex>(lat, 1);
    const auto r = second_variation_alpha(TP(lat), cl);
    CHECK(r.mu == 0.0);
    CHECK(r.alpha == 0.0);
  }
}

TEST_CASE("higher-multiplicity cluster on the square torus") {
  auto lat = std::make_shared<const Lattice>(Lattice::identity(2));
  const auto cl = make_cluster<Complex>(lat, 1);
  REQUIRE(cl.multiplicity == 4);
  // cos(2 pi x) is orthogonal to all products of level-1 functions
  const TP phi = TP::cos_wave(lat, Freq{1, 0, 0, 0, 0}, 1.0);
  const auto r = second_variation_alpha(phi, cl);
  CHECK(r.lambda_ddot.size() == 4);
  CHECK(r.p_matrix.to_eigen().cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.mu == doctest::Approx(*std::min_element(r.lambda_ddot.begin(), r.lambda_ddot.end())));
}
