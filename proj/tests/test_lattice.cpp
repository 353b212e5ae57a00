#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "confspec/errors.hpp"
#include "confspec/lattice.hpp"
#include "generators.hpp"

using namespace confspec;
using std::numbers::pi;

namespace {

const Lattice kEquilateral = Lattice::ab(0.5, std::sqrt(3.0) / 2.0);

std::set<Freq> coord_set(const std::vector<DualVector>& v) {
  std::set<Freq> out;
  for (const auto& w : v) out.insert(w.coords);
  return out;
}

Freq f2(int a, int b) { return Freq{a, b, 0, 0, 0}; }

/// Brute force over the box [-b, b]^2.
std::set<Freq> brute2(const Lattice& lat, double r2, int b) {
  std::set<Freq> out;
  for (int i = -b; i <= b; ++i) {
    for (int j = -b; j <= b; ++j) {
      if ((i != 0 || j != 0) && lat.normsq(f2(i, j)) <= r2) out.insert(f2(i, j));
    }
  }
  return out;
}

int brute_multiplicity(const Lattice& lat, double q, int b) {
  int count = 0;
  for (const auto& c : brute2(lat, q * (1 + 1e-9), b)) {
    if (same_shell(lat.normsq(c), q)) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("dual basis") {
  CHECK(dual_basis(Lattice::identity(2)).isApprox(Eigen::MatrixXd::Identity(2, 2)));
  Eigen::MatrixXd expect(2, 2);
  expect << 1, 0, 0, 0.5;
  CHECK((dual_basis(Lattice::diagonal({1, 2})) - expect).cwiseAbs().maxCoeff() < 1e-15);

  const double a = 0.3, b = 1.7;
  const Lattice lat = Lattice::ab(a, b);
  Eigen::MatrixXd ab_dual(2, 2);
  ab_dual << 1, 0, -a / b, 1 / b;
  CHECK((dual_basis(lat) - ab_dual).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((dual_basis(lat).transpose() * lat.basis() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("invalid lattices") {
  Eigen::MatrixXd singular(2, 2);
  singular << 1, 2, 2, 4;
  CHECK_THROWS_AS(Lattice{singular}, Error);
  try {
    Lattice{singular};
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidLattice);
  }
  try {
    Lattice::identity(6);
    FAIL("dimension 6 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedDimension);
  }
  CHECK_THROWS_AS(Lattice{Eigen::MatrixXd::Ones(2, 3)}, Error);
}

TEST_CASE("dual vectors pair integrally with the lattice") {
  confspec::testing::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto lat = confspec::testing::random_real_lattice(rng, 3);
    for (const auto& w : enumerate_dual_vectors(*lat, 3.0)) {
      for (int col = 0; col < 3; ++col) {
        const double p = w.cartesian.dot(lat->basis().col(col));
        CHECK(std::abs(p - std::round(p)) < 1e-10);
      }
      CHECK(w.normsq == w.cartesian.squaredNorm());
    }
  }
}

TEST_CASE("enumeration against brute force") {
  const Lattice z2 = Lattice::identity(2);
  CHECK(coord_set(enumerate_dual_vectors(z2, 1.0)) == std::set<Freq>{f2(1, 0), f2(-1, 0), f2(0, 1), f2(0, -1)});

  const Lattice d12 = Lattice::diagonal({1, 2});
  const auto small = enumerate_dual_vectors(d12, 0.3);
  REQUIRE(small.size() == 2);
  CHECK(small[0].normsq == doctest::Approx(0.25));
  CHECK(coord_set(small) == std::set<Freq>{f2(0, 1), f2(0, -1)});

  // radius 1: |w|^2 in {1/4, 1}, the (+-1, +-1/2) vectors sit at 5/4
  CHECK(enumerate_dual_vectors(d12, 1.0).size() == 6);
  CHECK(coord_set(enumerate_dual_vectors(d12, 1.0)) == brute2(d12, 1.0, 3));
  CHECK(enumerate_dual_vectors(d12, 1.25).size() == 10);
  CHECK(coord_set(enumerate_dual_vectors(d12, 1.25)) == brute2(d12, 1.25, 3));

  const auto sorted = enumerate_dual_vectors(kEquilateral, 5.0);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    CHECK(sorted[i - 1].normsq <= sorted[i].normsq);
    if (sorted[i - 1].normsq == sorted[i].normsq) CHECK(sorted[i - 1].coords < sorted[i].coords);
  }
  CHECK(coord_set(sorted) == brute2(kEquilateral, 5.0, 6));
}

TEST_CASE("serial and parallel enumeration agree") {
  const Lattice lat = Lattice::diagonal({1.0, 1.3, 0.7});
  const auto a = enumerate_dual_vectors(lat, 20.0, {1000000, Exec::Serial});
  const auto b = enumerate_dual_vectors(lat, 20.0, {1000000, Exec::Parallel});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].coords == b[i].coords);
}

TEST_CASE("enumeration overflow reports the cap") {
  try {
    enumerate_dual_vectors(Lattice::identity(3), 100.0, {50, Exec::Serial});
    FAIL("no overflow");
  } catch (const EnumerationOverflow& e) {
    CHECK(e.cap() == 50);
    CHECK(e.kind() == ErrorKind::EnumerationOverflow);
  }
  CHECK_THROWS_AS(enumerate_dual_vectors(Lattice::identity(2), -1.0), Error);
}

TEST_CASE("flat spectrum examples") {
  const auto z2 = flat_spectrum(Lattice::identity(2), 3);
  REQUIRE(z2.size() == 3);
  CHECK(z2[0].eigenvalue == doctest::Approx(4 * pi * pi));
  CHECK(z2[0].multiplicity == 4);
  CHECK(z2[1].eigenvalue == doctest::Approx(8 * pi * pi));
  CHECK(z2[1].multiplicity == 4);

  const auto d12 = flat_spectrum(Lattice::diagonal({1, 2}), 4);
  CHECK(d12[0].eigenvalue == doctest::Approx(pi * pi));
  CHECK(d12[0].multiplicity == 2);
  CHECK(d12[0].frequency_pairs.size() == 1);

  const auto d112 = flat_spectrum(Lattice::diagonal({1, 1, 2}), 2);
  CHECK(d112[0].eigenvalue == doctest::Approx(pi * pi));
  CHECK(d112[0].multiplicity == 2);
  CHECK(d112[1].multiplicity == 6);
}

TEST_CASE("flat spectrum multiplicities against brute-force shell counts") {
  for (const auto& lat : {Lattice::identity(2), Lattice::diagonal({1, 2}), kEquilateral, Lattice::ab(0.3, 1.4)}) {
    const auto levels = flat_spectrum(lat, 8);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      CHECK(levels[i].index == static_cast<int>(i) + 1);
      CHECK(levels[i].multiplicity == 2 * static_cast<int>(levels[i].frequency_pairs.size()));
      CHECK(levels[i].multiplicity == brute_multiplicity(lat, levels[i].q, 12));
      if (i > 0) CHECK(levels[i].eigenvalue > levels[i - 1].eigenvalue);
    }
  }
}

TEST_CASE("unique shortest dual vector") {
  CHECK(!unique_shortest(Lattice::identity(2)));
  CHECK(classify_shortest(Lattice::identity(2)).status == ShortestStatus::Tied);
  CHECK(classify_shortest(Lattice::identity(2)).shortest_pairs == 2);

  const auto w = unique_shortest(Lattice::diagonal({1, 2}));
  REQUIRE(w);
  CHECK(w->coords == f2(0, 1));
  CHECK(w->cartesian(1) == doctest::Approx(0.5));

  CHECK(!unique_shortest(kEquilateral));
  CHECK(classify_shortest(kEquilateral).shortest_pairs == 3);

  // a second shell within 1e-8 relative is too close to call
  const Lattice near = Lattice::diagonal({1.0, 1.0 + 5e-9});
  CHECK(classify_shortest(near).status == ShortestStatus::Indeterminate);
  CHECK(!unique_shortest(near));

  confspec::testing::Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto lat = confspec::testing::random_real_lattice(rng, 3);
    if (unique_shortest(*lat)) CHECK(flat_spectrum(*lat, 1)[0].multiplicity == 2);
  }
}

TEST_CASE("c(Gamma*) examples") {
  CHECK(c_gamma_star(Lattice::identity(2)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c_gamma_star(Lattice::diagonal({1, 2})) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(c_gamma_star(kEquilateral) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(c_gamma_star(Lattice::identity(4)) == doctest::Approx(4.0).epsilon(1e-12));
  try {
    c_gamma_star(Lattice::identity(5));
    FAIL("n = 5 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedDimension);
  }
}

TEST_CASE("c(Gamma*) is a basis sum and bounded below by n times the first minimum") {
  confspec::testing::Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.integer(2, 4);
    auto lat = confspec::testing::random_real_lattice(rng, n);
    const auto m = minimize_dual_basis(*lat);
    REQUIRE(static_cast<int>(m.basis.size()) == n);
    Eigen::MatrixXd coords(n, n);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) coords(i, j) = m.basis[static_cast<std::size_t>(j)].coords[static_cast<std::size_t>(i)];
      sum += m.basis[static_cast<std::size_t>(j)].normsq;
    }
    CHECK(std::abs(std::abs(coords.determinant()) - 1.0) < 1e-9);
    CHECK(sum == doctest::Approx(m.c).epsilon(1e-12));
    const double first = flat_spectrum(*lat, 1)[0].q;
    CHECK(m.c >= n * first * (1 - 1e-12));
    const auto bound = conformal_upper_bound(*lat);
    const bool tight = std::abs(m.c - n * first) <= 1e-9 * m.c;
    CHECK(tight == bound.equality);
  }
}

TEST_CASE("conformal upper bound") {
  const auto z2 = conformal_upper_bound(Lattice::identity(2));
  CHECK(z2.bound == doctest::Approx(4 * pi * pi));
  CHECK(z2.flat_normalized_lambda1 == doctest::Approx(4 * pi * pi));
  CHECK(z2.equality);

  const auto d12 = conformal_upper_bound(Lattice::diagonal({1, 2}));
  // c = 1.25 scaled by Vol^{2/n} = 2
  CHECK(d12.bound == doctest::Approx(5 * pi * pi));
  CHECK(d12.flat_normalized_lambda1 == doctest::Approx(2 * pi * pi));
  CHECK(!d12.equality);

  const auto eq = conformal_upper_bound(kEquilateral);
  CHECK(eq.c_gamma_star == doctest::Approx(8.0 / 3));
  CHECK(eq.flat_normalized_lambda1 == doctest::Approx(8 * pi * pi / std::sqrt(3.0)));
  CHECK(eq.equality);
  CHECK(std::abs(eq.bound - eq.flat_normalized_lambda1) < 1e-9);

  const auto big = conformal_upper_bound(Lattice(3.0 * Lattice::diagonal({2, 3}).basis()));
  CHECK(big.flat_normalized_lambda1 <= big.bound + 1e-9);
  CHECK(big.bound == doctest::Approx(conformal_upper_bound(Lattice::diagonal({2, 3})).bound));
}

TEST_CASE("scaling law at s = 2") {
  for (const auto& lat : {Lattice::diagonal({1, 2}), kEquilateral, Lattice::diagonal({1, 1, 2})}) {
    const Lattice big(2.0 * lat.basis());
    const int n = lat.dimension();
    const auto a = flat_spectrum(lat, 3);
    const auto b = flat_spectrum(big, 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(b[i].eigenvalue * 4.0 - a[i].eigenvalue) / a[i].eigenvalue < 1e-12);
    }
    CHECK(std::abs(big.volume() - std::pow(2.0, n) * lat.volume()) / big.volume() < 1e-12);
    const double bar_a = a[0].eigenvalue * std::pow(lat.volume(), 2.0 / n);
    const double bar_b = b[0].eigenvalue * std::pow(big.volume(), 2.0 / n);
    CHECK(std::abs(bar_a - bar_b) / bar_a < 1e-12);
  }
}

TEST_CASE("rational lattice data") {
  const Lattice lat = Lattice::ab(0.5, 1.5);
  REQUIRE(lat.exact());
  CHECK(lat.exact()->volume == Rational(3, 2));
  CHECK(!Lattice::ab(0.5, std::sqrt(3.0) / 2.0).exact());
}
