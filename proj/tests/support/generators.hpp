#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "confspec/lattice.hpp"
#include "confspec/trig_polynomial.hpp"

// Seeded generators for the randomized property suites.
namespace confspec::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  bool coin() { return integer(0, 1) == 1; }

 private:
  std::mt19937_64 engine_;
};

/// Upper-triangular generator with entries p/q, q in {1..4}; diagonal in [1/2, 3].
std::shared_ptr<const Lattice> random_rational_lattice(Rng& rng, int n);

/// Same shape with real entries.
std::shared_ptr<const Lattice> random_real_lattice(Rng& rng, int n);

/// Random lattice whose shortest dual vector is unique (up to sign).
std::shared_ptr<const Lattice> random_applicable_lattice(Rng& rng, int n, bool rational);

/// Real-valued trig polynomial with `pairs` random +-frequency pairs,
/// coordinates in [-max_coord, max_coord], plus a random constant.
TrigPolynomial<Complex> random_trig(Rng& rng, std::shared_ptr<const Lattice> lattice,
                                    int pairs, int max_coord);

/// Same with small rational coefficients.
TrigPolynomial<ExactScalar> random_trig_exact(Rng& rng, std::shared_ptr<const Lattice> lattice,
                                              int pairs, int max_coord);

Eigen::MatrixXd random_orthogonal(Rng& rng, int m);

Freq random_freq(Rng& rng, int n, int max_coord);

}  // namespace confspec::testing
