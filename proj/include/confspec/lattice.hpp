#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "confspec/exact.hpp"
#include "confspec/parallel.hpp"

namespace confspec {

/// Largest supported torus dimension for the function algebra. The lattice
/// geometry helpers that need exhaustive basis search stop at 4.
inline constexpr int kMaxDimension = 5;

/// Integer coordinates of a dual lattice vector in the dual basis. Entries
/// beyond the lattice dimension are zero.
using Freq = std::array<int, kMaxDimension>;

inline constexpr Freq kZeroFreq{};

inline Freq operator+(const Freq& a, const Freq& b) {
  Freq out{};
  for (int i = 0; i < kMaxDimension; ++i) out[i] = a[i] + b[i];
  return out;
}

inline Freq operator-(const Freq& a) {
  Freq out{};
  for (int i = 0; i < kMaxDimension; ++i) out[i] = -a[i];
  return out;
}

inline Freq operator-(const Freq& a, const Freq& b) { return a + (-b); }

inline Freq scaled(const Freq& a, int s) {
  Freq out{};
  for (int i = 0; i < kMaxDimension; ++i) out[i] = s * a[i];
  return out;
}

/// True when the first nonzero coordinate is positive (the chosen
/// representative of a +-pair).
bool is_pair_representative(const Freq& c);

/// Relative tolerance under which two |w|^2 values are one eigenvalue level.
inline constexpr double kShellTolerance = 1e-9;

bool same_shell(double q1, double q2);

/// Exact data of a lattice whose generator matrix is rational.
struct RationalLatticeData {
  std::vector<Rational> dual_gram;  // row-major n x n, (A^T A)^{-1}
  Rational volume;                  // |det A|
};

/// Lattice Gamma = A Z^n with generator columns A.
class Lattice {
 public:
  explicit Lattice(const Eigen::MatrixXd& basis_columns);

  static Lattice identity(int n);
  static Lattice diagonal(const std::vector<double>& entries);
  /// Two-dimensional lattice generated by (1,0) and (a,b).
  static Lattice ab(double a, double b);

  int dimension() const { return n_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& dual_basis() const { return dual_; }
  double volume() const { return volume_; }

  Eigen::VectorXd cartesian(const Freq& c) const;
  double normsq(const Freq& c) const;
  /// w_a . w_b for the cartesian dual vectors of a and b.
  double dot(const Freq& a, const Freq& b) const;

  /// Exact dual Gram matrix and volume, when every basis entry is a small
  /// rational. Null otherwise.
  const RationalLatticeData* exact() const { return exact_ ? &*exact_ : nullptr; }

  friend bool operator==(const Lattice& x, const Lattice& y) {
    return x.n_ == y.n_ && x.basis_ == y.basis_;
  }

 private:
  int n_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd dual_;
  double volume_;
  std::optional<RationalLatticeData> exact_;
};

struct DualVector {
  Freq coords{};
  Eigen::VectorXd cartesian;
  double normsq = 0.0;
};

DualVector make_dual_vector(const Lattice& lattice, const Freq& coords);

struct SpectrumLevel {
  int index = 0;        // 0 is the constant level
  double q = 0.0;       // |w|^2, eigenvalue in units of 4 pi^2
  double eigenvalue = 0.0;
  std::vector<DualVector> frequency_pairs;  // one representative per +-pair
  int multiplicity = 0;
};

struct EnumerationOptions {
  std::size_t cap = 1000000;
  Exec exec = Exec::Parallel;
};

/// (A^T)^{-1}; its columns generate the dual lattice.
Eigen::MatrixXd dual_basis(const Lattice& lattice);

/// All w in the dual lattice with 0 < |w|^2 <= radius_sq, sorted by normsq
/// then lexicographically by coordinates.
std::vector<DualVector> enumerate_dual_vectors(const Lattice& lattice, double radius_sq,
                                               const EnumerationOptions& options = {});

/// First level_count nonzero eigenvalue levels of the flat Laplacian.
std::vector<SpectrumLevel> flat_spectrum(const Lattice& lattice, int level_count,
                                         const EnumerationOptions& options = {});

enum class ShortestStatus { Unique, Tied, Indeterminate };

const char* to_string(ShortestStatus status);

struct ShortestVector {
  ShortestStatus status = ShortestStatus::Tied;
  DualVector w;            // representative of the shortest shell
  int shortest_pairs = 0;  // +-pairs realizing the minimum
  double next_q = 0.0;     // |v|^2 of the next shell
  double relative_gap = 0.0;
};

/// Margin below which a second shell is too close to call. Gaps under
/// kShellTolerance count as ties.
inline constexpr double kIndeterminateGap = 1e-7;

ShortestVector classify_shortest(const Lattice& lattice);

/// The representative w when |w| < |v| for all v outside {0, +-w}.
std::optional<DualVector> unique_shortest(const Lattice& lattice);

struct DualBasisMinimum {
  double c = 0.0;
  std::vector<DualVector> basis;
  std::vector<double> successive_minima_sq;
};

DualBasisMinimum minimize_dual_basis(const Lattice& lattice);

/// inf over bases of the dual lattice of sum |w_i|^2 (n <= 4).
double c_gamma_star(const Lattice& lattice);

struct ConformalBound {
  double c_gamma_star = 0.0;
  double bound = 0.0;  // 4 pi^2 c Vol^{2/n} / n, scale invariant like the normalized lambda1
  double lambda1 = 0.0;
  double flat_normalized_lambda1 = 0.0;  // lambda1 * Vol^{2/n}
  bool equality = false;
  std::vector<DualVector> minimizing_basis;
};

ConformalBound conformal_upper_bound(const Lattice& lattice);

}  // namespace confspec
