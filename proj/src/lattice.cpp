#include "confspec/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include <omp.h>

#include "confspec/errors.hpp"

namespace confspec {

namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

std::optional<RationalLatticeData> exact_data(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<Rational> ar(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!rationalize(a(i, j), ar[static_cast<std::size_t>(i * n + j)])) return std::nullopt;
    }
  }
  auto at = [&](int i, int j) -> const Rational& { return ar[static_cast<std::size_t>(i * n + j)]; };
  // Gram matrix A^T A, then Gauss-Jordan inverse alongside the determinant.
  std::vector<Rational> gram(static_cast<std::size_t>(n * n)), inv(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Rational s = 0;
      for (int k = 0; k < n; ++k) s += at(k, i) * at(k, j);
      gram[static_cast<std::size_t>(i * n + j)] = s;
      inv[static_cast<std::size_t>(i * n + j)] = (i == j) ? 1 : 0;
    }
  }
  auto g = [&](int i, int j) -> Rational& { return gram[static_cast<std::size_t>(i * n + j)]; };
  auto v = [&](int i, int j) -> Rational& { return inv[static_cast<std::size_t>(i * n + j)]; };
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    while (pivot < n && g(pivot, col) == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(g(pivot, j), g(col, j));
        std::swap(v(pivot, j), v(col, j));
      }
    }
    const Rational p = g(col, col);
    for (int j = 0; j < n; ++j) {
      g(col, j) /= p;
      v(col, j) /= p;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col || g(i, col) == 0) continue;
      const Rational f = g(i, col);
      for (int j = 0; j < n; ++j) {
        g(i, j) -= f * g(col, j);
        v(i, j) -= f * v(col, j);
      }
    }
  }
  // |det A| by rational elimination on A itself.
  std::vector<Rational> m = ar;
  auto mm = [&](int i, int j) -> Rational& { return m[static_cast<std::size_t>(i * n + j)]; };
  Rational det = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    while (pivot < n && mm(pivot, col) == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(mm(pivot, j), mm(col, j));
      det = -det;
    }
    det *= mm(col, col);
    for (int i = col + 1; i < n; ++i) {
      if (mm(i, col) == 0) continue;
      const Rational f = mm(i, col) / mm(col, col);
      for (int j = col; j < n; ++j) mm(i, j) -= f * mm(col, j);
    }
  }
  if (det < 0) det = -det;
  return RationalLatticeData{std::move(inv), det};
}

long long integer_det(std::vector<std::vector<long long>> m) {
  // Bareiss fraction-free elimination.
  const int n = static_cast<int>(m.size());
  long long sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m[k][k] == 0) {
      int swap = k + 1;
      while (swap < n && m[swap][k] == 0) ++swap;
      if (swap == n) return 0;
      std::swap(m[k], m[swap]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      }
    }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

}  // namespace

bool is_pair_representative(const Freq& c) {
  for (int v : c) {
    if (v != 0) return v > 0;
  }
  return false;
}

bool same_shell(double q1, double q2) {
  return std::abs(q1 - q2) <= kShellTolerance * std::max(std::abs(q1), std::abs(q2));
}

Lattice::Lattice(const Eigen::MatrixXd& basis_columns) : n_(static_cast<int>(basis_columns.rows())) {
  if (basis_columns.rows() != basis_columns.cols()) {
    throw Error(ErrorKind::InvalidLattice, "basis matrix must be square");
  }
  if (n_ < 2 || n_ > kMaxDimension) {
    throw Error(ErrorKind::UnsupportedDimension,
                "lattice dimension " + std::to_string(n_) + " outside [2, " +
                    std::to_string(kMaxDimension) + "]");
  }
  if (!basis_columns.allFinite()) throw Error(ErrorKind::InvalidLattice, "non-finite basis entry");
  basis_ = basis_columns;
  const double det = basis_.determinant();
  double scale = 1.0;
  for (int j = 0; j < n_; ++j) scale *= basis_.col(j).norm();
  if (!(std::abs(det) > 1e-12 * scale) || scale == 0.0) {
    throw Error(ErrorKind::InvalidLattice, "singular basis matrix (|det A| = " +
                                               std::to_string(std::abs(det)) + ")");
  }
  volume_ = std::abs(det);
  dual_ = basis_.transpose().inverse();
  const Eigen::MatrixXd check = dual_.transpose() * basis_;
  if ((check - Eigen::MatrixXd::Identity(n_, n_)).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorKind::InvalidLattice, "basis too ill-conditioned: B^T A != I to 1e-12");
  }
  exact_ = exact_data(basis_);
}

Lattice Lattice::identity(int n) { return Lattice(Eigen::MatrixXd::Identity(n, n)); }

Lattice Lattice::diagonal(const std::vector<double>& entries) {
  const int n = static_cast<int>(entries.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = entries[static_cast<std::size_t>(i)];
  return Lattice(a);
}

Lattice Lattice::ab(double a, double b) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, a, 0.0, b;
  return Lattice(m);
}

Eigen::VectorXd Lattice::cartesian(const Freq& c) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_);
  for (int j = 0; j < n_; ++j) {
    if (c[j] != 0) w += static_cast<double>(c[j]) * dual_.col(j);
  }
  return w;
}

double Lattice::normsq(const Freq& c) const { return cartesian(c).squaredNorm(); }

double Lattice::dot(const Freq& a, const Freq& b) const { return cartesian(a).dot(cartesian(b)); }

DualVector make_dual_vector(const Lattice& lattice, const Freq& coords) {
  DualVector v;
  v.coords = coords;
  v.cartesian = lattice.cartesian(coords);
  v.normsq = v.cartesian.squaredNorm();
  return v;
}

Eigen::MatrixXd dual_basis(const Lattice& lattice) { return lattice.dual_basis(); }

std::vector<DualVector> enumerate_dual_vectors(const Lattice& lattice, double radius_sq,
                                               const EnumerationOptions& options) {
  if (!(radius_sq > 0.0) || !std::isfinite(radius_sq)) {
    throw Error(ErrorKind::InvalidInput, "radius_sq must be positive and finite");
  }
  const int n = lattice.dimension();
  // c_j = a_j . w, so |c_j| <= |a_j| |w|: a box that provably contains the ball.
  const double radius = std::sqrt(radius_sq);
  std::array<long long, kMaxDimension> half{};
  long long box = 1;
  for (int j = 0; j < n; ++j) {
    half[static_cast<std::size_t>(j)] =
        static_cast<long long>(std::floor(radius * lattice.basis().col(j).norm() * (1.0 + 1e-12)));
    box *= 2 * half[static_cast<std::size_t>(j)] + 1;
    if (box > static_cast<long long>(options.cap) * 4096LL) throw EnumerationOverflow(options.cap);
  }
  const double limit = radius_sq * (1.0 + kShellTolerance);
  const Eigen::MatrixXd& dual = lattice.dual_basis();

  auto visit = [&](long long flat, std::vector<DualVector>& sink) {
    Freq c{};
    long long rem = flat;
    for (int j = 0; j < n; ++j) {
      const long long width = 2 * half[static_cast<std::size_t>(j)] + 1;
      c[static_cast<std::size_t>(j)] = static_cast<int>(rem % width - half[static_cast<std::size_t>(j)]);
      rem /= width;
    }
    if (c == kZeroFreq) return;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (c[static_cast<std::size_t>(j)] != 0) w += c[static_cast<std::size_t>(j)] * dual.col(j);
    }
    const double q = w.squaredNorm();
    if (q <= limit) sink.push_back(DualVector{c, std::move(w), q});
  };

  std::vector<DualVector> out;
  bool overflow = false;
  if (options.exec == Exec::Serial) {
    for (long long flat = 0; flat < box; ++flat) {
      visit(flat, out);
      if (out.size() > options.cap) {
        overflow = true;
        break;
      }
    }
  } else {
    std::vector<std::vector<DualVector>> per_thread(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
    {
      auto& local = per_thread[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
      for (long long flat = 0; flat < box; ++flat) {
        if (local.size() <= options.cap) visit(flat, local);
      }
    }
    std::size_t total = 0;
    for (const auto& v : per_thread) total += v.size();
    if (total > options.cap) {
      overflow = true;
    } else {
      out.reserve(total);
      for (auto& v : per_thread) std::move(v.begin(), v.end(), std::back_inserter(out));
    }
  }
  if (overflow) throw EnumerationOverflow(options.cap);
  std::sort(out.begin(), out.end(), [](const DualVector& x, const DualVector& y) {
    if (x.normsq != y.normsq) return x.normsq < y.normsq;
    return x.coords < y.coords;
  });
  return out;
}

std::vector<SpectrumLevel> flat_spectrum(const Lattice& lattice, int level_count,
                                         const EnumerationOptions& options) {
  if (level_count < 1) throw Error(ErrorKind::InvalidInput, "level_count must be >= 1");
  double radius_sq = 0.0;
  for (int j = 0; j < lattice.dimension(); ++j) {
    radius_sq = std::max(radius_sq, lattice.dual_basis().col(j).squaredNorm());
  }
  for (;;) {
    const auto vectors = enumerate_dual_vectors(lattice, radius_sq, options);
    std::vector<SpectrumLevel> levels;
    for (const auto& v : vectors) {
      if (levels.empty() || !same_shell(levels.back().q, v.normsq)) {
        SpectrumLevel level;
        level.index = static_cast<int>(levels.size()) + 1;
        level.q = v.normsq;
        levels.push_back(std::move(level));
      }
      auto& level = levels.back();
      ++level.multiplicity;
      if (is_pair_representative(v.coords)) level.frequency_pairs.push_back(v);
    }
    // a shell sitting on the enumeration boundary may be cut by roundoff
    if (!levels.empty() && levels.back().q > radius_sq * (1.0 - 1e-8)) levels.pop_back();
    if (static_cast<int>(levels.size()) >= level_count) {
      levels.resize(static_cast<std::size_t>(level_count));
      for (auto& level : levels) {
        level.eigenvalue = kFourPiSq * level.q;
        std::sort(level.frequency_pairs.begin(), level.frequency_pairs.end(),
                  [](const DualVector& x, const DualVector& y) { return x.coords < y.coords; });
      }
      return levels;
    }
    radius_sq *= 2.0;
  }
}

const char* to_string(ShortestStatus status) {
  switch (status) {
    case ShortestStatus::Unique: return "unique";
    case ShortestStatus::Tied: return "tied";
    case ShortestStatus::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

ShortestVector classify_shortest(const Lattice& lattice) {
  const auto levels = flat_spectrum(lattice, 2);
  ShortestVector out;
  out.w = levels[0].frequency_pairs.front();
  out.shortest_pairs = static_cast<int>(levels[0].frequency_pairs.size());
  out.next_q = levels[1].q;
  out.relative_gap = (levels[1].q - levels[0].q) / levels[0].q;
  if (out.shortest_pairs > 1) {
    out.status = ShortestStatus::Tied;
  } else if (out.relative_gap < kIndeterminateGap) {
    out.status = ShortestStatus::Indeterminate;
  } else {
    out.status = ShortestStatus::Unique;
  }
  return out;
}

std::optional<DualVector> unique_shortest(const Lattice& lattice) {
  auto s = classify_shortest(lattice);
  if (s.status != ShortestStatus::Unique) return std::nullopt;
  return s.w;
}

DualBasisMinimum minimize_dual_basis(const Lattice& lattice) {
  const int n = lattice.dimension();
  if (n > 4) {
    throw Error(ErrorKind::UnsupportedDimension,
                "dual basis search supports n <= 4, got " + std::to_string(n));
  }
  double radius_sq = 0.0;
  for (int j = 0; j < n; ++j) radius_sq = std::max(radius_sq, lattice.dual_basis().col(j).squaredNorm());

  // successive minima from the sorted enumeration
  DualBasisMinimum out;
  {
    const auto vectors = enumerate_dual_vectors(lattice, radius_sq);
    Eigen::MatrixXd picked(n, 0);
    for (const auto& v : vectors) {
      if (!is_pair_representative(v.coords)) continue;
      Eigen::MatrixXd trial(n, picked.cols() + 1);
      trial << picked, v.cartesian;
      if (Eigen::FullPivLU<Eigen::MatrixXd>(trial).rank() == trial.cols()) {
        picked = trial;
        out.successive_minima_sq.push_back(v.normsq);
        if (picked.cols() == n) break;
      }
    }
  }
  const double top = out.successive_minima_sq.back();
  std::vector<DualVector> candidates;
  for (auto& v : enumerate_dual_vectors(lattice, 2.25 * top)) {
    if (is_pair_representative(v.coords)) candidates.push_back(std::move(v));
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> chosen, best_set;
  std::function<void(int, double)> search = [&](int start, double partial) {
    const int depth = static_cast<int>(chosen.size());
    if (depth == n) {
      std::vector<std::vector<long long>> m(static_cast<std::size_t>(n),
                                            std::vector<long long>(static_cast<std::size_t>(n)));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              candidates[static_cast<std::size_t>(chosen[static_cast<std::size_t>(j)])].coords[static_cast<std::size_t>(i)];
        }
      }
      const long long det = integer_det(m);
      if ((det == 1 || det == -1) && partial < best * (1.0 - 1e-12)) {
        best = partial;
        best_set = chosen;
      }
      return;
    }
    for (int i = start; i < static_cast<int>(candidates.size()); ++i) {
      const double q = candidates[static_cast<std::size_t>(i)].normsq;
      if (partial + (n - depth) * q >= best * (1.0 - 1e-12)) break;
      chosen.push_back(i);
      Eigen::MatrixXd trial(n, depth + 1);
      for (int k = 0; k <= depth; ++k) {
        trial.col(k) = candidates[static_cast<std::size_t>(chosen[static_cast<std::size_t>(k)])].cartesian;
      }
      if (Eigen::FullPivLU<Eigen::MatrixXd>(trial).rank() == depth + 1) search(i + 1, partial + q);
      chosen.pop_back();
    }
  };
  search(0, 0.0);
  if (best_set.empty()) {
    throw Error(ErrorKind::InternalConsistency, "no unimodular dual basis among candidates");
  }
  out.c = best;
  for (int i : best_set) out.basis.push_back(candidates[static_cast<std::size_t>(i)]);
  return out;
}

double c_gamma_star(const Lattice& lattice) { return minimize_dual_basis(lattice).c; }

ConformalBound conformal_upper_bound(const Lattice& lattice) {
  const int n = lattice.dimension();
  const auto minimum = minimize_dual_basis(lattice);
  const auto level1 = flat_spectrum(lattice, 1).front();
  ConformalBound out;
  out.c_gamma_star = minimum.c;
  out.bound = kFourPiSq * minimum.c * std::pow(lattice.volume(), 2.0 / n) / n;
  out.lambda1 = level1.eigenvalue;
  out.flat_normalized_lambda1 = level1.eigenvalue * std::pow(lattice.volume(), 2.0 / n);
  // some minimizing basis has all |w_i|^2 = c/n iff c = n * (first minimum)^2
  out.equality = std::abs(minimum.c - n * level1.q) <= 1e-9 * minimum.c;
  out.minimizing_basis = minimum.basis;
  return out;
}

}  // namespace confspec
