#include "confspec/perturbation.hpp"

#include <cmath>

namespace confspec {

double alpha_from_parts(int n, double lambda_k, double mu, double volume, double phi_normsq) {
  return (mu * volume + 0.5 * n * lambda_k * phi_normsq) * std::pow(volume, (2.0 - n) / n);
}

EigenspaceCluster<Complex> rotate_basis(const EigenspaceCluster<Complex>& cluster,
                                        const Eigen::MatrixXd& q) {
  const int m = cluster.multiplicity;
  if (q.rows() != m || q.cols() != m) throw Error(ErrorKind::InvalidInput, "rotation has wrong size");
  std::vector<TrigPolynomial<Complex>> basis;
  for (int j = 0; j < m; ++j) {
    TrigPolynomial<Complex> u(cluster.lattice);
    for (int i = 0; i < m; ++i) u += cluster.basis[static_cast<std::size_t>(i)] * Complex(q(i, j));
    basis.push_back(std::move(u));
  }
  return with_basis(cluster, std::move(basis));
}

std::vector<TrigPolynomial<Complex>> admissible_subspace(
    const std::vector<TrigPolynomial<Complex>>& candidates,
    const EigenspaceCluster<Complex>& cluster) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidInput, "admissible_subspace needs candidates");
  const int count = static_cast<int>(candidates.size());
  const int m = cluster.multiplicity;
  const auto& u = cluster.basis;

  for (const auto& c : candidates) {
    if (std::abs(integrate(c)) > kMeanTolerance) {
      throw Error(ErrorKind::InvalidInput, "admissible_subspace candidates must be mean-zero");
    }
  }

  // one row per constraint: symmetric mass pairs, then all ordered gradient pairs
  const int rows = m * (m + 1) / 2 + m * m;
  Eigen::MatrixXd constraints(rows, count);
  for (int l = 0; l < count; ++l) {
    const auto& phi = candidates[static_cast<std::size_t>(l)];
    int row = 0;
    for (int i = 0; i < m; ++i) {
      const auto phi_ui = multiply(phi, u[static_cast<std::size_t>(i)]);
      for (int j = i; j < m; ++j) constraints(row++, l) = l2_inner(phi_ui, u[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < m; ++j) {
      const auto h = gradient_pairing(phi, u[static_cast<std::size_t>(j)]);
      for (int i = 0; i < m; ++i) constraints(row++, l) = l2_inner(u[static_cast<std::size_t>(i)], h);
    }
  }

  Eigen::MatrixXd gram(count, count);
  for (int a = 0; a < count; ++a) {
    for (int b = 0; b < count; ++b) {
      gram(a, b) = l2_inner(candidates[static_cast<std::size_t>(a)], candidates[static_cast<std::size_t>(b)]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_es(gram);
  if (gram_es.eigenvalues().minCoeff() < 1e-12 * std::max(1.0, gram_es.eigenvalues().maxCoeff())) {
    throw Error(ErrorKind::InvalidInput, "admissible_subspace candidates are linearly dependent");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) >= cutoff) ++rank;
  }
  const int nullity = count - rank;
  if (nullity == 0) return {};
  const Eigen::MatrixXd null_basis = svd.matrixV().rightCols(nullity);

  // L2-orthonormalize within the null space: N (N^T G N)^{-1/2}
  const Eigen::MatrixXd reduced = null_basis.transpose() * gram * null_basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
  const Eigen::MatrixXd coeffs = null_basis * es.operatorInverseSqrt();

  std::vector<TrigPolynomial<Complex>> out;
  for (int k = 0; k < nullity; ++k) {
    TrigPolynomial<Complex> f(cluster.lattice);
    for (int l = 0; l < count; ++l) f += candidates[static_cast<std::size_t>(l)] * Complex(coeffs(l, k));
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace confspec
