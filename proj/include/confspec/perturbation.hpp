#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "confspec/lattice.hpp"
#include "confspec/trig_polynomial.hpp"

namespace confspec {

/// Admissibility residuals are roundoff-sized for exact trig inputs.
inline constexpr double kAdmissibilityTolerance = 1e-10;
inline constexpr double kMeanTolerance = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-10;

template <class S>
struct SquareMatrix {
  int size = 0;
  std::vector<S> entries;  // row-major

  SquareMatrix() = default;
  explicit SquareMatrix(int n) : size(n), entries(static_cast<std::size_t>(n * n), S(0)) {}

  S& operator()(int i, int j) { return entries[static_cast<std::size_t>(i * size + j)]; }
  const S& operator()(int i, int j) const { return entries[static_cast<std::size_t>(i * size + j)]; }

  /// Real parts as doubles, scaled to absolute units.
  Eigen::MatrixXd to_eigen(double scale = 1.0) const {
    Eigen::MatrixXd out(size, size);
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) out(i, j) = scale * Arith<S>::to_double((*this)(i, j));
    }
    return out;
  }
};

/// The eigenspace E_k of one flat spectrum level together with an
/// L2-orthonormal basis {u_j}.
template <class S>
struct EigenspaceCluster {
  std::shared_ptr<const Lattice> lattice;
  SpectrumLevel level;
  S q{0};           // |w|^2 of the level, exact in exact mode
  int index_k = 0;  // position of lambda_k in the spectrum counted with multiplicity
  int multiplicity = 0;
  std::vector<TrigPolynomial<S>> basis;
  bool gap_ok = false;

  /// lambda_k in the scalar mode's eigenvalue unit.
  S eigenvalue() const { return Arith<S>::spectral_unit() * q; }
  double eigenvalue_abs() const { return Arith<S>::to_double(eigenvalue()) * Arith<S>::unit_value; }
  int dimension() const { return lattice->dimension(); }
};

/// Cluster for the level_index-th nonzero level, with basis ordered
/// sin, cos per frequency pair (amplitude sqrt(2/Vol)).
template <class S>
EigenspaceCluster<S> make_cluster(std::shared_ptr<const Lattice> lattice, int level_index);

/// Same eigenspace, different basis. The new basis must be orthonormal and
/// made of lambda_k-eigenfunctions.
template <class S>
EigenspaceCluster<S> with_basis(const EigenspaceCluster<S>& cluster,
                                std::vector<TrigPolynomial<S>> basis);

/// u'_j = sum_i Q_ij u_i for an orthogonal m x m matrix Q.
EigenspaceCluster<Complex> rotate_basis(const EigenspaceCluster<Complex>& cluster,
                                        const Eigen::MatrixXd& q);

struct AdmissibilityResiduals {
  double mean = 0.0;
  double residual_mass = 0.0;  // max |int phi u_i u_j|
  double residual_grad = 0.0;  // max |int u_i g(grad phi, grad u_j)|, all ordered pairs
};

template <class S>
struct AdmissibleDirection {
  TrigPolynomial<S> phi;
  double residual_mass = 0.0;
  double residual_grad = 0.0;
};

template <class S>
AdmissibilityResiduals admissibility_residuals(const TrigPolynomial<S>& phi,
                                               const EigenspaceCluster<S>& cluster);

/// Throws NotAdmissible when phi has nonzero mean or violates either
/// orthogonality condition beyond tolerance.
template <class S>
AdmissibleDirection<S> check_admissible(const TrigPolynomial<S>& phi,
                                        const EigenspaceCluster<S>& cluster);

/// L2-orthonormal basis of the admissible part of span(candidates).
std::vector<TrigPolynomial<Complex>> admissible_subspace(
    const std::vector<TrigPolynomial<Complex>>& candidates,
    const EigenspaceCluster<Complex>& cluster);

/// P_ij = <u_i, -lambda_k phi u_j - (n-2)/2 g(grad phi, grad u_j)>. Runs on
/// any phi so that inadmissible directions can be diagnosed.
template <class S>
SquareMatrix<S> first_variation_matrix(const TrigPolynomial<S>& phi,
                                       const EigenspaceCluster<S>& cluster);

/// Off-eigenspace part of the first-order eigenfunction change of u_j,
/// with the gauge Pi_k(u_j') = 0. level_cutoff > 0 asserts that every
/// contributing shell lies within the first level_cutoff levels.
template <class S>
TrigPolynomial<S> eigenfunction_correction(const TrigPolynomial<S>& phi,
                                           const EigenspaceCluster<S>& cluster, int j,
                                           int level_cutoff = 0);

/// The second-variation operator S_{k,phi} applied to u in E_k. All level
/// sums run over the finitely many shells met by the intermediate products.
template <class S>
TrigPolynomial<S> s_apply(const TrigPolynomial<S>& phi, const EigenspaceCluster<S>& cluster,
                          const TrigPolynomial<S>& u);

template <class S>
struct TMatrix {
  SquareMatrix<S> matrix;          // symmetrized <u_i, S(u_j)>, mode units
  double asymmetry = 0.0;          // before symmetrization, absolute units
  std::vector<double> eigenvalues;  // ascending, absolute units
  /// Exact ascending eigenvalues, available when the matrix is diagonal.
  std::optional<std::vector<S>> exact_eigenvalues;
};

template <class S>
TMatrix<S> t_matrix(const TrigPolynomial<S>& phi, const EigenspaceCluster<S>& cluster);

template <class S>
struct PerturbationReport {
  int n = 0;
  int index_k = 0;
  int multiplicity = 0;
  double lambda_k = 0.0;
  SquareMatrix<S> p_matrix;
  SquareMatrix<S> t_matrix;
  std::vector<double> lambda_ddot;
  double mu = 0.0;
  double alpha = 0.0;
  double volume = 0.0;
  double phi_normsq = 0.0;
  double residual_mass = 0.0;
  double residual_grad = 0.0;
  /// mu * Vol + (n lambda_k / 2) |phi|^2 in mode units, exact when mu is.
  std::optional<S> alpha_bracket;
  std::optional<S> mu_exact;
};

/// Full second-variation report for an admissible phi.
template <class S>
PerturbationReport<S> second_variation_alpha(const TrigPolynomial<S>& phi,
                                             const EigenspaceCluster<S>& cluster);

/// alpha = (mu Vol + (n lambda_k / 2) |phi|^2) Vol^{(2-n)/n}.
double alpha_from_parts(int n, double lambda_k, double mu, double volume, double phi_normsq);

}  // namespace confspec

#include "confspec/perturbation_impl.hpp"
