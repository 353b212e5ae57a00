#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "confspec/kernels.hpp"
#include "confspec/lattice.hpp"
#include "confspec/parallel.hpp"
#include "confspec/trig_polynomial.hpp"

namespace confspec {

/// g_t = e^{phi t} g on the flat torus, sampled at the parameters t_grid.
struct DeformationPath {
  std::shared_ptr<const Lattice> lattice;
  TrigPolynomial<Complex> phi;
  std::vector<double> t_grid;  // ascending, symmetric, contains 0
};

/// Validates mean-zero phi and the symmetric grid.
DeformationPath make_path(const TrigPolynomial<Complex>& phi, std::vector<double> t_grid);

/// max |phi| over a fine sampling grid.
double sup_norm(const TrigPolynomial<Complex>& phi);

/// {0, +-h, ..., +-half_points h} with h = step / |phi|_inf.
std::vector<double> default_t_grid(const TrigPolynomial<Complex>& phi, double step = 0.02,
                                   int half_points = 3);

struct GalerkinConfig {
  double truncation_radius_sq = 0.0;
  int grid_points_per_axis = 0;
  int eig_count = 0;
  double convergence = 1e-8;
  Exec exec = Exec::Parallel;
};

/// R^2 = 12 q_k, N = max(32, 6 * max index), eig_count = k + m + 2.
GalerkinConfig default_config(const Lattice& lattice, double level_q, int index_k,
                              int multiplicity);

/// Replaces R^2 and raises N to max(32, 6 * max index) of the new basis.
void set_truncation_radius(GalerkinConfig& cfg, const Lattice& lattice, double radius_sq);

/// Plane waves with |w|^2 <= radius_sq, the constant first.
std::vector<Freq> truncation_basis(const Lattice& lattice, double radius_sq);

struct GalerkinSystem {
  double t = 0.0;
  std::vector<Freq> basis;
  kernels::Grid grid;
  Eigen::MatrixXcd stiffness;
  Eigen::MatrixXcd mass;
  double volume = 0.0;  // Vol(g_t) from the zero mode of the mass weight
};

GalerkinSystem assemble_galerkin(const DeformationPath& path, double t, const GalerkinConfig& cfg);

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXcd vector;  // M-normalized
};

/// The count smallest solutions of K x = lambda M x, ascending.
std::vector<Eigenpair> lowest_eigenpairs(const Eigen::MatrixXcd& stiffness,
                                         const Eigen::MatrixXcd& mass, int count);

/// Per-t solves over the path grid, in t order.
struct SweepPoint {
  GalerkinSystem system;
  std::vector<Eigenpair> pairs;
};
std::vector<SweepPoint> solve_sweep(const DeformationPath& path, const GalerkinConfig& cfg);

struct DerivativeFit {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
  double residual = 0.0;             // rms of the fit residuals
  std::vector<double> coefficients;  // ascending powers of t
};

/// Least-squares quartic through >= 5 samples on a symmetric grid.
DerivativeFit fit_derivatives(std::span<const double> t, std::span<const double> y);

struct BranchSample {
  double t = 0.0;
  double value = 0.0;
  Eigen::VectorXcd vector;
};

struct BranchCurve {
  int branch_id = 0;
  std::vector<BranchSample> samples;  // ascending t
  std::vector<double> overlap_trace;  // per sample; 1 at t = 0
  DerivativeFit fitted;
};

DerivativeFit fit_derivatives(const BranchCurve& curve);

struct BranchTracking {
  std::vector<BranchCurve> branches;
  std::vector<double> t;
  std::vector<double> lambda_k;  // sorted position k at each t
  std::vector<double> volume;
};

/// Follows the m eigenvalue branches that leave lambda_k at t = 0.
BranchTracking track_branches(const DeformationPath& path, const GalerkinConfig& cfg,
                              int index_k, int multiplicity);

/// Same as above on an already solved sweep.
BranchTracking track_branches(const std::vector<SweepPoint>& sweep, int index_k,
                              int multiplicity);

struct FunctionalSeries {
  std::vector<double> t;
  std::vector<double> lambda_bar;
  DerivativeFit fit;
  double lambda_bar0 = 0.0;
  double fitted_alpha = 0.0;
  double predicted_alpha = 0.0;
  double relative_gap = 0.0;
};

/// lambda_k(g_t) Vol(g_t)^{2/n} along the path; fitted alpha is its second
/// derivative at 0.
FunctionalSeries functional_series(const DeformationPath& path, const GalerkinConfig& cfg,
                                   int index_k, double predicted_alpha);
FunctionalSeries functional_series(const std::vector<SweepPoint>& sweep, int n, int index_k,
                                   double predicted_alpha);

/// lambda_k(g_t) Vol(g_t)^{2/n} at a single t.
double normalized_eigenvalue(const DeformationPath& path, const GalerkinConfig& cfg, int index_k,
                             double t);

struct VolumeSeries {
  std::vector<double> t;
  std::vector<double> volume;
  DerivativeFit fit;
  double predicted_second = 0.0;  // n^2/4 |phi|^2
};

VolumeSeries volume_series(const DeformationPath& path, const GalerkinConfig& cfg);
VolumeSeries volume_series(const DeformationPath& path, const std::vector<SweepPoint>& sweep);

/// max over the grid of |Delta_{g_t} u - Lambda u| for the eigenfunction u
/// reconstructed from the pair, with Delta_{g_t} applied through the
/// conformal transformation law rather than the Galerkin matrices.
double residual_check(const DeformationPath& path, const GalerkinSystem& system,
                      const Eigenpair& pair);

struct ConvergenceReport {
  std::vector<double> t;
  std::vector<double> max_relative_change;
  double tolerance = 0.0;
  bool passed = false;
};

/// Re-solves with twice the truncation radius and compares the cluster
/// eigenvalues at sorted positions [index_k, index_k + m).
ConvergenceReport doubling_test(const DeformationPath& path, const GalerkinConfig& cfg,
                                int index_k, int multiplicity);

}  // namespace confspec
