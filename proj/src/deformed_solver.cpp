#include "confspec/deformed_solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "confspec/errors.hpp"

namespace confspec {

namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;
constexpr double kOverlapThreshold = 0.9;
constexpr double kAmbiguityMargin = 0.05;

int max_index(const std::vector<Freq>& freqs) {
  int m = 0;
  for (const auto& c : freqs) {
    for (int v : c) m = std::max(m, std::abs(v));
  }
  return m;
}

kernels::PlaneWaveTerms terms_of(const TrigPolynomial<Complex>& f) {
  return {f.terms().begin(), f.terms().end()};
}

std::vector<Freq> support(const TrigPolynomial<Complex>& f) {
  std::vector<Freq> out;
  for (const auto& [c, v] : f.terms()) out.push_back(c);
  return out;
}

// rotate so the first dominant entry is real and positive
void fix_phase(Eigen::VectorXcd& x) {
  const double biggest = x.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > 0.5 * biggest) {
      x *= std::conj(x(i)) / std::abs(x(i));
      return;
    }
  }
}

Eigen::MatrixXcd cluster_columns(const SweepPoint& point, int index_k, int m) {
  Eigen::MatrixXcd v(point.pairs.front().vector.size(), m);
  for (int j = 0; j < m; ++j) v.col(j) = point.pairs[static_cast<std::size_t>(index_k + j)].vector;
  return v;
}

}  // namespace

DeformationPath make_path(const TrigPolynomial<Complex>& phi, std::vector<double> t_grid) {
  if (!phi.lattice_ptr()) throw Error(ErrorKind::InvalidInput, "deformation needs a lattice-bound phi");
  phi.require_hermitian();
  if (std::abs(integrate(phi)) > 1e-12) {
    throw Error(ErrorKind::InvalidInput, "deformation direction must have zero mean");
  }
  std::sort(t_grid.begin(), t_grid.end());
  if (t_grid.empty()) throw Error(ErrorKind::InvalidInput, "empty t grid");
  const double span = std::max(std::abs(t_grid.front()), std::abs(t_grid.back()));
  bool has_zero = false;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] == 0.0) has_zero = true;
    if (std::abs(t_grid[i] + t_grid[t_grid.size() - 1 - i]) > 1e-12 * std::max(span, 1e-300)) {
      throw Error(ErrorKind::InvalidInput, "t grid must be symmetric about 0");
    }
  }
  if (!has_zero) throw Error(ErrorKind::InvalidInput, "t grid must contain 0");
  return {phi.lattice_ptr(), phi, std::move(t_grid)};
}

double sup_norm(const TrigPolynomial<Complex>& phi) {
  if (phi.is_zero()) return 0.0;
  const kernels::Grid grid{phi.lattice().dimension(), std::max(64, 8 * max_index(support(phi)))};
  const auto values = kernels::sample_real(terms_of(phi), grid, Exec::Parallel);
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> default_t_grid(const TrigPolynomial<Complex>& phi, double step, int half_points) {
  const double norm = sup_norm(phi);
  const double h = norm > 0.0 ? step / norm : step;
  std::vector<double> grid;
  for (int i = -half_points; i <= half_points; ++i) grid.push_back(i * h);
  return grid;
}

std::vector<Freq> truncation_basis(const Lattice& lattice, double radius_sq) {
  std::vector<Freq> basis{kZeroFreq};
  for (const auto& w : enumerate_dual_vectors(lattice, radius_sq)) basis.push_back(w.coords);
  return basis;
}

void set_truncation_radius(GalerkinConfig& cfg, const Lattice& lattice, double radius_sq) {
  if (!(radius_sq > 0.0)) throw Error(ErrorKind::InvalidInput, "truncation radius must be positive");
  cfg.truncation_radius_sq = radius_sq;
  cfg.grid_points_per_axis = std::max(32, 6 * max_index(truncation_basis(lattice, radius_sq)));
}

GalerkinConfig default_config(const Lattice& lattice, double level_q, int index_k, int multiplicity) {
  GalerkinConfig cfg;
  set_truncation_radius(cfg, lattice, 12.0 * level_q);
  cfg.eig_count = index_k + multiplicity + 2;
  return cfg;
}

GalerkinSystem assemble_galerkin(const DeformationPath& path, double t, const GalerkinConfig& cfg) {
  const Lattice& lat = *path.lattice;
  const int n = lat.dimension();
  GalerkinSystem sys;
  sys.t = t;
  sys.basis = truncation_basis(lat, cfg.truncation_radius_sq);
  const int needed = 4 * max_index(sys.basis);
  if (cfg.grid_points_per_axis < std::max(needed, 1)) {
    throw Error(ErrorKind::InvalidInput, "grid_points_per_axis " + std::to_string(cfg.grid_points_per_axis) +
                                             " aliases the basis (need >= " + std::to_string(needed) + ")");
  }
  sys.grid = kernels::Grid{n, cfg.grid_points_per_axis};

  const double c_stiff = 0.5 * (n - 2) * t;
  const double c_mass = 0.5 * n * t;
  std::vector<Complex> w_stiff, w_mass;
  if (!path.phi.is_zero() && (c_stiff != 0.0 || c_mass != 0.0)) {
    const auto phi_s = kernels::sample_real(terms_of(path.phi), sys.grid, cfg.exec);
    if (c_stiff != 0.0) {
      w_stiff = kernels::forward_dft(kernels::exponentiate(phi_s, c_stiff, cfg.exec), sys.grid, cfg.exec);
    }
    if (c_mass != 0.0) {
      w_mass = kernels::forward_dft(kernels::exponentiate(phi_s, c_mass, cfg.exec), sys.grid, cfg.exec);
    }
  }
  auto mats = kernels::assemble(sys.basis, lat, w_stiff, w_mass, sys.grid, cfg.exec);
  sys.stiffness = 0.5 * (mats.stiffness + mats.stiffness.adjoint());
  sys.mass = 0.5 * (mats.mass + mats.mass.adjoint());
  sys.volume = lat.volume() * (w_mass.empty() ? 1.0 : w_mass.front().real());

  Eigen::LLT<Eigen::MatrixXcd> llt(sys.mass);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::DiscretizationFailure, "mass matrix is not positive definite at t = " + std::to_string(t));
  }
  return sys;
}

std::vector<Eigenpair> lowest_eigenpairs(const Eigen::MatrixXcd& stiffness, const Eigen::MatrixXcd& mass,
                                         int count) {
  if (stiffness.rows() != stiffness.cols() || mass.rows() != stiffness.rows() ||
      mass.cols() != stiffness.cols()) {
    throw Error(ErrorKind::InvalidInput, "stiffness and mass must be square and of equal size");
  }
  if (count < 1 || count > stiffness.rows()) {
    throw Error(ErrorKind::InvalidInput, "eigenpair count " + std::to_string(count) + " outside [1, " +
                                             std::to_string(stiffness.rows()) + "]");
  }
  // Eigen does not report a failed Cholesky factor of the mass matrix
  if (mass.llt().info() != Eigen::Success) {
    throw Error(ErrorKind::DiscretizationFailure, "mass matrix is not positive definite");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(stiffness, mass,
                                                                Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverNonConvergence, "generalized eigensolver did not converge");
  }
  std::vector<Eigenpair> out;
  for (int i = 0; i < count; ++i) {
    Eigenpair p{es.eigenvalues()(i), es.eigenvectors().col(i)};
    fix_phase(p.vector);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SweepPoint> solve_sweep(const DeformationPath& path, const GalerkinConfig& cfg) {
  const long long count = static_cast<long long>(path.t_grid.size());
  std::vector<SweepPoint> out(path.t_grid.size());
  std::vector<std::exception_ptr> failures(path.t_grid.size());

  auto solve = [&](long long i, const GalerkinConfig& local) {
    try {
      auto& point = out[static_cast<std::size_t>(i)];
      point.system = assemble_galerkin(path, path.t_grid[static_cast<std::size_t>(i)], local);
      point.pairs = lowest_eigenpairs(point.system.stiffness, point.system.mass,
                                      std::min<int>(local.eig_count, static_cast<int>(point.system.basis.size())));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };

  if (cfg.exec == Exec::Serial || count == 1) {
    for (long long i = 0; i < count; ++i) solve(i, cfg);
  } else {
    GalerkinConfig inner = cfg;
    inner.exec = Exec::Serial;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) solve(i, inner);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

DerivativeFit fit_derivatives(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw Error(ErrorKind::InvalidInput, "fit: t and y differ in length");
  if (t.size() < 5) throw Error(ErrorKind::FitQuality, "fit needs at least 5 samples");
  double span = 0.0;
  for (double v : t) span = std::max(span, std::abs(v));
  for (double v : t) {
    const bool mirrored = std::any_of(t.begin(), t.end(), [&](double u) { return std::abs(u + v) <= 1e-12 * span; });
    if (!mirrored) throw Error(ErrorKind::FitQuality, "fit samples are not symmetric about 0");
  }
  if (!(span > 1e-8) || !std::isfinite(span)) throw Error(ErrorKind::FitQuality, "fit t range is degenerate");

  const int rows = static_cast<int>(t.size());
  constexpr int kDegree = 4;
  Eigen::MatrixXd v(rows, kDegree + 1);
  Eigen::VectorXd rhs(rows);
  for (int i = 0; i < rows; ++i) {
    const double s = t[static_cast<std::size_t>(i)] / span;
    double p = 1.0;
    for (int d = 0; d <= kDegree; ++d, p *= s) v(i, d) = p;
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
  if (cond > 1e6) {
    throw Error(ErrorKind::FitQuality, "quartic fit is ill-conditioned (condition " + std::to_string(cond) + ")");
  }
  const Eigen::VectorXd b = v.colPivHouseholderQr().solve(rhs);
  DerivativeFit fit;
  for (int d = 0; d <= kDegree; ++d) fit.coefficients.push_back(b(d) / std::pow(span, d));
  fit.value = fit.coefficients[0];
  fit.first = fit.coefficients[1];
  fit.second = 2.0 * fit.coefficients[2];
  fit.residual = std::sqrt((v * b - rhs).squaredNorm() / rows);
  return fit;
}

DerivativeFit fit_derivatives(const BranchCurve& curve) {
  std::vector<double> t, y;
  for (const auto& s : curve.samples) {
    t.push_back(s.t);
    y.push_back(s.value);
  }
  return fit_derivatives(t, y);
}

BranchTracking track_branches(const DeformationPath& path, const GalerkinConfig& cfg, int index_k,
                              int multiplicity) {
  if (cfg.eig_count < index_k + multiplicity + 2) {
    throw Error(ErrorKind::InvalidInput, "eig_count must be at least k + m + 2");
  }
  return track_branches(solve_sweep(path, cfg), index_k, multiplicity);
}

BranchTracking track_branches(const std::vector<SweepPoint>& sweep, int index_k, int multiplicity) {
  const int m = multiplicity;
  const int count = static_cast<int>(sweep.size());
  if (m < 1 || index_k < 1) throw Error(ErrorKind::InvalidInput, "track_branches needs k >= 1 and m >= 1");
  int zero = -1;
  for (int i = 0; i < count; ++i) {
    if (static_cast<int>(sweep[static_cast<std::size_t>(i)].pairs.size()) < index_k + m) {
      throw Error(ErrorKind::InvalidInput, "sweep solved too few eigenpairs for the cluster");
    }
    if (sweep[static_cast<std::size_t>(i)].system.t == 0.0) zero = i;
  }
  if (zero < 0) throw Error(ErrorKind::InvalidInput, "sweep has no t = 0 sample");

  BranchTracking out;
  for (const auto& p : sweep) {
    out.t.push_back(p.system.t);
    out.lambda_k.push_back(p.pairs[static_cast<std::size_t>(index_k)].value);
    out.volume.push_back(p.system.volume);
  }

  // Reference basis at t = 0: the first deformed cluster projected back onto
  // the flat eigenspace, so each column starts on its own analytic branch.
  const auto& flat = sweep[static_cast<std::size_t>(zero)];
  const Eigen::MatrixXcd v0 = cluster_columns(flat, index_k, m);
  const Eigen::MatrixXcd& m0 = flat.system.mass;
  Eigen::MatrixXcd ref = v0;
  if (zero + 1 < count) {
    const Eigen::MatrixXcd x = cluster_columns(sweep[static_cast<std::size_t>(zero + 1)], index_k, m);
    ref = v0 * (v0.adjoint() * m0 * x);
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < j; ++i) ref.col(j) -= (ref.col(i).adjoint() * m0 * ref.col(j))(0, 0) * ref.col(i);
      const double norm = std::sqrt(std::abs((ref.col(j).adjoint() * m0 * ref.col(j))(0, 0)));
      if (norm < 1e-6) {
        throw Error(ErrorKind::BranchTrackingFailure, "deformed cluster does not project onto the flat eigenspace");
      }
      ref.col(j) /= norm;
    }
  }

  std::vector<std::vector<double>> values(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(count)));
  std::vector<std::vector<double>> overlaps = values;
  std::vector<std::vector<Eigen::VectorXcd>> vectors(static_cast<std::size_t>(m),
                                                     std::vector<Eigen::VectorXcd>(static_cast<std::size_t>(count)));
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXcd r = ref.col(j);
    fix_phase(r);
    values[static_cast<std::size_t>(j)][static_cast<std::size_t>(zero)] =
        (r.adjoint() * flat.system.stiffness * r)(0, 0).real();
    overlaps[static_cast<std::size_t>(j)][static_cast<std::size_t>(zero)] = 1.0;
    vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(zero)] = r;
  }

  for (int dir : {+1, -1}) {
    for (int i = zero + dir; i >= 0 && i < count; i += dir) {
      const auto& point = sweep[static_cast<std::size_t>(i)];
      const Eigen::MatrixXcd cand = cluster_columns(point, index_k, m);
      const Eigen::MatrixXcd prev_m = [&] {
        Eigen::MatrixXcd p(cand.rows(), m);
        for (int j = 0; j < m; ++j) p.col(j) = vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(i - dir)];
        return p;
      }();
      const Eigen::MatrixXcd inner = prev_m.adjoint() * point.system.mass * cand;
      std::vector<int> chosen;
      for (int j = 0; j < m; ++j) {
        int best = 0;
        for (int l = 1; l < m; ++l) {
          if (std::abs(inner(j, l)) > std::abs(inner(j, best))) best = l;
        }
        const double top = std::abs(inner(j, best));
        for (int l = 0; l < m; ++l) {
          if (l != best && std::abs(inner(j, l)) > top - kAmbiguityMargin) {
            throw TrackingAmbiguous(point.system.t, "branch " + std::to_string(j) + " has two candidates with overlaps " +
                                                        std::to_string(top) + " and " + std::to_string(std::abs(inner(j, l))));
          }
        }
        if (top < kOverlapThreshold) {
          throw Error(ErrorKind::BranchTrackingFailure, "branch " + std::to_string(j) + " overlap " + std::to_string(top) +
                                                            " below threshold at t = " + std::to_string(point.system.t));
        }
        if (std::find(chosen.begin(), chosen.end(), best) != chosen.end()) {
          throw TrackingAmbiguous(point.system.t, "two branches claim the same eigenvector");
        }
        chosen.push_back(best);
        Eigen::VectorXcd x = cand.col(best);
        const Complex phase = inner(j, best);
        x *= std::conj(phase) / std::abs(phase);
        values[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
            point.pairs[static_cast<std::size_t>(index_k + best)].value;
        overlaps[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = top;
        vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = std::move(x);
      }
    }
  }

  for (int j = 0; j < m; ++j) {
    BranchCurve curve;
    curve.branch_id = j;
    for (int i = 0; i < count; ++i) {
      curve.samples.push_back({out.t[static_cast<std::size_t>(i)], values[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)],
                               vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]});
    }
    curve.overlap_trace = overlaps[static_cast<std::size_t>(j)];
    if (count >= 5) curve.fitted = fit_derivatives(curve);
    out.branches.push_back(std::move(curve));
  }
  return out;
}

FunctionalSeries functional_series(const std::vector<SweepPoint>& sweep, int n, int index_k,
                                   double predicted_alpha) {
  FunctionalSeries out;
  for (const auto& p : sweep) {
    if (static_cast<int>(p.pairs.size()) <= index_k) {
      throw Error(ErrorKind::InvalidInput, "sweep solved too few eigenpairs for level k");
    }
    out.t.push_back(p.system.t);
    out.lambda_bar.push_back(p.pairs[static_cast<std::size_t>(index_k)].value * std::pow(p.system.volume, 2.0 / n));
  }
  out.fit = fit_derivatives(out.t, out.lambda_bar);
  out.lambda_bar0 = out.fit.value;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    if (out.t[i] == 0.0) out.lambda_bar0 = out.lambda_bar[i];
  }
  out.fitted_alpha = out.fit.second;
  out.predicted_alpha = predicted_alpha;
  const double gap = std::abs(out.fitted_alpha - predicted_alpha);
  out.relative_gap = predicted_alpha != 0.0 ? gap / std::abs(predicted_alpha) : gap;
  return out;
}

FunctionalSeries functional_series(const DeformationPath& path, const GalerkinConfig& cfg, int index_k,
                                   double predicted_alpha) {
  return functional_series(solve_sweep(path, cfg), path.lattice->dimension(), index_k, predicted_alpha);
}

double normalized_eigenvalue(const DeformationPath& path, const GalerkinConfig& cfg, int index_k, double t) {
  const auto sys = assemble_galerkin(path, t, cfg);
  const auto pairs = lowest_eigenpairs(sys.stiffness, sys.mass, index_k + 1);
  return pairs.back().value * std::pow(sys.volume, 2.0 / path.lattice->dimension());
}

VolumeSeries volume_series(const DeformationPath& path, const std::vector<SweepPoint>& sweep) {
  VolumeSeries out;
  const int n = path.lattice->dimension();
  for (const auto& p : sweep) {
    out.t.push_back(p.system.t);
    out.volume.push_back(p.system.volume);
  }
  out.fit = fit_derivatives(out.t, out.volume);
  out.predicted_second = 0.25 * n * n * l2_inner(path.phi, path.phi);
  return out;
}

VolumeSeries volume_series(const DeformationPath& path, const GalerkinConfig& cfg) {
  VolumeSeries out;
  const int n = path.lattice->dimension();
  for (double t : path.t_grid) {
    out.t.push_back(t);
    out.volume.push_back(assemble_galerkin(path, t, cfg).volume);
  }
  out.fit = fit_derivatives(out.t, out.volume);
  out.predicted_second = 0.25 * n * n * l2_inner(path.phi, path.phi);
  return out;
}

double residual_check(const DeformationPath& path, const GalerkinSystem& system, const Eigenpair& pair) {
  const Lattice& lat = *path.lattice;
  const int n = lat.dimension();
  const double t = system.t;
  const double norm = 1.0 / std::sqrt(lat.volume());
  if (pair.vector.size() != static_cast<Eigen::Index>(system.basis.size())) {
    throw Error(ErrorKind::InvalidInput, "eigenpair does not match the Galerkin basis");
  }

  kernels::PlaneWaveTerms u_terms, lap_terms;
  std::map<Freq, Complex> pairing;
  for (std::size_t a = 0; a < system.basis.size(); ++a) {
    const Freq& ca = system.basis[a];
    const Complex xa = pair.vector(static_cast<Eigen::Index>(a)) * norm;
    u_terms.emplace_back(ca, xa);
    lap_terms.emplace_back(ca, kFourPiSq * lat.normsq(ca) * xa);
    for (const auto& [cb, fb] : path.phi.terms()) pairing[ca + cb] += -kFourPiSq * lat.dot(ca, cb) * fb * xa;
  }
  const kernels::PlaneWaveTerms g_terms(pairing.begin(), pairing.end());

  const auto u = kernels::sample_plane_waves(u_terms, system.grid, Exec::Parallel);
  const auto lap = kernels::sample_plane_waves(lap_terms, system.grid, Exec::Parallel);
  const auto g = kernels::sample_plane_waves(g_terms, system.grid, Exec::Parallel);
  const auto phi = kernels::sample_real(terms_of(path.phi), system.grid, Exec::Parallel);

  double worst = 0.0;
  const double drift = 0.5 * (n - 2) * t;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Complex deformed = std::exp(-phi[i] * t) * (lap[i] - drift * g[i]);
    worst = std::max(worst, std::abs(deformed - pair.value * u[i]));
  }
  return worst;
}

ConvergenceReport doubling_test(const DeformationPath& path, const GalerkinConfig& cfg, int index_k,
                                int multiplicity) {
  GalerkinConfig fine = cfg;
  set_truncation_radius(fine, *path.lattice, 2.0 * cfg.truncation_radius_sq);
  fine.grid_points_per_axis = std::max(fine.grid_points_per_axis, cfg.grid_points_per_axis);
  const auto coarse_sweep = solve_sweep(path, cfg);
  const auto fine_sweep = solve_sweep(path, fine);

  ConvergenceReport out;
  out.tolerance = cfg.convergence;
  out.passed = true;
  for (std::size_t i = 0; i < coarse_sweep.size(); ++i) {
    double worst = 0.0;
    for (int j = index_k; j < index_k + multiplicity; ++j) {
      const double a = coarse_sweep[i].pairs.at(static_cast<std::size_t>(j)).value;
      const double b = fine_sweep[i].pairs.at(static_cast<std::size_t>(j)).value;
      worst = std::max(worst, std::abs(b - a) / std::abs(a));
    }
    out.t.push_back(coarse_sweep[i].system.t);
    out.max_relative_change.push_back(worst);
    if (!(worst < cfg.convergence)) out.passed = false;
  }
  return out;
}

}  // namespace confspec
