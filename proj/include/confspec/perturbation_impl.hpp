#pragma once

// Template definitions for perturbation.hpp.

#include <algorithm>
#include <cmath>
#include <string>

namespace confspec {

namespace detail {

template <class S>
bool exceeds(const S& value, double tolerance) {
  if constexpr (Arith<S>::exact) {
    return !value.is_zero();
  } else {
    return std::abs(value) > tolerance;
  }
}

/// Component of f orthogonal to span(basis).
template <class S>
TrigPolynomial<S> off_span(const TrigPolynomial<S>& f, const std::vector<TrigPolynomial<S>>& basis) {
  TrigPolynomial<S> rest = f;
  for (const auto& u : basis) rest -= u * l2_inner_exact(u, f);
  return rest;
}

}  // namespace detail

template <class S>
EigenspaceCluster<S> make_cluster(std::shared_ptr<const Lattice> lattice, int level_index) {
  using A = Arith<S>;
  if (level_index < 1) throw Error(ErrorKind::InvalidInput, "level index k must be >= 1");
  const auto levels = flat_spectrum(*lattice, level_index + 1);
  EigenspaceCluster<S> out;
  out.lattice = lattice;
  out.level = levels[static_cast<std::size_t>(level_index - 1)];
  out.index_k = 1;
  for (int l = 0; l + 1 < level_index; ++l) out.index_k += levels[static_cast<std::size_t>(l)].multiplicity;
  out.multiplicity = out.level.multiplicity;
  const double below = level_index >= 2 ? levels[static_cast<std::size_t>(level_index - 2)].q : 0.0;
  const double above = levels[static_cast<std::size_t>(level_index)].q;
  out.gap_ok = below < out.level.q && !same_shell(below, out.level.q) && out.level.q < above &&
               !same_shell(out.level.q, above);

  out.q = A::normsq(*lattice, out.level.frequency_pairs.front().coords);
  const S amplitude = A::wave_amplitude(*lattice);
  for (const auto& pair : out.level.frequency_pairs) {
    if (!A::same_shell(A::normsq(*lattice, pair.coords), out.q)) {
      throw Error(ErrorKind::InternalConsistency, "level groups frequencies of different exact norm");
    }
    out.basis.push_back(TrigPolynomial<S>::sin_wave(lattice, pair.coords, amplitude));
    out.basis.push_back(TrigPolynomial<S>::cos_wave(lattice, pair.coords, amplitude));
  }
  return out;
}

template <class S>
EigenspaceCluster<S> with_basis(const EigenspaceCluster<S>& cluster,
                                std::vector<TrigPolynomial<S>> basis) {
  if (static_cast<int>(basis.size()) != cluster.multiplicity) {
    throw Error(ErrorKind::InvalidInput, "basis size differs from the eigenspace dimension");
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    basis[i].require_hermitian();
    const double eigen_gap = max_coefficient_gap(laplacian(basis[i]), basis[i] * cluster.eigenvalue());
    const double eigen_tol = Arith<S>::exact ? 0.0 : 1e-10 * std::max(1.0, cluster.eigenvalue_abs());
    if (eigen_gap > eigen_tol) {
      throw Error(ErrorKind::NotInEigenspace, "basis function is not a lambda_k eigenfunction");
    }
    for (std::size_t j = 0; j <= i; ++j) {
      const S g = l2_inner_exact(basis[i], basis[j]) - S(i == j ? 1 : 0);
      if (detail::exceeds(g, 1e-12)) {
        throw Error(ErrorKind::InvalidInput, "basis is not L2-orthonormal");
      }
    }
  }
  EigenspaceCluster<S> out = cluster;
  out.basis = std::move(basis);
  return out;
}

template <class S>
AdmissibilityResiduals admissibility_residuals(const TrigPolynomial<S>& phi,
                                               const EigenspaceCluster<S>& cluster) {
  AdmissibilityResiduals r;
  r.mean = integrate(phi);
  const auto& u = cluster.basis;
  const std::size_t m = u.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto phi_ui = multiply(phi, u[i]);
    for (std::size_t j = i; j < m; ++j) {
      r.residual_mass = std::max(r.residual_mass, std::abs(l2_inner(phi_ui, u[j])));
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto h = gradient_pairing(phi, u[j]);
    for (std::size_t i = 0; i < m; ++i) {
      r.residual_grad = std::max(r.residual_grad, std::abs(l2_inner(u[i], h)));
    }
  }
  return r;
}

template <class S>
AdmissibleDirection<S> check_admissible(const TrigPolynomial<S>& phi,
                                        const EigenspaceCluster<S>& cluster) {
  if (!cluster.gap_ok) throw Error(ErrorKind::InvalidInput, "eigenspace cluster lacks a spectral gap");
  const auto r = admissibility_residuals(phi, cluster);
  const bool exact = Arith<S>::exact;
  const double mean_tol = exact ? 0.0 : kMeanTolerance;
  const double tol = exact ? 0.0 : kAdmissibilityTolerance;
  if (std::abs(r.mean) > mean_tol) {
    throw NotAdmissible("phi has nonzero mean " + std::to_string(r.mean), r.mean, r.residual_mass,
                        r.residual_grad);
  }
  if (r.residual_mass > tol || r.residual_grad > tol) {
    throw NotAdmissible("orthogonality residuals (mass " + std::to_string(r.residual_mass) +
                            ", gradient " + std::to_string(r.residual_grad) + ") exceed tolerance",
                        r.mean, r.residual_mass, r.residual_grad);
  }
  return AdmissibleDirection<S>{phi, r.residual_mass, r.residual_grad};
}

template <class S>
SquareMatrix<S> first_variation_matrix(const TrigPolynomial<S>& phi,
                                       const EigenspaceCluster<S>& cluster) {
  const int m = cluster.multiplicity;
  const int n = cluster.dimension();
  const S lambda = cluster.eigenvalue();
  const S half_n_minus_2 = Arith<S>::from_ratio(n - 2, 2);
  SquareMatrix<S> p(m);
  for (int j = 0; j < m; ++j) {
    const auto& uj = cluster.basis[static_cast<std::size_t>(j)];
    const auto v = multiply(phi, uj) * (S(0) - lambda) - gradient_pairing(phi, uj) * half_n_minus_2;
    for (int i = 0; i < m; ++i) p(i, j) = l2_inner_exact(cluster.basis[static_cast<std::size_t>(i)], v);
  }
  return p;
}

template <class S>
TrigPolynomial<S> eigenfunction_correction(const TrigPolynomial<S>& phi,
                                           const EigenspaceCluster<S>& cluster, int j,
                                           int level_cutoff) {
  using A = Arith<S>;
  if (j < 0 || j >= cluster.multiplicity) throw Error(ErrorKind::InvalidInput, "basis index out of range");
  const auto& uj = cluster.basis[static_cast<std::size_t>(j)];
  const S lambda = cluster.eigenvalue();
  const S half_n_minus_2 = A::from_ratio(cluster.dimension() - 2, 2);
  const auto phi_u = multiply(phi, uj);
  const auto grad = gradient_pairing(phi, uj);

  std::vector<S> shells = support_shells(phi_u);
  for (const auto& q : support_shells(grad)) {
    if (std::none_of(shells.begin(), shells.end(), [&](const S& s) { return A::same_shell(s, q); })) {
      shells.push_back(q);
    }
  }
  double cutoff_q = 0.0;
  if (level_cutoff > 0) cutoff_q = flat_spectrum(*cluster.lattice, level_cutoff).back().q;

  TrigPolynomial<S> out(phi.lattice_ptr());
  for (const auto& q : shells) {
    const auto source = project_shell(phi_u, q) * lambda + project_shell(grad, q) * half_n_minus_2;
    if (A::same_shell(q, cluster.q)) {
      if (max_coefficient_gap(source, TrigPolynomial<S>(phi.lattice_ptr())) >
          (A::exact ? 0.0 : kAdmissibilityTolerance)) {
        throw Error(ErrorKind::InternalConsistency,
                    "eigenfunction correction reaches the lambda_k eigenspace");
      }
      continue;
    }
    if (level_cutoff > 0 && A::to_double(q) > cutoff_q * (1.0 + kShellTolerance)) {
      throw Error(ErrorKind::InternalConsistency,
                  "correction support extends beyond level " + std::to_string(level_cutoff));
    }
    const S lambda_i = A::spectral_unit() * q;
    out += source * (S(1) / (lambda_i - lambda));
  }
  return out;
}

template <class S>
TrigPolynomial<S> s_apply(const TrigPolynomial<S>& phi, const EigenspaceCluster<S>& cluster,
                          const TrigPolynomial<S>& u) {
  using A = Arith<S>;
  const auto rest = detail::off_span(u, cluster.basis);
  if (max_coefficient_gap(rest, TrigPolynomial<S>(u.lattice_ptr())) > (A::exact ? 0.0 : 1e-10)) {
    throw Error(ErrorKind::NotInEigenspace, "s_apply input is not in the eigenspace");
  }
  const S lambda = cluster.eigenvalue();
  const S a = S(cluster.dimension() - 2);

  const auto phi_u = multiply(phi, u);
  const auto grad = gradient_pairing(phi, u);
  // lambda_k phi^2 u + (n-2) phi g(grad phi, grad u)
  TrigPolynomial<S> out = multiply(phi, phi_u) * lambda + multiply(phi, grad) * a;

  for (const auto& q : support_shells(phi_u)) {
    if (A::same_shell(q, cluster.q)) continue;
    const S lambda_i = A::spectral_unit() * q;
    const S inv_gap = S(1) / (lambda_i - lambda);
    const auto proj = project_shell(phi_u, q);
    out -= multiply(phi, proj) * (S(2) * lambda_i * lambda * inv_gap);
    out -= gradient_pairing(phi, proj) * (a * lambda * inv_gap);
  }
  for (const auto& q : support_shells(grad)) {
    if (A::same_shell(q, cluster.q)) continue;
    const S lambda_i = A::spectral_unit() * q;
    const S inv_gap = S(1) / (lambda_i - lambda);
    const auto proj = project_shell(grad, q);
    out -= multiply(phi, proj) * (a * lambda_i * inv_gap);
    out -= gradient_pairing(phi, proj) * (a * a * A::from_ratio(1, 2) * inv_gap);
  }
  return out;
}

template <class S>
TMatrix<S> t_matrix(const TrigPolynomial<S>& phi, const EigenspaceCluster<S>& cluster) {
  using A = Arith<S>;
  check_admissible(phi, cluster);
  const int m = cluster.multiplicity;
  SquareMatrix<S> raw(m);
  for (int j = 0; j < m; ++j) {
    const auto su = s_apply(phi, cluster, cluster.basis[static_cast<std::size_t>(j)]);
    for (int i = 0; i < m; ++i) raw(i, j) = l2_inner_exact(cluster.basis[static_cast<std::size_t>(i)], su);
  }
  TMatrix<S> out;
  out.matrix = SquareMatrix<S>(m);
  double scale = 1.0;
  bool diagonal = true;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const S diff = raw(i, j) - raw(j, i);
      out.asymmetry = std::max(out.asymmetry, A::magnitude(diff) * A::unit_value);
      scale = std::max(scale, A::magnitude(raw(i, j)) * A::unit_value);
      out.matrix(i, j) = (raw(i, j) + raw(j, i)) * A::from_ratio(1, 2);
      if (i != j && !A::negligible(out.matrix(i, j))) diagonal = false;
    }
  }
  const bool asymmetric = A::exact ? out.asymmetry > 0.0 : out.asymmetry > kSymmetryTolerance * scale;
  if (asymmetric) {
    throw Error(ErrorKind::NumericalInconsistency,
                "T matrix asymmetry " + std::to_string(out.asymmetry) + " above tolerance");
  }
  if (A::exact && diagonal) {
    std::vector<S> ev;
    for (int i = 0; i < m; ++i) ev.push_back(out.matrix(i, i));
    std::sort(ev.begin(), ev.end(), [](const S& x, const S& y) { return A::to_double(x) < A::to_double(y); });
    for (const auto& v : ev) out.eigenvalues.push_back(A::to_double(v) * A::unit_value);
    out.exact_eigenvalues = std::move(ev);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.matrix.to_eigen(A::unit_value),
                                                      Eigen::EigenvaluesOnly);
    for (int i = 0; i < m; ++i) out.eigenvalues.push_back(es.eigenvalues()(i));
  }
  return out;
}

template <class S>
PerturbationReport<S> second_variation_alpha(const TrigPolynomial<S>& phi,
                                             const EigenspaceCluster<S>& cluster) {
  using A = Arith<S>;
  const auto direction = check_admissible(phi, cluster);
  PerturbationReport<S> report;
  const int n = cluster.dimension();
  report.n = n;
  report.index_k = cluster.index_k;
  report.multiplicity = cluster.multiplicity;
  report.lambda_k = cluster.eigenvalue_abs();
  report.residual_mass = direction.residual_mass;
  report.residual_grad = direction.residual_grad;
  report.p_matrix = first_variation_matrix(phi, cluster);
  auto t = t_matrix(phi, cluster);
  report.t_matrix = t.matrix;
  report.lambda_ddot = t.eigenvalues;
  report.mu = t.eigenvalues.front();
  report.volume = phi.lattice().volume();
  const S normsq = l2_inner_exact(phi, phi);
  report.phi_normsq = A::to_double(normsq);
  if (t.exact_eigenvalues) {
    const S mu = t.exact_eigenvalues->front();
    const S bracket = mu * A::volume(phi.lattice()) +
                      A::from_ratio(n, 2) * cluster.eigenvalue() * normsq;
    report.mu_exact = mu;
    report.alpha_bracket = bracket;
    report.alpha = A::to_double(bracket) * A::unit_value * std::pow(report.volume, (2.0 - n) / n);
  } else {
    report.alpha = alpha_from_parts(n, report.lambda_k, report.mu, report.volume, report.phi_normsq);
  }
  return report;
}

}  // namespace confspec
