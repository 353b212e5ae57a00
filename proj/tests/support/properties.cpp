#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "confspec/casework.hpp"
#include "confspec/perturbation.hpp"
#include "generators.hpp"

namespace confspec::testing {

std::string PropertyResult::summary() const {
  std::ostringstream os;
  os << name << ": " << instances << " instances, " << failures << " failures, worst " << worst
     << " (tol " << tolerance << ")";
  if (!first_failure.empty()) os << "; first failure: " << first_failure;
  return os.str();
}

namespace {

using Check = std::function<double(Rng&, int)>;  // returns the error measure of one instance

PropertyResult run(const std::string& name, std::uint64_t seed, int count, double tol,
                   const Check& check) {
  PropertyResult r;
  r.name = name;
  r.tolerance = tol;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    ++r.instances;
    double err = 0.0;
    std::string what;
    try {
      err = check(rng, i);
    } catch (const std::exception& e) {
      err = std::numeric_limits<double>::infinity();
      what = e.what();
    }
    r.worst = std::max(r.worst, err);
    if (!(err < tol)) {
      ++r.failures;
      if (r.first_failure.empty()) {
        std::ostringstream os;
        os << "instance " << i << " error " << err << (what.empty() ? "" : " (" + what + ")");
        r.first_failure = os.str();
      }
    }
  }
  return r;
}

double coeff_norm(const TrigPolynomial<Complex>& f) {
  double s = 0.0;
  for (const auto& [c, v] : f.terms()) s += std::norm(v);
  return std::sqrt(s);
}

double relative_gap(const TrigPolynomial<Complex>& f, const TrigPolynomial<Complex>& h) {
  return max_coefficient_gap(f, h) / std::max({coeff_norm(f), coeff_norm(h), 1e-300});
}

/// Mean-zero admissible phi for the cluster: random combination of the
/// admissible part of a few random sine/cosine waves.
TrigPolynomial<Complex> random_admissible_phi(Rng& rng, const EigenspaceCluster<Complex>& cluster) {
  const auto& lat = cluster.lattice;
  const int n = lat->dimension();
  for (;;) {
    std::set<Freq> seen;
    std::vector<TrigPolynomial<Complex>> candidates;
    const int waves = rng.integer(2, 5);
    for (int i = 0; i < waves; ++i) {
      Freq c = random_freq(rng, n, 2);
      if (c == kZeroFreq) continue;
      if (!is_pair_representative(c)) c = -c;
      if (!seen.insert(c).second) continue;
      candidates.push_back(TrigPolynomial<Complex>::sin_wave(lat, c, 1.0));
      candidates.push_back(TrigPolynomial<Complex>::cos_wave(lat, c, 1.0));
    }
    if (candidates.empty()) continue;
    const auto basis = admissible_subspace(candidates, cluster);
    if (basis.empty()) continue;
    TrigPolynomial<Complex> phi(lat);
    for (const auto& b : basis) phi += b * Complex(rng.normal());
    if (!phi.is_zero()) return phi;
  }
}

/// Cluster drawn either from a random lattice with a unique shortest dual
/// vector (m = 2) or from a symmetric lattice with a larger eigenspace.
EigenspaceCluster<Complex> random_cluster(Rng& rng) {
  switch (rng.integer(0, 5)) {
    case 0:
      return make_cluster<Complex>(std::make_shared<const Lattice>(Lattice::identity(2)), 1);
    case 1:
      return make_cluster<Complex>(std::make_shared<const Lattice>(Lattice::identity(3)), 1);
    case 2:
      return make_cluster<Complex>(
          std::make_shared<const Lattice>(Lattice::ab(0.5, std::sqrt(3.0) / 2.0)), 1);
    case 3:
      return make_cluster<Complex>(std::make_shared<const Lattice>(Lattice::diagonal({1, 1, 2})), 2);
    default:
      return make_cluster<Complex>(random_applicable_lattice(rng, rng.integer(2, 4), false), 1);
  }
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

PropertyResult property_multiply_algebra(std::uint64_t seed, int count) {
  return run("multiply commutative and associative", seed, count, 1e-12, [](Rng& rng, int) {
    auto lat = random_real_lattice(rng, rng.integer(2, 4));
    const auto f = random_trig(rng, lat, 3, 2);
    const auto g = random_trig(rng, lat, 3, 2);
    const auto h = random_trig(rng, lat, 3, 2);
    const double comm = relative_gap(multiply(f, g), multiply(g, f));
    const double assoc = relative_gap(multiply(multiply(f, g), h), multiply(f, multiply(g, h)));
    return std::max(comm, assoc);
  });
}

PropertyResult property_integration_by_parts(std::uint64_t seed, int count) {
  return run("integration by parts", seed, count, 1e-10, [](Rng& rng, int) {
    auto lat = random_real_lattice(rng, rng.integer(2, 4));
    const auto f = random_trig(rng, lat, 5, 3);
    const auto h = random_trig(rng, lat, 5, 3);
    const auto lap_h = laplacian(h);
    const double lhs = integrate(gradient_pairing(f, h));
    const double rhs = integrate(multiply(f, lap_h));
    // scale: the integral of |f| |Delta h| summed mode by mode
    double scale = 0.0;
    for (const auto& [c, v] : f.terms()) scale += std::abs(v) * std::abs(lap_h.coefficient(-c));
    scale *= lat->volume();
    return std::abs(lhs - rhs) / std::max(scale, 1e-300);
  });
}

PropertyResult property_integration_by_parts_exact(std::uint64_t seed, int count) {
  return run("integration by parts (exact)", seed, count, 0.5, [](Rng& rng, int) {
    auto lat = random_rational_lattice(rng, rng.integer(2, 3));
    const auto f = random_trig_exact(rng, lat, 3, 2);
    const auto h = random_trig_exact(rng, lat, 3, 2);
    const bool equal = integrate_exact(gradient_pairing(f, h)) == integrate_exact(multiply(f, laplacian(h)));
    return equal ? 0.0 : 1.0;
  });
}

PropertyResult property_projection(std::uint64_t seed, int count) {
  return run("projection idempotent and self-adjoint", seed, count, 1e-12, [](Rng& rng, int) {
    auto lat = random_real_lattice(rng, rng.integer(2, 3));
    const auto levels = flat_spectrum(*lat, 6);
    SpectrumLevel level;  // index 0 is the constant level
    const int pick = rng.integer(0, static_cast<int>(levels.size()));
    if (pick > 0) level = levels[static_cast<std::size_t>(pick - 1)];
    const auto f = random_trig(rng, lat, 8, 2);
    const auto h = random_trig(rng, lat, 8, 2);
    const auto pf = project(f, level);
    const auto ph = project(h, level);
    const double idem = max_coefficient_gap(project(pf, level), pf) / std::max(coeff_norm(f), 1e-300);
    const double scale = std::sqrt(l2_inner(f, f) * l2_inner(h, h));
    const double adj = std::abs(l2_inner(pf, h) - l2_inner(f, ph)) / std::max(scale, 1e-300);
    return std::max(idem, adj);
  });
}

PropertyResult property_laplacian_commutes(std::uint64_t seed, int count) {
  return run("laplacian commutes with shell projection; shells reconstruct f", seed, count, 1e-12,
             [](Rng& rng, int) {
               auto lat = random_real_lattice(rng, rng.integer(2, 3));
               const auto f = random_trig(rng, lat, 6, 2);
               const auto lap = laplacian(f);
               TrigPolynomial<Complex> rebuilt(lat);
               double err = 0.0;
               for (const auto& q : support_shells(f)) {
                 const auto pf = project_shell(f, q);
                 rebuilt += pf;
                 err = std::max(err, relative_gap(laplacian(pf), project_shell(lap, q)));
               }
               return std::max(err, relative_gap(rebuilt, f));
             });
}

PropertyResult property_phi_rescaling(std::uint64_t seed, int count) {
  return run("T and alpha quadratic in phi", seed, count, 1e-12, [](Rng& rng, int) {
    const auto cluster = random_cluster(rng);
    const auto phi = random_admissible_phi(rng, cluster);
    const double s = rng.uniform(0.2, 4.0);
    const auto base = second_variation_alpha(phi, cluster);
    const auto scaled = second_variation_alpha(phi * Complex(s), cluster);
    const Eigen::MatrixXd tb = base.t_matrix.to_eigen();
    const Eigen::MatrixXd ts = scaled.t_matrix.to_eigen();
    const double t_err = max_abs(ts - s * s * tb) / (s * s * max_abs(tb));
    const double a_err = std::abs(scaled.alpha - s * s * base.alpha) / (s * s * std::abs(base.alpha));
    return std::max(t_err, a_err);
  });
}

PropertyResult property_basis_rotation(std::uint64_t seed, int count) {
  return run("T eigenvalues invariant under basis rotation", seed, count, 1e-10, [](Rng& rng, int) {
    const auto cluster = random_cluster(rng);
    const auto phi = random_admissible_phi(rng, cluster);
    const Eigen::MatrixXd q = random_orthogonal(rng, cluster.multiplicity);
    const auto rotated = rotate_basis(cluster, q);
    const auto t0 = t_matrix(phi, cluster);
    const auto t1 = t_matrix(phi, rotated);
    const Eigen::MatrixXd m0 = t0.matrix.to_eigen();
    const Eigen::MatrixXd m1 = t1.matrix.to_eigen();
    const double scale = std::max(max_abs(m0), 1e-300);
    double err = max_abs(m1 - q.transpose() * m0 * q) / scale;
    for (std::size_t i = 0; i < t0.eigenvalues.size(); ++i) {
      err = std::max(err, std::abs(t0.eigenvalues[i] - t1.eigenvalues[i]) /
                              std::max(std::abs(t0.eigenvalues.front()), std::abs(t0.eigenvalues.back())));
    }
    return err;
  });
}

PropertyResult property_lattice_rescaling(std::uint64_t seed, int count) {
  return run("normalized flat lambda_1 invariant under A -> sA", seed, count, 1e-12, [](Rng& rng, int) {
    const int n = rng.integer(2, 4);
    auto lat = random_real_lattice(rng, n);
    const double s = rng.uniform(0.25, 4.0);
    const Lattice big(s * lat->basis());
    const auto l0 = flat_spectrum(*lat, 3);
    const auto l1 = flat_spectrum(big, 3);
    double err = std::abs(big.volume() - std::pow(s, n) * lat->volume()) / big.volume();
    for (std::size_t i = 0; i < l0.size(); ++i) {
      err = std::max(err, std::abs(l1[i].eigenvalue * s * s - l0[i].eigenvalue) / l0[i].eigenvalue);
      if (l1[i].multiplicity != l0[i].multiplicity) return 1.0;
    }
    const double bar0 = l0[0].eigenvalue * std::pow(lat->volume(), 2.0 / n);
    const double bar1 = l1[0].eigenvalue * std::pow(big.volume(), 2.0 / n);
    return std::max(err, std::abs(bar1 - bar0) / bar0);
  });
}

PropertyResult property_enumeration_oracle(std::uint64_t seed, int count) {
  return run("enumeration matches brute force and is symmetric", seed, count, 0.5, [](Rng& rng, int) {
    const int n = rng.integer(2, 3);
    auto lat = random_real_lattice(rng, n);
    const double r2 = rng.uniform(0.2, 6.0);
    const auto listed = enumerate_dual_vectors(*lat, r2);

    // |c_i| = |a_i . w| <= |a_i| R; pad the box generously
    std::vector<int> box(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      box[static_cast<std::size_t>(i)] = static_cast<int>(std::ceil(lat->basis().col(i).norm() * std::sqrt(r2))) + 2;
    }
    std::set<Freq> brute;
    Freq c{};
    std::function<void(int)> walk = [&](int axis) {
      if (axis == n) {
        if (c == kZeroFreq) return;
        const Eigen::VectorXd w = lat->dual_basis() * Eigen::Map<const Eigen::VectorXi>(c.data(), n).cast<double>();
        if (w.squaredNorm() <= r2) brute.insert(c);
        return;
      }
      const int b = box[static_cast<std::size_t>(axis)];
      for (int v = -b; v <= b; ++v) {
        c[static_cast<std::size_t>(axis)] = v;
        walk(axis + 1);
      }
      c[static_cast<std::size_t>(axis)] = 0;
    };
    walk(0);

    std::set<Freq> got;
    for (const auto& w : listed) got.insert(w.coords);
    if (got != brute) {
      // tolerate only boundary cases decided by roundoff
      for (const auto& x : brute) {
        if (!got.count(x) && std::abs(lat->normsq(x) - r2) > 1e-12 * r2) return 1.0;
      }
      for (const auto& x : got) {
        if (!brute.count(x) && std::abs(lat->normsq(x) - r2) > 1e-12 * r2) return 1.0;
      }
    }
    for (const auto& x : got) {
      if (!got.count(-x)) return 1.0;
    }
    for (std::size_t i = 1; i < listed.size(); ++i) {
      if (listed[i].normsq < listed[i - 1].normsq) return 1.0;
    }
    return 0.0;
  });
}

PropertyResult property_closed_form_alpha(std::uint64_t seed, int count) {
  return run("alpha for phi = u1 matches (n-1)^2 lambda_1 / 6 |det A|^((2-n)/n)", seed, count, 1e-10,
             [](Rng& rng, int) {
               const int n = rng.integer(2, 4);
               auto lat = random_applicable_lattice(rng, n, false);
               const auto cluster = make_cluster<Complex>(lat, 1);
               const auto report = second_variation_alpha(cluster.basis.front(), cluster);
               const double lambda1 = cluster.eigenvalue_abs();
               const double closed =
                   (n - 1.0) * (n - 1.0) * lambda1 / 6.0 * std::pow(lat->volume(), (2.0 - n) / n);
               const auto cw = casework_report(lat);
               double err = std::abs(report.alpha - closed) / closed;
               err = std::max(err, std::abs(cw.alpha - report.alpha) / closed);
               err = std::max(err, std::abs(report.lambda_ddot.front() - cw.t_eigen_u2) / std::abs(cw.t_eigen_u1));
               err = std::max(err, std::abs(report.lambda_ddot.back() - cw.t_eigen_u1) / std::abs(cw.t_eigen_u1));
               return err;
             });
}

PropertyResult property_alpha_consistency(std::uint64_t seed, int count) {
  return run("alpha reproducible from stored report fields", seed, count, 1e-12, [](Rng& rng, int) {
    const auto cluster = random_cluster(rng);
    const auto phi = random_admissible_phi(rng, cluster);
    const auto r = second_variation_alpha(phi, cluster);
    const double again = alpha_from_parts(r.n, r.lambda_k, r.mu, r.volume, r.phi_normsq);
    double err = std::abs(again - r.alpha) / std::max(std::abs(r.alpha), 1e-300);
    err = std::max(err, std::abs(r.mu - *std::min_element(r.lambda_ddot.begin(), r.lambda_ddot.end())));
    return err;
  });
}

}  // namespace confspec::testing
