#include "confspec/reports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "confspec/casework.hpp"
#include "confspec/deformed_solver.hpp"
#include "confspec/errors.hpp"
#include "confspec/perturbation.hpp"

namespace confspec::reports {

namespace {

using io::json;

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

std::shared_ptr<const Lattice> load_lattice(const std::string& spec) {
  if (spec.empty()) throw Error(ErrorKind::InvalidInput, "--lattice is required");
  return std::make_shared<const Lattice>(io::parse_lattice_spec(spec));
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(15) << v;
  return os.str();
}

std::string coords_text(const Freq& c, int n) {
  std::string s = "(";
  for (int j = 0; j < n; ++j) s += (j ? ";" : "") + std::to_string(c[static_cast<std::size_t>(j)]);
  return s + ")";
}

EigenspaceCluster<Complex> cluster_for(const std::shared_ptr<const Lattice>& lat, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidInput, "--k must be >= 1");
  return make_cluster<Complex>(lat, k);
}

// sin and cos waves over every dual vector up to 4 lambda_k
std::vector<TrigPolynomial<Complex>> auto_candidates(const EigenspaceCluster<Complex>& cluster) {
  std::vector<TrigPolynomial<Complex>> out;
  const Complex amp = Arith<Complex>::wave_amplitude(*cluster.lattice);
  for (const auto& w : enumerate_dual_vectors(*cluster.lattice, 4.0 * cluster.q.real() * (1.0 + 1e-9))) {
    if (!is_pair_representative(w.coords)) continue;
    out.push_back(TrigPolynomial<Complex>::sin_wave(cluster.lattice, w.coords, amp));
    out.push_back(TrigPolynomial<Complex>::cos_wave(cluster.lattice, w.coords, amp));
  }
  return out;
}

TrigPolynomial<Complex> resolve_phi(const JobConfig& config, const EigenspaceCluster<Complex>& cluster) {
  if (config.phi_spec == "u1") return cluster.basis.front();
  if (config.phi_spec == "auto") {
    const auto space = admissible_subspace(auto_candidates(cluster), cluster);
    if (space.empty()) {
      throw Error(ErrorKind::NotAdmissible, "no admissible direction among the low-frequency candidates");
    }
    return space.front();
  }
  std::ifstream in(config.phi_spec);
  if (!in) throw Error(ErrorKind::InvalidInput, "--phi '" + config.phi_spec + "' is not u1, auto, or a readable file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("phi file: ") + e.what());
  }
  return io::trig_from_json(j, cluster.lattice);
}

// Runs one pipeline stage; on failure records it in data and sets the exit code.
bool stage(CommandResult& result, const std::string& name, const std::function<void()>& body) {
  try {
    body();
    return true;
  } catch (const Error& e) {
    result.data["status"] = "FAIL";
    result.data["failed_stage"] = name;
    result.data["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    if (const auto* na = dynamic_cast<const NotAdmissible*>(&e)) {
      result.data["error"]["residuals"] = {
          {"mean", na->mean()}, {"residual_mass", na->residual_mass()}, {"residual_grad", na->residual_grad()}};
    }
    if (const auto* ta = dynamic_cast<const TrackingAmbiguous*>(&e)) result.data["error"]["t"] = ta->t();
    result.exit_code = exit_code_for(e.kind());
    return false;
  }
}

CommandResult begin(const std::string& command) {
  CommandResult r;
  r.data = io::with_schema({{"command", command}});
  return r;
}

void render_json(CommandResult& r) { r.output = r.data.dump(2) + "\n"; }

void render_error_text(CommandResult& r) {
  r.output = "FAIL at stage " + r.data.value("failed_stage", std::string("?")) + ": " +
             r.data["error"].value("message", std::string()) + "\n";
}

std::vector<double> path_grid(const JobConfig& config, const TrigPolynomial<Complex>& phi) {
  if (!config.t_step) return default_t_grid(phi);
  if (!(*config.t_step > 0.0)) throw Error(ErrorKind::InvalidInput, "--t-step must be positive");
  std::vector<double> grid;
  for (int i = -3; i <= 3; ++i) grid.push_back(i * *config.t_step);
  return grid;
}

struct Check {
  std::string name;
  double value;
  double reference;
  double tolerance;
  bool pass;
};

json checks_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name}, {"value", c.value}, {"reference", c.reference}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  }
  return out;
}

std::string checks_csv(const std::vector<Check>& checks) {
  std::string out = "check,value,reference,tolerance,pass\n";
  for (const auto& c : checks) {
    out += c.name + "," + num(c.value) + "," + num(c.reference) + "," + num(c.tolerance) + "," + (c.pass ? "true" : "false") + "\n";
  }
  return out;
}

double relative(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  if (name == "text") return Format::Text;
  throw Error(ErrorKind::InvalidInput, "unknown format '" + name + "' (json, csv, text)");
}

CommandResult cmd_spectrum(const JobConfig& config) {
  CommandResult r = begin("spectrum");
  std::shared_ptr<const Lattice> lat;
  std::vector<SpectrumLevel> levels;
  const bool ok = stage(r, "spectrum", [&] {
    lat = load_lattice(config.lattice_spec);
    if (config.levels < 1) throw Error(ErrorKind::InvalidInput, "--levels must be >= 1");
    levels = flat_spectrum(*lat, config.levels);
  });
  if (!ok) {
    config.format == Format::Json ? render_json(r) : render_error_text(r);
    return r;
  }
  r.data["lattice"] = io::to_json(*lat);
  json rows = json::array();
  for (const auto& l : levels) rows.push_back(io::to_json(l));
  r.data["levels"] = rows;
  if (config.format == Format::Json) {
    render_json(r);
  } else {
    r.output = "index,q,eigenvalue,eigenvalue_per_4pi2,multiplicity,representatives\n";
    for (const auto& l : levels) {
      std::string reps;
      for (const auto& w : l.frequency_pairs) reps += (reps.empty() ? "" : " ") + coords_text(w.coords, lat->dimension());
      r.output += std::to_string(l.index) + "," + num(l.q) + "," + num(l.eigenvalue) + "," + num(l.eigenvalue / kFourPiSq) +
                  "," + std::to_string(l.multiplicity) + "," + reps + "\n";
    }
  }
  return r;
}

CommandResult cmd_admissible(const JobConfig& config) {
  CommandResult r = begin("admissible");
  const bool ok = stage(r, "admissibility", [&] {
    const auto lat = load_lattice(config.lattice_spec);
    const auto cluster = cluster_for(lat, config.k);
    r.data["lattice"] = io::to_json(*lat);
    r.data["k"] = config.k;
    r.data["index_k"] = cluster.index_k;
    r.data["multiplicity"] = cluster.multiplicity;
    if (config.phi_spec == "auto") {
      const auto space = admissible_subspace(auto_candidates(cluster), cluster);
      r.data["admissible_subspace_dimension"] = space.size();
    }
    const auto phi = resolve_phi(config, cluster);
    const auto res = admissibility_residuals(phi, cluster);
    const bool admissible = res.mean <= kMeanTolerance && res.residual_mass <= kAdmissibilityTolerance &&
                            res.residual_grad <= kAdmissibilityTolerance;
    r.data["phi"] = io::to_json(phi);
    r.data["residuals"] = io::to_json(res);
    r.data["admissible"] = admissible;
    r.data["status"] = admissible ? "PASS" : "FAIL";
    r.exit_code = admissible ? 0 : 1;
  });
  (void)ok;
  if (config.format == Format::Json) {
    render_json(r);
  } else if (r.data.contains("residuals")) {
    const auto& res = r.data["residuals"];
    r.output = "mean,residual_mass,residual_grad,admissible\n" + num(res["mean"].get<double>()) + "," +
               num(res["residual_mass"].get<double>()) + "," + num(res["residual_grad"].get<double>()) + "," +
               (r.data["admissible"].get<bool>() ? "true" : "false") + "\n";
  } else {
    render_error_text(r);
  }
  return r;
}

CommandResult cmd_perturb(const JobConfig& config) {
  CommandResult r = begin("perturb");
  PerturbationReport<Complex> rep;
  const bool ok = stage(r, "perturbation", [&] {
    const auto lat = load_lattice(config.lattice_spec);
    const auto cluster = cluster_for(lat, config.k);
    const auto phi = resolve_phi(config, cluster);
    r.data["lattice"] = io::to_json(*lat);
    r.data["phi"] = io::to_json(phi);
    rep = second_variation_alpha(phi, cluster);
    r.data["perturbation"] = io::to_json(rep);
    if (config.phi_spec == "u1" && lat->exact()) {
      const auto exact_cluster = make_cluster<ExactScalar>(lat, config.k);
      const auto exact = second_variation_alpha(exact_cluster.basis.front(), exact_cluster);
      json e = {{"alpha_bracket", exact.alpha_bracket ? exact.alpha_bracket->to_string() : ""}};
      if (exact.mu_exact) e["mu"] = exact.mu_exact->to_string();
      r.data["exact_per_4pi2"] = e;
    }
    r.data["status"] = "PASS";
  });
  if (config.format == Format::Json) {
    render_json(r);
  } else if (ok) {
    r.output = "quantity,absolute,per_4pi2\nlambda_k," + num(rep.lambda_k) + "," + num(rep.lambda_k / kFourPiSq) + "\n";
    for (std::size_t j = 0; j < rep.lambda_ddot.size(); ++j) {
      r.output += "lambda_ddot_" + std::to_string(j) + "," + num(rep.lambda_ddot[j]) + "," + num(rep.lambda_ddot[j] / kFourPiSq) + "\n";
    }
    r.output += "mu," + num(rep.mu) + "," + num(rep.mu / kFourPiSq) + "\nalpha," + num(rep.alpha) + ",\n";
  } else {
    render_error_text(r);
  }
  return r;
}

CommandResult cmd_theorem4(const JobConfig& config) {
  CommandResult r = begin("theorem4");
  CaseworkReport rep;
  const bool ok = stage(r, "casework", [&] {
    rep = casework_report(load_lattice(config.lattice_spec));
    r.data["report"] = io::to_json(rep);
    r.data["status"] = "PASS";
  });
  if (!ok) {
    config.format == Format::Json ? render_json(r) : render_error_text(r);
  } else if (config.format == Format::Text) {
    r.output = render_text(rep);
  } else if (config.format == Format::Csv) {
    r.output = "n,det_a,lambda1,t_eigen_u1,t_eigen_u2,mu,alpha,verdict\n" + std::to_string(rep.n) + "," + num(rep.det_a) + "," +
               num(rep.lambda1) + "," + num(rep.t_eigen_u1) + "," + num(rep.t_eigen_u2) + "," + num(rep.mu) + "," +
               num(rep.alpha) + "," + to_string(rep.verdict) + "\n";
  } else {
    render_json(r);
  }
  return r;
}

CommandResult cmd_verify(const JobConfig& config) {
  CommandResult r = begin("verify");
  std::vector<Check> checks;
  auto add = [&](std::string name, double value, double reference, double tolerance, bool pass) {
    checks.push_back({std::move(name), value, reference, tolerance, pass});
  };

  std::shared_ptr<const Lattice> lat;
  EigenspaceCluster<Complex> cluster;
  TrigPolynomial<Complex> phi;
  PerturbationReport<Complex> rep;
  bool ok = stage(r, "spectrum", [&] {
    lat = load_lattice(config.lattice_spec);
    cluster = cluster_for(lat, config.k);
    r.data["lattice"] = io::to_json(*lat);
    r.data["k"] = config.k;
    json levels = json::array();
    for (const auto& l : flat_spectrum(*lat, config.k + 1)) levels.push_back(io::to_json(l));
    r.data["spectrum"] = levels;
  });
  ok = ok && stage(r, "admissibility", [&] {
    phi = resolve_phi(config, cluster);
    r.data["phi"] = io::to_json(phi);
    r.data["admissibility"] = io::to_json(admissibility_residuals(phi, cluster));
    check_admissible(phi, cluster);
  });
  ok = ok && stage(r, "perturbation", [&] {
    rep = second_variation_alpha(phi, cluster);
    r.data["perturbation"] = io::to_json(rep);
    const double p_max = rep.p_matrix.to_eigen().cwiseAbs().maxCoeff();
    add("first_variation_matrix_max", p_max, 0.0, 1e-10, p_max < 1e-10);
  });
  ok = ok && stage(r, "deformed_solver", [&] {
    const int n = lat->dimension();
    const int k = cluster.index_k;
    const int m = cluster.multiplicity;
    const double lambda_k = rep.lambda_k;
    const auto path = make_path(phi, path_grid(config, phi));
    auto cfg = default_config(*lat, cluster.q.real(), k, m);
    if (config.radius_sq) set_truncation_radius(cfg, *lat, *config.radius_sq);
    r.data["galerkin"] = {{"truncation_radius_sq", cfg.truncation_radius_sq},
                          {"grid_points_per_axis", cfg.grid_points_per_axis},
                          {"eig_count", cfg.eig_count},
                          {"convergence", cfg.convergence},
                          {"t_grid", path.t_grid}};

    const auto sweep = solve_sweep(path, cfg);
    const auto tracking = track_branches(sweep, k, m);
    r.data["branches"] = io::to_json(tracking);

    const auto slope = fit_derivatives(tracking.t, tracking.lambda_k);
    add("lambda_k_fitted_first_derivative", slope.first, 0.0, 1e-6 * lambda_k, std::abs(slope.first) < 1e-6 * lambda_k);

    std::vector<double> curv;
    for (const auto& b : tracking.branches) curv.push_back(b.fitted.second);
    std::sort(curv.begin(), curv.end());
    for (std::size_t j = 0; j < curv.size(); ++j) {
      const double pred = rep.lambda_ddot[j];
      const double gap = std::abs(pred) > 1e-9 * lambda_k ? relative(curv[j], pred) : std::abs(curv[j] - pred) / lambda_k;
      add("branch_curvature_" + std::to_string(j), curv[j], pred, 0.01, gap < 0.01);
    }

    const double alpha_tol = n == 2 ? 0.01 : 0.02;
    const auto series = functional_series(sweep, n, k, rep.alpha);
    r.data["functional"] = io::to_json(series);
    add("alpha_fitted", series.fitted_alpha, rep.alpha, alpha_tol, series.relative_gap < alpha_tol);

    const auto volume = volume_series(path, sweep);
    r.data["volume"] = io::to_json(volume);
    add("volume_second_derivative", volume.fit.second, volume.predicted_second, 1e-3,
        relative(volume.fit.second, volume.predicted_second) < 1e-3);
    add("volume_first_derivative", volume.fit.first, 0.0, 1e-8, std::abs(volume.fit.first) < 1e-8);

    const auto doubling = doubling_test(path, cfg, k, m);
    r.data["doubling"] = io::to_json(doubling);
    const double worst = *std::max_element(doubling.max_relative_change.begin(), doubling.max_relative_change.end());
    add("doubling_max_relative_change", worst, 0.0, cfg.convergence, doubling.passed);

    if (rep.alpha > 0.0) {
      const double h = 0.05 / sup_norm(phi);
      const double base = normalized_eigenvalue(path, cfg, k, 0.0);
      const double plus = normalized_eigenvalue(path, cfg, k, h);
      const double minus = normalized_eigenvalue(path, cfg, k, -h);
      r.data["nonmaximality"] = {{"t", h}, {"lambda_bar_0", base}, {"lambda_bar_plus", plus}, {"lambda_bar_minus", minus}};
      add("lambda_bar_increase_plus", plus - base, 0.0, 0.0, plus > base);
      add("lambda_bar_increase_minus", minus - base, 0.0, 0.0, minus > base);
    }
  });
  if (ok && config.k == 1 && config.phi_spec == "u1") {
    ok = stage(r, "casework", [&] {
      const auto cw = casework_report(lat);
      if (cw.verdict != Verdict::NotMaximal) return;
      r.data["theorem4"] = io::to_json(cw);
      const std::vector<double> closed{std::min(cw.t_eigen_u1, cw.t_eigen_u2), std::max(cw.t_eigen_u1, cw.t_eigen_u2)};
      for (std::size_t j = 0; j < closed.size(); ++j) {
        const double gap = relative(rep.lambda_ddot[j], closed[j]);
        add("casework_t_eigen_" + std::to_string(j), rep.lambda_ddot[j], closed[j], 1e-10, gap < 1e-10);
      }
      add("casework_alpha", rep.alpha, cw.alpha, 1e-10, relative(rep.alpha, cw.alpha) < 1e-10);
    });
  }

  r.data["checks"] = checks_json(checks);
  if (ok) {
    const bool all = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    r.data["status"] = all ? "PASS" : "FAIL";
    r.exit_code = all ? 0 : 1;
  }
  if (config.format == Format::Json) {
    render_json(r);
  } else {
    r.output = checks_csv(checks);
    if (!ok) r.output += "# " + r.data["failed_stage"].get<std::string>() + ": " + r.data["error"]["message"].get<std::string>() + "\n";
  }
  return r;
}

CommandResult cmd_sweep(const JobConfig& config) {
  CommandResult r = begin("sweep");
  std::vector<double> params;
  const bool ok = stage(r, "sweep", [&] {
    std::vector<double> parts;
    std::stringstream ss(config.range);
    std::string item;
    while (std::getline(ss, item, ':')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size()) throw Error(ErrorKind::InvalidInput, "--range must be start:stop:step");
      parts.push_back(v);
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw Error(ErrorKind::InvalidInput, "--range must be start:stop:step with step > 0");
    }
    if (config.family != "diag" && config.family != "ab-circle") {
      throw Error(ErrorKind::InvalidInput, "--family must be diag or ab-circle");
    }
    for (long i = 0;; ++i) {
      const double p = parts[0] + static_cast<double>(i) * parts[2];
      if (p > parts[1] + 1e-9 * parts[2]) break;
      params.push_back(p);
    }
  });
  if (!ok) {
    config.format == Format::Json ? render_json(r) : render_error_text(r);
    return r;
  }

  json rows = json::array();
  std::string csv = "param,lambda1,hypothesis,alpha,bound,equality,error\n";
  for (double p : params) {
    json row = {{"param", p}};
    std::string line = num(p) + ",";
    try {
      const auto lat = std::make_shared<const Lattice>(config.family == "diag" ? Lattice::diagonal({1.0, p})
                                                                                : Lattice::ab(p, std::sqrt(1.0 - p * p)));
      const auto bound = conformal_upper_bound(*lat);
      const bool hypothesis = unique_shortest(*lat).has_value();
      double alpha = std::nan("");
      if (hypothesis) {
        const auto cluster = make_cluster<Complex>(lat, 1);
        alpha = second_variation_alpha(cluster.basis.front(), cluster).alpha;
      }
      row["lambda1"] = bound.lambda1;
      row["hypothesis"] = hypothesis;
      row["alpha"] = hypothesis ? json(alpha) : json(nullptr);
      row["bound"] = bound.bound;
      row["equality"] = bound.equality;
      line += num(bound.lambda1) + "," + (hypothesis ? "true" : "false") + "," + (hypothesis ? num(alpha) : "") + "," +
              num(bound.bound) + "," + (bound.equality ? "true" : "false") + ",";
    } catch (const Error& e) {
      row["error"] = e.what();
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      line += ",,,,," + msg;
    }
    rows.push_back(row);
    csv += line + "\n";
  }
  r.data["family"] = config.family;
  r.data["rows"] = rows;
  r.data["status"] = "PASS";
  if (config.format == Format::Json) {
    render_json(r);
  } else {
    r.output = csv;
  }
  return r;
}

}  // namespace confspec::reports
