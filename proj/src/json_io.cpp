#include "confspec/json_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "confspec/errors.hpp"

namespace confspec::io {

namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

std::vector<double> parse_numbers(const std::string& text, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw Error(ErrorKind::InvalidInput, "cannot parse number '" + item + "' in lattice spec '" + spec + "'");
    }
    out.push_back(v);
  }
  return out;
}

json coords_json(const Freq& c, int n) {
  json a = json::array();
  for (int j = 0; j < n; ++j) a.push_back(c[static_cast<std::size_t>(j)]);
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json eigenvalue_json(double value) { return {{"absolute", value}, {"per_4pi2", value / kFourPiSq}}; }

}  // namespace

Lattice parse_lattice_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = colon == std::string::npos ? "" : spec.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "eye") {
    const auto v = parse_numbers(tail, spec);
    if (v.size() != 1 || v[0] != std::floor(v[0])) {
      throw Error(ErrorKind::InvalidInput, "eye:n needs one integer dimension");
    }
    return Lattice::identity(static_cast<int>(v[0]));
  }
  if (head == "diag") return Lattice::diagonal(parse_numbers(tail, spec));
  if (head == "ab") {
    const auto v = parse_numbers(tail, spec);
    if (v.size() != 2) throw Error(ErrorKind::InvalidInput, "ab:a,b needs two numbers");
    return Lattice::ab(v[0], v[1]);
  }
  std::ifstream in(spec);
  if (!in) throw Error(ErrorKind::InvalidInput, "lattice spec '" + spec + "' is neither a preset nor a readable file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, "lattice file '" + spec + "': " + e.what());
  }
  return lattice_from_json(j);
}

Lattice lattice_from_json(const json& j) {
  if (!j.is_object() || !j.contains("basis_columns") || !j["basis_columns"].is_array()) {
    throw Error(ErrorKind::InvalidInput, "lattice JSON needs a \"basis_columns\" array");
  }
  const auto& cols = j["basis_columns"];
  const auto n = static_cast<Eigen::Index>(cols.size());
  if (n == 0) throw Error(ErrorKind::InvalidInput, "lattice JSON has no basis columns");
  if (j.contains("n") && (!j["n"].is_number_integer() || j["n"].get<Eigen::Index>() != n)) {
    throw Error(ErrorKind::InvalidInput, "lattice JSON \"n\" does not match the number of basis columns");
  }
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    const auto& g = cols[static_cast<std::size_t>(col)];
    if (!g.is_array() || static_cast<Eigen::Index>(g.size()) != n) {
      throw Error(ErrorKind::InvalidInput, "each basis column must have " + std::to_string(n) + " entries");
    }
    for (Eigen::Index row = 0; row < n; ++row) {
      const auto& v = g[static_cast<std::size_t>(row)];
      if (!v.is_number()) throw Error(ErrorKind::InvalidInput, "basis entries must be numbers");
      a(row, col) = v.get<double>();
    }
  }
  return Lattice(a);
}

json to_json(const Lattice& lattice) {
  json cols = json::array();
  for (int col = 0; col < lattice.dimension(); ++col) {
    json g = json::array();
    for (int row = 0; row < lattice.dimension(); ++row) g.push_back(lattice.basis()(row, col));
    cols.push_back(g);
  }
  return {{"n", lattice.dimension()}, {"basis_columns", cols}, {"volume", lattice.volume()}};
}

TrigPolynomial<Complex> trig_from_json(const json& j, std::shared_ptr<const Lattice> lattice) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array()) {
    throw Error(ErrorKind::InvalidInput, "trig polynomial JSON needs a \"terms\" array");
  }
  const int n = lattice->dimension();
  TrigPolynomial<Complex>::Terms terms;
  for (const auto& t : j["terms"]) {
    if (!t.contains("coords") || !t["coords"].is_array() || static_cast<int>(t["coords"].size()) != n) {
      throw Error(ErrorKind::InvalidInput, "each term needs " + std::to_string(n) + " integer coords");
    }
    Freq c{};
    for (int k = 0; k < n; ++k) {
      const auto& v = t["coords"][static_cast<std::size_t>(k)];
      if (!v.is_number_integer()) throw Error(ErrorKind::InvalidInput, "term coords must be integers");
      c[static_cast<std::size_t>(k)] = v.get<int>();
    }
    const double re = t.value("re", 0.0);
    const double im = t.value("im", 0.0);
    terms[c] += Complex(re, im);
  }
  return TrigPolynomial<Complex>::from_terms(std::move(lattice), terms);
}

json to_json(const TrigPolynomial<Complex>& f) {
  json terms = json::array();
  const int n = f.lattice_ptr() ? f.lattice().dimension() : 0;
  for (const auto& [c, v] : f.terms()) {
    terms.push_back({{"coords", coords_json(c, n)}, {"re", v.real()}, {"im", v.imag()}});
  }
  return {{"terms", terms}};
}

json to_json(const DualVector& w) {
  json cart = json::array();
  for (Eigen::Index i = 0; i < w.cartesian.size(); ++i) cart.push_back(w.cartesian(i));
  return {{"coords", coords_json(w.coords, static_cast<int>(w.cartesian.size()))}, {"cartesian", cart}, {"normsq", w.normsq}};
}

json to_json(const SpectrumLevel& level) {
  json reps = json::array();
  for (const auto& w : level.frequency_pairs) reps.push_back(to_json(w));
  return {{"index", level.index},
          {"q", level.q},
          {"eigenvalue", eigenvalue_json(level.eigenvalue)},
          {"multiplicity", level.multiplicity},
          {"representatives", reps}};
}

json to_json(const AdmissibilityResiduals& r) {
  return {{"mean", r.mean}, {"residual_mass", r.residual_mass}, {"residual_grad", r.residual_grad}};
}

json to_json(const PerturbationReport<Complex>& r) {
  json ddot = json::array();
  for (double v : r.lambda_ddot) ddot.push_back(eigenvalue_json(v));
  return {{"n", r.n},
          {"index_k", r.index_k},
          {"multiplicity", r.multiplicity},
          {"lambda_k", eigenvalue_json(r.lambda_k)},
          {"p_matrix", matrix_json(r.p_matrix.to_eigen())},
          {"t_matrix", matrix_json(r.t_matrix.to_eigen())},
          {"lambda_ddot", ddot},
          {"mu", eigenvalue_json(r.mu)},
          {"alpha", r.alpha},
          {"volume", r.volume},
          {"phi_normsq", r.phi_normsq},
          {"residual_mass", r.residual_mass},
          {"residual_grad", r.residual_grad}};
}

json to_json(const DerivativeFit& fit) {
  return {{"value", fit.value},
          {"first", fit.first},
          {"second", fit.second},
          {"residual", fit.residual},
          {"coefficients", fit.coefficients}};
}

json to_json(const BranchTracking& tracking) {
  json branches = json::array();
  for (const auto& b : tracking.branches) {
    json values = json::array();
    for (const auto& s : b.samples) values.push_back(s.value);
    branches.push_back({{"branch_id", b.branch_id},
                        {"values", values},
                        {"overlap_trace", b.overlap_trace},
                        {"fitted", to_json(b.fitted)}});
  }
  return {{"t", tracking.t}, {"lambda_k", tracking.lambda_k}, {"volume", tracking.volume}, {"branches", branches}};
}

json to_json(const FunctionalSeries& s) {
  return {{"t", s.t},
          {"lambda_bar", s.lambda_bar},
          {"fit", to_json(s.fit)},
          {"lambda_bar0", s.lambda_bar0},
          {"fitted_alpha", s.fitted_alpha},
          {"predicted_alpha", s.predicted_alpha},
          {"relative_gap", s.relative_gap}};
}

json to_json(const VolumeSeries& s) {
  return {{"t", s.t}, {"volume", s.volume}, {"fit", to_json(s.fit)}, {"predicted_second", s.predicted_second}};
}

json to_json(const ConvergenceReport& r) {
  return {{"t", r.t}, {"max_relative_change", r.max_relative_change}, {"tolerance", r.tolerance}, {"passed", r.passed}};
}

json to_json(const CaseworkReport& r) {
  json out = {{"lattice", to_json(*r.lattice)},
              {"n", r.n},
              {"shortest", to_string(r.shortest)},
              {"lambda1", eigenvalue_json(r.lambda1)},
              {"det_a", r.det_a},
              {"verdict", to_string(r.verdict)}};
  if (r.w) out["w"] = to_json(*r.w);
  if (r.verdict == Verdict::NotMaximal) {
    out["t_eigen_u1"] = eigenvalue_json(r.t_eigen_u1);
    out["t_eigen_u2"] = eigenvalue_json(r.t_eigen_u2);
    out["mu"] = eigenvalue_json(r.mu);
    out["alpha"] = r.alpha;
  }
  if (r.t_eigen_u1_exact) {
    out["exact_per_4pi2"] = {{"t_eigen_u1", r.t_eigen_u1_exact->str()},
                             {"t_eigen_u2", r.t_eigen_u2_exact->str()},
                             {"alpha_bracket", r.alpha_bracket_exact->str()}};
  }
  if (!r.identities.empty()) {
    json ids = json::array();
    for (const auto& id : r.identities) ids.push_back({{"name", id.name}, {"gap", id.gap}, {"exact_match", id.exact_match}});
    out["identities"] = ids;
  }
  return out;
}

json with_schema(json body) {
  json out = {{"schema", kSchemaVersion}};
  for (auto& [k, v] : body.items()) out[k] = v;
  return out;
}

}  // namespace confspec::io
