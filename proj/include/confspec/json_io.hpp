#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "confspec/casework.hpp"
#include "confspec/deformed_solver.hpp"
#include "confspec/lattice.hpp"
#include "confspec/perturbation.hpp"
#include "confspec/trig_polynomial.hpp"

namespace confspec::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

/// Preset `eye:n`, `diag:a,b,...`, `ab:a,b`, or a path to a JSON file
/// {"n": 2, "basis_columns": [[...], ...]} listing the columns of A.
Lattice parse_lattice_spec(const std::string& spec);
Lattice lattice_from_json(const json& j);
json to_json(const Lattice& lattice);

/// {"terms": [{"coords": [...], "re": x, "im": y}, ...]}
TrigPolynomial<Complex> trig_from_json(const json& j, std::shared_ptr<const Lattice> lattice);
json to_json(const TrigPolynomial<Complex>& f);

json to_json(const DualVector& w);
json to_json(const SpectrumLevel& level);
json to_json(const AdmissibilityResiduals& r);
json to_json(const PerturbationReport<Complex>& r);
json to_json(const BranchTracking& tracking);
json to_json(const FunctionalSeries& series);
json to_json(const VolumeSeries& series);
json to_json(const ConvergenceReport& report);
json to_json(const DerivativeFit& fit);
json to_json(const CaseworkReport& report);

/// Adds the "schema" key first.
json with_schema(json body);

}  // namespace confspec::io
