#include "confspec/errors.hpp"

namespace confspec {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidLattice: return "invalid-lattice";
    case ErrorKind::UnsupportedDimension: return "unsupported-dimension";
    case ErrorKind::EnumerationOverflow: return "enumeration-overflow";
    case ErrorKind::LatticeMismatch: return "lattice-mismatch";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::ExactUnavailable: return "exact-unavailable";
    case ErrorKind::NotAdmissible: return "not-admissible";
    case ErrorKind::NotInEigenspace: return "not-in-eigenspace";
    case ErrorKind::InternalConsistency: return "internal-consistency";
    case ErrorKind::NumericalInconsistency: return "numerical-inconsistency";
    case ErrorKind::IdentityMismatch: return "identity-mismatch";
    case ErrorKind::Inapplicable: return "inapplicable";
    case ErrorKind::DiscretizationFailure: return "discretization-failure";
    case ErrorKind::SolverNonConvergence: return "solver-non-convergence";
    case ErrorKind::BranchTrackingFailure: return "branch-tracking-failure";
    case ErrorKind::TrackingAmbiguous: return "tracking-ambiguous";
    case ErrorKind::FitQuality: return "fit-quality";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidLattice:
    case ErrorKind::UnsupportedDimension:
    case ErrorKind::LatticeMismatch:
    case ErrorKind::InvalidInput:
    case ErrorKind::ExactUnavailable:
    case ErrorKind::Inapplicable:
      return 2;
    case ErrorKind::NotAdmissible:
    case ErrorKind::NotInEigenspace:
    case ErrorKind::InternalConsistency:
    case ErrorKind::NumericalInconsistency:
    case ErrorKind::IdentityMismatch:
      return 1;
    case ErrorKind::EnumerationOverflow:
    case ErrorKind::DiscretizationFailure:
    case ErrorKind::SolverNonConvergence:
    case ErrorKind::BranchTrackingFailure:
    case ErrorKind::TrackingAmbiguous:
    case ErrorKind::FitQuality:
      return 3;
  }
  return 3;
}

}  // namespace confspec
