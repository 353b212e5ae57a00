#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confspec {

enum class ErrorKind {
  InvalidLattice,
  UnsupportedDimension,
  EnumerationOverflow,
  LatticeMismatch,
  InvalidInput,
  ExactUnavailable,
  NotAdmissible,
  NotInEigenspace,
  InternalConsistency,
  NumericalInconsistency,
  IdentityMismatch,
  Inapplicable,
  DiscretizationFailure,
  SolverNonConvergence,
  BranchTrackingFailure,
  TrackingAmbiguous,
  FitQuality,
};

const char* to_string(ErrorKind kind);

/// Process exit code for the CLI: 1 when the mathematics disagrees, 2 for
/// usage or input problems, 3 when the numerical infrastructure gave up.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class EnumerationOverflow : public Error {
 public:
  explicit EnumerationOverflow(std::size_t cap)
      : Error(ErrorKind::EnumerationOverflow,
              "dual vector enumeration exceeds cap of " + std::to_string(cap) + " vectors"),
        cap_(cap) {}

  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

class NotAdmissible : public Error {
 public:
  NotAdmissible(const std::string& message, double mean, double residual_mass,
                double residual_grad)
      : Error(ErrorKind::NotAdmissible, message),
        mean_(mean),
        residual_mass_(residual_mass),
        residual_grad_(residual_grad) {}

  double mean() const noexcept { return mean_; }
  double residual_mass() const noexcept { return residual_mass_; }
  double residual_grad() const noexcept { return residual_grad_; }

 private:
  double mean_;
  double residual_mass_;
  double residual_grad_;
};

class TrackingAmbiguous : public Error {
 public:
  TrackingAmbiguous(double t, const std::string& message)
      : Error(ErrorKind::TrackingAmbiguous, message), t_(t) {}

  double t() const noexcept { return t_; }

 private:
  double t_;
};

}  // namespace confspec
