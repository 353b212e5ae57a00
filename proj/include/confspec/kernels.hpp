#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "confspec/lattice.hpp"
#include "confspec/parallel.hpp"

// Data-parallel inner loops of the deformed eigenproblem. Every kernel has
// an OpenMP path and a serial reference path that run the same arithmetic
// in the same order per output element.
namespace confspec::kernels {

using Complex = std::complex<double>;

/// Uniform grid in lattice coordinates: s = idx / N per axis, axis 0 fastest.
struct Grid {
  int dimension = 0;
  int points_per_axis = 0;

  std::size_t size() const;
  /// Wraps a frequency into [0, N) per axis and returns the flat index.
  std::size_t wrap_index(const Freq& k) const;
};

using PlaneWaveTerms = std::vector<std::pair<Freq, Complex>>;

/// Samples of sum_c coeff_c exp(2 pi i c . s) on the grid. Phases are
/// reduced mod N before lookup, so periodic samples are exact to roundoff.
std::vector<Complex> sample_plane_waves(const PlaneWaveTerms& terms, const Grid& grid, Exec exec);

/// Real parts of sample_plane_waves.
std::vector<double> sample_real(const PlaneWaveTerms& terms, const Grid& grid, Exec exec);

/// exp(scale * v) elementwise.
std::vector<double> exponentiate(std::span<const double> values, double scale, Exec exec);

/// Normalized forward DFT over the whole grid:
/// out[k] = N^{-n} sum_s v(s) exp(-2 pi i k . s), computed axis by axis.
std::vector<Complex> forward_dft(std::span<const double> values, const Grid& grid, Exec exec);

/// One DFT coefficient by direct summation; the oracle for forward_dft.
Complex dft_coefficient_direct(std::span<const double> values, const Grid& grid, const Freq& k);

struct GalerkinMatrices {
  Eigen::MatrixXcd stiffness;
  Eigen::MatrixXcd mass;
};

/// Plane-wave Galerkin matrices for weights with Fourier coefficients
/// stiffness_hat and mass_hat (full-grid DFTs). An empty spectrum means the
/// weight is identically one.
///   K_ab = 4 pi^2 (w_a . w_b) W_K^(c_a - c_b),  M_ab = W_M^(c_a - c_b)
GalerkinMatrices assemble(std::span<const Freq> basis, const Lattice& lattice,
                          const std::vector<Complex>& stiffness_hat,
                          const std::vector<Complex>& mass_hat, const Grid& grid, Exec exec);

}  // namespace confspec::kernels
