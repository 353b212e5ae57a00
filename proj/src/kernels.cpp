#include "confspec/kernels.hpp"

#include <cmath>
#include <numbers>

#include "confspec/errors.hpp"

namespace confspec::kernels {

namespace {

std::vector<Complex> twiddles(int n_points, int sign) {
  std::vector<Complex> table(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    table[static_cast<std::size_t>(k)] =
        std::polar(1.0, sign * 2.0 * std::numbers::pi * k / static_cast<double>(n_points));
  }
  return table;
}

int wrap(long long v, int n_points) {
  const long long r = v % n_points;
  return static_cast<int>(r < 0 ? r + n_points : r);
}

}  // namespace

std::size_t Grid::size() const {
  std::size_t total = 1;
  for (int j = 0; j < dimension; ++j) total *= static_cast<std::size_t>(points_per_axis);
  return total;
}

std::size_t Grid::wrap_index(const Freq& k) const {
  std::size_t flat = 0, stride = 1;
  for (int j = 0; j < dimension; ++j) {
    flat += static_cast<std::size_t>(wrap(k[static_cast<std::size_t>(j)], points_per_axis)) * stride;
    stride *= static_cast<std::size_t>(points_per_axis);
  }
  return flat;
}

std::vector<Complex> sample_plane_waves(const PlaneWaveTerms& terms, const Grid& grid, Exec exec) {
  const auto table = twiddles(grid.points_per_axis, +1);
  const long long total = static_cast<long long>(grid.size());
  const int n = grid.dimension;
  const int np = grid.points_per_axis;
  std::vector<Complex> out(static_cast<std::size_t>(total));

  auto point = [&](long long flat) {
    std::array<int, kMaxDimension> idx{};
    long long rem = flat;
    for (int j = 0; j < n; ++j) {
      idx[static_cast<std::size_t>(j)] = static_cast<int>(rem % np);
      rem /= np;
    }
    Complex sum = 0.0;
    for (const auto& [c, coeff] : terms) {
      long long phase = 0;
      for (int j = 0; j < n; ++j) {
        phase += static_cast<long long>(c[static_cast<std::size_t>(j)]) * idx[static_cast<std::size_t>(j)];
      }
      sum += coeff * table[static_cast<std::size_t>(wrap(phase, np))];
    }
    out[static_cast<std::size_t>(flat)] = sum;
  };

  if (exec == Exec::Serial) {
    for (long long flat = 0; flat < total; ++flat) point(flat);
  } else {
#pragma omp parallel for schedule(static)
    for (long long flat = 0; flat < total; ++flat) point(flat);
  }
  return out;
}

std::vector<double> sample_real(const PlaneWaveTerms& terms, const Grid& grid, Exec exec) {
  const auto values = sample_plane_waves(terms, grid, exec);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
  return out;
}

std::vector<double> exponentiate(std::span<const double> values, double scale, Exec exec) {
  const long long total = static_cast<long long>(values.size());
  std::vector<double> out(values.size());
  if (exec == Exec::Serial) {
    for (long long i = 0; i < total; ++i) out[static_cast<std::size_t>(i)] = std::exp(scale * values[static_cast<std::size_t>(i)]);
  } else {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < total; ++i) out[static_cast<std::size_t>(i)] = std::exp(scale * values[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<Complex> forward_dft(std::span<const double> values, const Grid& grid, Exec exec) {
  const std::size_t total = grid.size();
  if (values.size() != total) throw Error(ErrorKind::InvalidInput, "forward_dft: sample count mismatch");
  const int np = grid.points_per_axis;
  const auto table = twiddles(np, -1);
  std::vector<Complex> data(values.begin(), values.end());
  std::vector<Complex> scratch(total);

  std::size_t stride = 1;
  for (int axis = 0; axis < grid.dimension; ++axis) {
    // lines along `axis`: flat = outer * stride * np + inner, inner < stride
    const long long lines = static_cast<long long>(total / static_cast<std::size_t>(np));
    auto line = [&](long long id) {
      const std::size_t inner = static_cast<std::size_t>(id) % stride;
      const std::size_t outer = static_cast<std::size_t>(id) / stride;
      const std::size_t base = outer * stride * static_cast<std::size_t>(np) + inner;
      for (int k = 0; k < np; ++k) {
        Complex sum = 0.0;
        for (int s = 0; s < np; ++s) {
          sum += data[base + static_cast<std::size_t>(s) * stride] *
                 table[static_cast<std::size_t>((static_cast<long long>(k) * s) % np)];
        }
        scratch[base + static_cast<std::size_t>(k) * stride] = sum;
      }
    };
    if (exec == Exec::Serial) {
      for (long long id = 0; id < lines; ++id) line(id);
    } else {
#pragma omp parallel for schedule(static)
      for (long long id = 0; id < lines; ++id) line(id);
    }
    std::swap(data, scratch);
    stride *= static_cast<std::size_t>(np);
  }
  const double norm = 1.0 / static_cast<double>(total);
  for (auto& v : data) v *= norm;
  return data;
}

Complex dft_coefficient_direct(std::span<const double> values, const Grid& grid, const Freq& k) {
  const int np = grid.points_per_axis;
  const auto table = twiddles(np, -1);
  Complex sum = 0.0;
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    std::size_t rem = flat;
    long long phase = 0;
    for (int j = 0; j < grid.dimension; ++j) {
      phase += static_cast<long long>(k[static_cast<std::size_t>(j)]) * static_cast<long long>(rem % static_cast<std::size_t>(np));
      rem /= static_cast<std::size_t>(np);
    }
    sum += values[flat] * table[static_cast<std::size_t>(wrap(phase, np))];
  }
  return sum / static_cast<double>(values.size());
}

GalerkinMatrices assemble(std::span<const Freq> basis, const Lattice& lattice,
                          const std::vector<Complex>& stiffness_hat,
                          const std::vector<Complex>& mass_hat, const Grid& grid, Exec exec) {
  const long long size = static_cast<long long>(basis.size());
  const double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
  std::vector<Eigen::VectorXd> w;
  w.reserve(basis.size());
  for (const auto& c : basis) w.push_back(lattice.cartesian(c));

  GalerkinMatrices out{Eigen::MatrixXcd::Zero(size, size), Eigen::MatrixXcd::Zero(size, size)};
  auto row = [&](long long a) {
    const auto& ca = basis[static_cast<std::size_t>(a)];
    for (long long b = 0; b < size; ++b) {
      const Freq d = ca - basis[static_cast<std::size_t>(b)];
      const bool diagonal = (a == b);
      const double pairing = four_pi_sq * w[static_cast<std::size_t>(a)].dot(w[static_cast<std::size_t>(b)]);
      const Complex wk = stiffness_hat.empty() ? Complex(diagonal ? 1.0 : 0.0)
                                               : stiffness_hat[grid.wrap_index(d)];
      const Complex wm = mass_hat.empty() ? Complex(diagonal ? 1.0 : 0.0) : mass_hat[grid.wrap_index(d)];
      out.stiffness(a, b) = pairing * wk;
      out.mass(a, b) = wm;
    }
  };
  if (exec == Exec::Serial) {
    for (long long a = 0; a < size; ++a) row(a);
  } else {
#pragma omp parallel for schedule(static)
    for (long long a = 0; a < size; ++a) row(a);
  }
  return out;
}

}  // namespace confspec::kernels
