// Serial reference vs OpenMP timings for the data-parallel kernels.
//   bench_kernels [repeats]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "confspec/deformed_solver.hpp"
#include "confspec/kernels.hpp"
#include "confspec/perturbation.hpp"

using namespace confspec;

namespace {

double time_ms(const std::function<void()>& body, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) body();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

void row(const char* name, double serial, double parallel, double diff) {
  std::printf("%-26s %10.3f %10.3f %8.2fx   max|diff| %.2e\n", name, serial, parallel, serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  const int threads = configure_threads_from_env();
  std::printf("threads %d, repeats %d\n", threads, repeats);
  std::printf("%-26s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  auto lat = std::make_shared<const Lattice>(Lattice::diagonal({1.0, 1.0, 2.0}));
  const auto cluster = make_cluster<Complex>(lat, 1);
  const auto& phi = cluster.basis.front();
  const kernels::Grid grid{3, 48};
  const kernels::PlaneWaveTerms terms(phi.terms().begin(), phi.terms().end());

  std::vector<double> s_ser, s_par;
  const double t_ser = time_ms([&] { s_ser = kernels::sample_real(terms, grid, Exec::Serial); }, repeats);
  const double t_par = time_ms([&] { s_par = kernels::sample_real(terms, grid, Exec::Parallel); }, repeats);
  double d = 0.0;
  for (std::size_t i = 0; i < s_ser.size(); ++i) d = std::max(d, std::abs(s_ser[i] - s_par[i]));
  row("sample_real 48^3", t_ser, t_par, d);

  const auto weight = kernels::exponentiate(s_ser, 0.05, Exec::Serial);
  std::vector<Complex> f_ser, f_par;
  const double f_t_ser = time_ms([&] { f_ser = kernels::forward_dft(weight, grid, Exec::Serial); }, repeats);
  const double f_t_par = time_ms([&] { f_par = kernels::forward_dft(weight, grid, Exec::Parallel); }, repeats);
  d = 0.0;
  for (std::size_t i = 0; i < f_ser.size(); ++i) d = std::max(d, std::abs(f_ser[i] - f_par[i]));
  row("forward_dft 48^3", f_t_ser, f_t_par, d);

  const auto basis = truncation_basis(*lat, 12.0);
  kernels::GalerkinMatrices a_ser, a_par;
  const double a_t_ser = time_ms([&] { a_ser = kernels::assemble(basis, *lat, f_ser, f_ser, grid, Exec::Serial); }, repeats);
  const double a_t_par = time_ms([&] { a_par = kernels::assemble(basis, *lat, f_ser, f_ser, grid, Exec::Parallel); }, repeats);
  d = std::max((a_ser.stiffness - a_par.stiffness).cwiseAbs().maxCoeff(), (a_ser.mass - a_par.mass).cwiseAbs().maxCoeff());
  char label[64];
  std::snprintf(label, sizeof label, "assemble %zu waves", basis.size());
  row(label, a_t_ser, a_t_par, d);

  std::vector<DualVector> e_ser, e_par;
  const double e_t_ser = time_ms([&] { e_ser = enumerate_dual_vectors(*lat, 60.0, {1000000, Exec::Serial}); }, repeats);
  const double e_t_par = time_ms([&] { e_par = enumerate_dual_vectors(*lat, 60.0, {1000000, Exec::Parallel}); }, repeats);
  d = e_ser.size() == e_par.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; d == 0.0 && i < e_ser.size(); ++i) d = e_ser[i].coords == e_par[i].coords ? 0.0 : 1.0;
  row("enumerate |w|^2<=60", e_t_ser, e_t_par, d);

  const auto path = make_path(phi, default_t_grid(phi));
  auto cfg = default_config(*lat, cluster.q.real(), cluster.index_k, cluster.multiplicity);
  std::vector<SweepPoint> w_ser, w_par;
  cfg.exec = Exec::Serial;
  const double w_t_ser = time_ms([&] { w_ser = solve_sweep(path, cfg); }, repeats);
  cfg.exec = Exec::Parallel;
  const double w_t_par = time_ms([&] { w_par = solve_sweep(path, cfg); }, repeats);
  d = 0.0;
  for (std::size_t i = 0; i < w_ser.size(); ++i) {
    for (std::size_t j = 0; j < w_ser[i].pairs.size(); ++j) {
      d = std::max(d, std::abs(w_ser[i].pairs[j].value - w_par[i].pairs[j].value));
    }
  }
  row("solve_sweep 7 t-values", w_t_ser, w_t_par, d);
  return 0;
}
