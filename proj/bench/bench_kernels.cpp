// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <vector>

#include "mildns/datum.hpp"
#include "mildns/duhamel.hpp"
#include "mildns/kernels.hpp"
#include "mildns/lattice.hpp"

namespace {

using namespace mildns;
using kernels::complex;

struct Workload {
  Lattice lattice;
  kernels::ModeGeometry geometry;
  std::vector<complex> tensor, vec, out;

  explicit Workload(int n)
      : lattice(2, n, 6.283185307179586),
        geometry{2, n, lattice.odd_wavenumbers(), lattice.wavenumber_sq()},
        tensor(4 * lattice.size()),
        vec(2 * lattice.size()),
        out(2 * lattice.size()) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (auto& c : tensor) c = {normal(rng), normal(rng)};
    for (auto& c : vec) c = {normal(rng), normal(rng)};
  }
};

Workload& workload(int n) {
  static std::vector<std::unique_ptr<Workload>> cache;
  for (auto& w : cache)
    if (w->lattice.n() == n) return *w;
  cache.push_back(std::make_unique<Workload>(n));
  return *cache.back();
}

template <bool Parallel>
void BM_heat(benchmark::State& state) {
  auto& w = workload(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::scale_by_heat(w.vec, w.lattice.wavenumber_sq(), 1e-9);
    else
      kernels::serial::scale_by_heat(w.vec, w.lattice.wavenumber_sq(), 1e-9);
    benchmark::DoNotOptimize(w.vec.data());
  }
  state.SetItemsProcessed(state.iterations() * w.vec.size());
}

template <bool Parallel>
void BM_leray(benchmark::State& state) {
  auto& w = workload(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::leray(w.vec, w.geometry);
    else
      kernels::serial::leray(w.vec, w.geometry);
    benchmark::DoNotOptimize(w.vec.data());
  }
  state.SetItemsProcessed(state.iterations() * w.lattice.size());
}

template <bool Parallel>
void BM_composite(benchmark::State& state) {
  auto& w = workload(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::composite(w.tensor, w.out, w.geometry, 0.4, 0.1);
    else
      kernels::serial::composite(w.tensor, w.out, w.geometry, 0.4, 0.1);
    benchmark::DoNotOptimize(w.out.data());
  }
  state.SetItemsProcessed(state.iterations() * w.lattice.size());
}

template <bool Parallel>
void BM_power_sum(benchmark::State& state) {
  auto& w = workload(static_cast<int>(state.range(0)));
  std::vector<double> v(w.tensor.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = w.tensor[i].real();
  for (auto _ : state) {
    const double s = Parallel ? kernels::omp::power_sum(v, 3.5, 2.0) : kernels::serial::power_sum(v, 3.5, 2.0);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * v.size());
}

template <bool Parallel>
void BM_duhamel_accumulate(benchmark::State& state) {
  auto& w = workload(static_cast<int>(state.range(0)));
  const std::span<const complex> src[3] = {w.vec, w.out, w.vec};
  const double c[3] = {0.25, 0.5, 0.25};
  std::vector<complex> acc(w.vec.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::duhamel_accumulate(acc, src, c, w.lattice.wavenumber_sq(), 0.01, 0.1);
    else
      kernels::serial::duhamel_accumulate(acc, src, c, w.lattice.wavenumber_sq(), 0.01, 0.1);
    benchmark::DoNotOptimize(acc.data());
  }
  state.SetItemsProcessed(state.iterations() * acc.size());
}

template <bool Parallel>
void BM_bilinear(benchmark::State& state) {
  const Lattice lat(2, static_cast<int>(state.range(0)), 6.283185307179586);
  const Field u0 = realize_datum(lat, DatumSpec::random_band(3, 1.0, 4.0).solenoidal());
  const auto book = build_exponent_book(2, 2.0, 0.0, 4.0);
  const auto traj = heat_trajectory(u0, quadratic_mesh(1.0, 16));
  const auto quad = QuadratureSpec::for_book(book, 16);
  for (auto _ : state) {
    auto b = bilinear_B(traj, traj, quad, Parallel ? Execution::parallel : Execution::serial);
    benchmark::DoNotOptimize(b.fields.data());
  }
}

}  // namespace

BENCHMARK(BM_heat<false>)->Name("heat/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_heat<true>)->Name("heat/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_leray<false>)->Name("leray/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_leray<true>)->Name("leray/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_composite<false>)->Name("composite/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_composite<true>)->Name("composite/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_power_sum<false>)->Name("power_sum/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_power_sum<true>)->Name("power_sum/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_duhamel_accumulate<false>)->Name("duhamel_accumulate/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_duhamel_accumulate<true>)->Name("duhamel_accumulate/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_bilinear<false>)->Name("bilinear_B/serial")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bilinear<true>)->Name("bilinear_B/parallel")->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
