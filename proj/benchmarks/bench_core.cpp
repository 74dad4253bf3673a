// Microbenchmarks for the hot paths: spectral transforms, the nonlocal
// energy, spectral projections, and the per-fiber eigensolve.  Run with
//   bench_core [--benchmark_filter=...]
#include <benchmark/benchmark.h>

#include "chq/bloch.hpp"
#include "chq/energy.hpp"
#include "chq/grid.hpp"
#include "chq/potential.hpp"
#include "chq/riesz.hpp"
#include "chq/rng.hpp"
#include "chq/solver.hpp"

using namespace chq;

namespace {

TorusGrid grid_for(int M, int s) { return make_grid(3, M, s); }

Field test_field(const TorusGrid& g) {
  Rng rng(42);
  return random_smooth_field(g, rng, 6);
}

RieszParams riesz_for(const TorusGrid& g) {
  RieszParams rp;
  rp.alpha = 2.0;
  rp.zero_mode = default_zero_mode(2.0, g);
  return rp;
}

void bm_transform_roundtrip(benchmark::State& state) {
  const TorusGrid g = grid_for(static_cast<int>(state.range(0)), 8);
  const Field u = test_field(g);
  for (auto _ : state) {
    Field back = inverse_transform(transform(u));
    benchmark::DoNotOptimize(back.v.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(g.n()));
}
BENCHMARK(bm_transform_roundtrip)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void bm_riesz_apply(benchmark::State& state) {
  const TorusGrid g = grid_for(static_cast<int>(state.range(0)), 8);
  const Field u = test_field(g);
  const RieszParams rp = riesz_for(g);
  for (auto _ : state) {
    Field r = riesz_apply(u, rp);
    benchmark::DoNotOptimize(r.v.data());
  }
}
BENCHMARK(bm_riesz_apply)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void bm_j_energy(benchmark::State& state) {
  const TorusGrid g = grid_for(static_cast<int>(state.range(0)), 8);
  const Field u = test_field(g);
  const RieszParams rp = riesz_for(g);
  NonlocalParams np;
  for (auto _ : state) {
    benchmark::DoNotOptimize(j_energy(u, np, rp));
  }
}
BENCHMARK(bm_j_energy)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

const BlochDecomposition& shared_decomposition() {
  static const BlochDecomposition d = [] {
    const TorusGrid g = grid_for(2, 8);
    return band_structure(sample_potential(PotentialSpec::cosine(10.0, 30.0), g), g, 0,
                          BlochDecomposition::Store::full);
  }();
  return d;
}

void bm_project(benchmark::State& state) {
  const BlochDecomposition& d = shared_decomposition();
  const Field u = test_field(d.grid);
  const GapInfo gap = find_gap(d, 0.0);
  const double mid = 0.5 * (gap.a + gap.b);
  for (auto _ : state) {
    Field p = project(u, d, mid, Side::plus);
    benchmark::DoNotOptimize(p.v.data());
  }
}
BENCHMARK(bm_project)->Unit(benchmark::kMillisecond);

void bm_cell_eigensolve(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const TorusGrid g = grid_for(2, s);
  const Field V = sample_potential(PotentialSpec::cosine(10.0, 30.0), g);
  for (auto _ : state) {
    auto [mu, vecs] = cell_eigensolve(V, g, {1, 0, 0});
    benchmark::DoNotOptimize(mu.data());
  }
}
BENCHMARK(bm_cell_eigensolve)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void bm_residual(benchmark::State& state) {
  const TorusGrid g = grid_for(static_cast<int>(state.range(0)), 8);
  EnergyParams ep;
  ep.potential = sample_potential(PotentialSpec::cosine(10.0, 30.0), g);
  ep.lambda = 0.05;
  ep.riesz = riesz_for(g);
  const Field u = test_field(g);
  for (auto _ : state) {
    Field r = phi_residual(u, ep);
    benchmark::DoNotOptimize(r.v.data());
  }
}
BENCHMARK(bm_residual)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
