// OpenMP kernels vs the serial reference loops.
//
//   bench_kernels --benchmark_filter=rmatvec

#include "chita/blockwise.hpp"
#include "chita/kernels.hpp"
#include "chita/oracles.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace chita;

namespace {

constexpr Index kRows = 200;

const GradientMatrix& matrix(Index p) {
  static std::map<Index, GradientMatrix> cache;
  auto it = cache.find(p);
  if (it == cache.end()) {
    it = cache.emplace(p, GradientMatrix(oracles::gaussian_matrix(kRows, p, 1))).first;
  }
  return it->second;
}

void set_counters(benchmark::State& state, Index p) {
  state.SetItemsProcessed(state.iterations() * kRows * p);
  state.counters["threads"] = omp_get_max_threads();
}

void BM_matvec_dense(benchmark::State& state) {
  const Index p = state.range(0);
  const GradientMatrix& A = matrix(p);
  const Vector x = oracles::gaussian_vector(p, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matvec(A, x));
  set_counters(state, p);
}

void BM_matvec_dense_reference(benchmark::State& state) {
  const Index p = state.range(0);
  const GradientMatrix& A = matrix(p);
  const Vector x = oracles::gaussian_vector(p, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::matvec(A, x));
  set_counters(state, p);
}

// 10% nonzeros, as for an IHT iterate.
void BM_matvec_sparse(benchmark::State& state) {
  const Index p = state.range(0);
  const GradientMatrix& A = matrix(p);
  const Vector x = kernels::hard_threshold(oracles::gaussian_vector(p, 2), p / 10);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matvec(A, x));
  set_counters(state, p);
}

void BM_matvec_sparse_reference(benchmark::State& state) {
  const Index p = state.range(0);
  const GradientMatrix& A = matrix(p);
  const Vector x = kernels::hard_threshold(oracles::gaussian_vector(p, 2), p / 10);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::matvec(A, x));
  set_counters(state, p);
}

void BM_rmatvec(benchmark::State& state) {
  const Index p = state.range(0);
  const GradientMatrix& A = matrix(p);
  const Vector r = oracles::gaussian_vector(kRows, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::rmatvec(A, r));
  set_counters(state, p);
}

void BM_rmatvec_reference(benchmark::State& state) {
  const Index p = state.range(0);
  const GradientMatrix& A = matrix(p);
  const Vector r = oracles::gaussian_vector(kRows, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::rmatvec(A, r));
  set_counters(state, p);
}

void BM_ht_step(benchmark::State& state) {
  const Index p = state.range(0);
  const Vector wbar = oracles::gaussian_vector(p, 4);
  const auto inst = build_problem(matrix(p), wbar, 1e-3, p / 10);
  const Vector w = kernels::hard_threshold(wbar, p / 10);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::ht_step(inst, w, p / 10, 1e-4));
  set_counters(state, p);
}

void BM_blockwise(benchmark::State& state) {
  const Index p = state.range(0);
  const Vector wbar = oracles::gaussian_vector(p, 5);
  const auto part = allocate_sparsity(wbar, p / 10, partition_layers(std::vector<Index>{p}, p / 8));
  BlockwiseOptions opts;
  opts.solver.max_outer = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_blockwise(matrix(p), wbar, 1e-3, 1.0, part, opts));
  }
  set_counters(state, p);
}

}  // namespace

BENCHMARK(BM_matvec_dense)->Arg(10000)->Arg(100000);
BENCHMARK(BM_matvec_dense_reference)->Arg(10000)->Arg(100000);
BENCHMARK(BM_matvec_sparse)->Arg(10000)->Arg(100000);
BENCHMARK(BM_matvec_sparse_reference)->Arg(10000)->Arg(100000);
BENCHMARK(BM_rmatvec)->Arg(10000)->Arg(100000);
BENCHMARK(BM_rmatvec_reference)->Arg(10000)->Arg(100000);
BENCHMARK(BM_ht_step)->Arg(10000)->Arg(100000);
BENCHMARK(BM_blockwise)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
