// SPDX-License-Identifier: Apache-2.0
//
// Schur-complement assembly and operator application: OpenMP kernels against
// the serial dense references, on the marginal rows of 4- and 5-qubit chains.

#include <benchmark/benchmark.h>

#include <random>

#include "etp/marginals.hpp"
#include "etp/sdp_kernels.hpp"
#include "etp/states.hpp"

namespace {

using namespace etp;
using namespace etp::sdp::kernels;

struct Fixture {
  std::vector<BlockOperators> blocks;
  std::vector<CMatrix> x, zinv;
  int m = 0;
};

CMatrix random_pd(int n, std::mt19937& g) {
  std::normal_distribution<double> nd;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cd(nd(g), nd(g));
  return a * a.adjoint() + CMatrix::Identity(n, n);
}

Fixture make_fixture(int n) {
  const Dims dims(static_cast<std::size_t>(n), 2);
  const DensityMatrix rho = DensityMatrix::from_pure(dims, haar_pure(n, 2, 1, 0));
  MarginalSpec spec;
  spec.dims = dims;
  for (int i = 0; i + 1 < n; ++i) spec.add(SubsystemSet{i, i + 1}, partial_trace(rho, SubsystemSet{i, i + 1}));
  const MarginalMap map = build_marginal_map(spec);
  Fixture f;
  BlockOperators b;
  b.dim = 1 << n;
  for (std::size_t k = 0; k < map.rows.size(); ++k) {
    b.rows.push_back(static_cast<int>(k));
    SparseMatrix op = map.rows[k].lhs.terms[0].matrix;
    canonicalize(op);
    b.ops.push_back(std::move(op));
  }
  f.m = static_cast<int>(map.rows.size());
  f.blocks.push_back(std::move(b));
  std::mt19937 g(3);
  f.x.push_back(random_pd(1 << n, g));
  f.zinv.push_back(random_pd(1 << n, g));
  return f;
}

void BM_SchurParallel(benchmark::State& st) {
  const Fixture f = make_fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(schur_complement(f.blocks, f.x, f.zinv, f.m, true));
}

void BM_SchurSerialKernel(benchmark::State& st) {
  const Fixture f = make_fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(schur_complement(f.blocks, f.x, f.zinv, f.m, false));
}

void BM_SchurReference(benchmark::State& st) {
  const Fixture f = make_fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(schur_complement_reference(f.blocks, f.x, f.zinv, f.m));
}

void BM_ApplyParallel(benchmark::State& st) {
  const Fixture f = make_fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(apply_operator(f.blocks, f.x, f.m, true));
}

void BM_ApplyReference(benchmark::State& st) {
  const Fixture f = make_fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(apply_operator_reference(f.blocks, f.x, f.m));
}

}  // namespace

BENCHMARK(BM_SchurParallel)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchurSerialKernel)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchurReference)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyParallel)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ApplyReference)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
