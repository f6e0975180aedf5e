#include <benchmark/benchmark.h>

#include "wtlab/ensemble.hpp"
#include "wtlab/harness.hpp"
#include "wtlab/kernels.hpp"

namespace {

using namespace wtlab;

Exec mode(const benchmark::State& st) { return st.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_VarianceMatvec(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const RMat s = RMat::Constant(n, n, 1.0 / n);
  const CVec x = CVec::Random(n);
  CVec y;
  for (auto _ : st) {
    kernels::variance_matvec(s, x, y, mode(st));
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_ChainTrace2(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const RVec lambda = RVec::LinSpaced(n, -2.0, 2.0);
  const CMat a1 = CMat::Random(n, n), a2 = CMat::Random(n, n);
  for (auto _ : st) {
    cplx v = kernels::chain_trace2(lambda, a1, a2, cplx(0.1, 0.05), cplx(0.1, -0.05), mode(st));
    benchmark::DoNotOptimize(v);
  }
}

void BM_OverlapDeviation(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const CMat at = CMat::Random(n, n);
  const RVec c = RVec::Zero(n);
  std::vector<int> bulk;
  for (int j = n / 8; j < n - n / 8; ++j) bulk.push_back(j);
  for (auto _ : st) {
    double v = kernels::max_overlap_deviation(at, c, bulk, mode(st));
    benchmark::DoNotOptimize(v);
  }
}

// Sample loop of the Monte Carlo harness: eigendecompositions distributed over samples.
void BM_PhiStats(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const EnsembleSpec e = build_ensemble(flat_profile(), n);
  const CMat a = make_observable({ObservableSpec::Kind::Sign}, n);
  HarnessOptions opt;
  opt.exec = mode(st);
  for (auto _ : st) {
    LocalLawStats s = phi_stats(e, cplx(0.0, 0.1), cplx(0.0, -0.1), a, a, 8, 7, opt);
    benchmark::DoNotOptimize(s.raw2.data());
  }
}

}  // namespace

BENCHMARK(BM_VarianceMatvec)->ArgsProduct({{512, 2048}, {0, 1}});
BENCHMARK(BM_ChainTrace2)->ArgsProduct({{512, 1024}, {0, 1}});
BENCHMARK(BM_OverlapDeviation)->ArgsProduct({{512, 1024}, {0, 1}});
BENCHMARK(BM_PhiStats)->ArgsProduct({{128}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
