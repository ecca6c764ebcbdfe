#include <benchmark/benchmark.h>

#include <random>

#include "seqalloc/alloc.hpp"
#include "seqalloc/iep.hpp"
#include "seqalloc/linalg.hpp"
#include "seqalloc/verify.hpp"

using namespace seqalloc;

namespace {

alloc::ProblemInstance equal_ish(alloc::Mode mode, std::size_t n, std::size_t k) {
  std::mt19937_64 rng(k * 131 + n);
  std::uniform_real_distribution<double> d(0.5, 1.0);
  alloc::ProblemInstance inst{n, std::vector<double>(k), mode};
  for (double& v : inst.demands) v = d(rng);
  const double scale = (mode == alloc::Mode::kRateConstrained ? 2.0 : 20.0) / inst.total();
  for (double& v : inst.demands) v *= scale;
  return inst;
}

void BM_MinPower(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto inst = equal_ish(alloc::Mode::kRateConstrained, n, k);
  const auto order = alloc::identity_order(k);
  for (auto _ : state) benchmark::DoNotOptimize(alloc::allocate_min_power(inst, order));
}
BENCHMARK(BM_MinPower)
    ->ArgsProduct({{16}, {100, 1000, 10000}})
    ->Unit(benchmark::kMicrosecond);

void BM_MaxRate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto inst = equal_ish(alloc::Mode::kPowerConstrained, n, k);
  const auto order = alloc::identity_order(k);
  for (auto _ : state) benchmark::DoNotOptimize(alloc::allocate_max_rate(inst, order));
}
BENCHMARK(BM_MaxRate)->ArgsProduct({{4, 16, 64}, {1000}})->Unit(benchmark::kMicrosecond);

void BM_ConverseWeyl(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> lam(n);
  std::vector<double> hat(n);
  for (std::size_t i = 0; i < n; ++i) {
    lam[i] = static_cast<double>(2 * (n - i));
    hat[i] = lam[i] + 1.0;
  }
  const linalg::EigenDecomposition eig{linalg::Spectrum(lam), linalg::OrthoBasis::identity(n)};
  const linalg::Spectrum target(hat);
  for (auto _ : state) benchmark::DoNotOptimize(iep::converse_weyl(eig, target));
}
BENCHMARK(BM_ConverseWeyl)->RangeMultiplier(4)->Range(4, 256);

void BM_EigOracle(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(n);
  std::normal_distribution<double> g;
  linalg::SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a.set(i, j, g(rng));
  for (auto _ : state) benchmark::DoNotOptimize(linalg::eig_oracle(a));
}
BENCHMARK(BM_EigOracle)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMicrosecond);

void BM_RegionExhaustive(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto inst = equal_ish(alloc::Mode::kPowerConstrained, 4, k);
  const auto al = alloc::allocate_max_rate(inst, alloc::identity_order(k)).allocation;
  verify::SubsetPolicy policy;
  policy.force_exhaustive = true;
  for (auto _ : state) benchmark::DoNotOptimize(verify::region_membership(al.S, al.p, al.r, policy));
}
BENCHMARK(BM_RegionExhaustive)->DenseRange(8, 16, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
