#include <benchmark/benchmark.h>

#include <random>

#include "pidc/baselines.hpp"
#include "pidc/pid.hpp"
#include "pidc/quantnet.hpp"
#include "support/joints.hpp"

using namespace pidc;

static void BM_EnumerateLattice(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(RedundancyLattice::enumerate(n).size());
}
BENCHMARK(BM_EnumerateLattice)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

static JointDistribution bench_joint(int n, int points) {
  std::mt19937_64 rng(42);
  return testing::random_joint(rng, n, 10, 8, points);
}

static void BM_Redundancies(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto dist = bench_joint(n, static_cast<int>(state.range(1)));
  const auto lattice = shared_lattice(n);
  RedundancyOptions o;
  o.threads = static_cast<unsigned>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(isx_redundancies(dist, lattice, o).values.data());
  state.counters["support"] = static_cast<double>(dist.support_size());
}
BENCHMARK(BM_Redundancies)
    ->Args({3, 500, 1})
    ->Args({4, 500, 1})
    ->Args({5, 500, 1})
    ->Args({5, 500, 4})
    ->Unit(benchmark::kMillisecond);

static void BM_MoebiusInversion(benchmark::State& state) {
  const auto lattice = shared_lattice(5);
  std::vector<double> red(lattice->size(), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(moebius_invert(*lattice, red).data());
}
BENCHMARK(BM_MoebiusInversion)->Unit(benchmark::kMillisecond);

static void BM_DirectedDifferences(benchmark::State& state) {
  const auto dist = bench_joint(static_cast<int>(state.range(0)), 2000);
  for (auto _ : state) benchmark::DoNotOptimize(directed_differences(dist).values.data());
}
BENCHMARK(BM_DirectedDifferences)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_TrainEpoch(benchmark::State& state) {
  const auto data = synthetic_dataset();
  QuantizedNet net(synthetic_net_config(1));
  TrainOptions o;
  o.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(net, data, o).final_accuracy);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
