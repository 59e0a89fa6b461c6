// Parallel kernels against their serial references on random sample sets.
//
//   ./build/bench/bench_kernels --benchmark_filter=cross
//   OMP_NUM_THREADS=4 ./build/bench/bench_kernels

#include <random>

#include <benchmark/benchmark.h>

#include "nesy/vertex/kernels.hpp"

using namespace nesy::vertex;

namespace {

SampleSet random_set(std::size_t m, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    SampleSet s(d);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < m; ++i) {
        for (auto& v : row) v = n(rng);
        s.add(row);
    }
    return s;
}

constexpr std::size_t kDim = 768;

template <double (*Fn)(const SampleSet&, const SampleSet&, double)>
void cross_term(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    auto x = random_set(m, kDim, 1), y = random_set(m, kDim, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(x, y, 20.0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m * m));
}

template <double (*Fn)(const SampleSet&, const SampleSet&, double)>
void full_estimate(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    auto x = random_set(m, kDim, 3), y = random_set(m, kDim, 4);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(x, y, 20.0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(3 * m * m));
}

template <double (*Fn)(const SampleSet&)>
void median_sigma(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    auto x = random_set(m, kDim, 5);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(x));
}

}  // namespace

BENCHMARK(cross_term<mmd2_cross>)->Name("cross/parallel")->RangeMultiplier(4)->Range(8, 512);
BENCHMARK(cross_term<serial::mmd2_cross>)->Name("cross/serial")->RangeMultiplier(4)->Range(8, 512);
BENCHMARK(full_estimate<mmd2_full>)->Name("full/parallel")->RangeMultiplier(4)->Range(8, 512);
BENCHMARK(full_estimate<serial::mmd2_full>)->Name("full/serial")->RangeMultiplier(4)->Range(8, 512);
BENCHMARK(median_sigma<median_heuristic_sigma>)->Name("median/parallel")->RangeMultiplier(4)->Range(8, 256);
BENCHMARK(median_sigma<serial::median_heuristic_sigma>)->Name("median/serial")->RangeMultiplier(4)->Range(8, 256);

BENCHMARK_MAIN();
