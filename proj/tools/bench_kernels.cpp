#include <benchmark/benchmark.h>

#include <random>

#include "evisec/kernels.hpp"

namespace {

evisec::Mat random_matrix(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    evisec::Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

void bm_matmul_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    evisec::Mat a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
    for (auto _ : state) {
        evisec::Mat c = evisec::kernels::matmul_serial(a, b);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

void bm_matmul_parallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    evisec::Mat a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
    for (auto _ : state) {
        evisec::Mat c = evisec::kernels::matmul_parallel(a, b);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

}  // namespace

BENCHMARK(bm_matmul_serial)->Arg(64)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_matmul_parallel)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

BENCHMARK_MAIN();
