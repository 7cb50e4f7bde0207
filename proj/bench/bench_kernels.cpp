// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare.

#include <benchmark/benchmark.h>

#include "matflow/kernels.hpp"
#include "matflow/linalg.hpp"
#include "matflow/random.hpp"
#include "matflow/torus.hpp"

using namespace matflow;

namespace {

std::vector<Complex> block(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Complex> v(count);
    for (auto& z : v) z = rng.complex_normal();
    return v;
}

template <bool Parallel>
void BM_gemm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = block(n * n, 1), b = block(n * n, 2);
    std::vector<Complex> c(n * n);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::gemm(n, n, n, a, b, c);
        else
            kernels::serial::gemm(n, n, n, a, b, c);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <bool Parallel>
void BM_jacobi_rotate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    Matrix a = random_hermitian(n, rng);
    Matrix v = Matrix::identity(n);
    const kernels::JacobiRotation rot{0, n - 1, 0.8, 0.6, Complex(0.0, 1.0)};
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::jacobi_rotate(n, a.data(), v.data(), rot);
        else
            kernels::serial::jacobi_rotate(n, a.data(), v.data(), rot);
        benchmark::DoNotOptimize(a.data().data());
    }
}

void BM_superoperator(benchmark::State& state) {
    const TorusModel m = build_model(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(laplacian_superoperator(m));
}

void BM_eigenbasis(benchmark::State& state) {
    const TorusModel m = build_model(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compute_eigenbasis(m));
}

} // namespace

BENCHMARK(BM_gemm<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_gemm<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_jacobi_rotate<false>)->Arg(256)->Arg(1024);
BENCHMARK(BM_jacobi_rotate<true>)->Arg(256)->Arg(1024);
BENCHMARK(BM_superoperator)->Arg(8)->Arg(16);
BENCHMARK(BM_eigenbasis)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
