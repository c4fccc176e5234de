#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "csd/besov.hpp"
#include "csd/dirac.hpp"
#include "csd/illposed.hpp"
#include "csd/nullforms.hpp"

using namespace csd;

namespace {

ScalarField noise(const Grid2D& g, std::uint64_t seed) {
    ScalarField f(g);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    for (auto& z : f.v) z = cplx(N(rng), N(rng));
    return f;
}

}  // namespace

static void BM_ToFourier(benchmark::State& state) {
    const Grid2D g(static_cast<int>(state.range(0)), 2.0 * M_PI);
    const ScalarField f = noise(g, 1);
    for (auto _ : state) benchmark::DoNotOptimize(to_fourier(f));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ToFourier)->RangeMultiplier(2)->Range(32, 256);

static void BM_Halfwave(benchmark::State& state) {
    const Grid2D g(static_cast<int>(state.range(0)), 2.0 * M_PI);
    const SpinorField f(noise(g, 2), noise(g, 3));
    for (auto _ : state) benchmark::DoNotOptimize(halfwave(f, 0.1, Sign::plus));
}
BENCHMARK(BM_Halfwave)->Arg(64)->Arg(128);

static void BM_Projection(benchmark::State& state) {
    Vec2 xi{0.3, -1.7};
    for (auto _ : state) {
        benchmark::DoNotOptimize(projection(xi, Sign::minus));
        xi[0] += 1e-9;
    }
}
BENCHMARK(BM_Projection);

static void BM_BlockDecompose(benchmark::State& state) {
    const Grid2D g(32, 2.0 * M_PI);
    const TimeAxis a{0.0, 0.125, 64};
    SpaceTimeField u = spectrum_field(g, a, 2);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N;
    for (auto& c : u.spec)
        for (auto& z : c) z = cplx(N(rng), N(rng));
    for (auto _ : state) benchmark::DoNotOptimize(decompose(u, Sign::plus));
}
BENCHMARK(BM_BlockDecompose);

static void BM_NullformB(benchmark::State& state) {
    const Grid2D g(32, 2.0 * M_PI);
    const TimeAxis a{0.0, 0.125, 64};
    const SpaceTimeField u1 = random_block_field(g, a, {1, 2, Sign::plus}, 5);
    const SpaceTimeField u2 = random_block_field(g, a, {2, 2, Sign::minus}, 6);
    for (auto _ : state) benchmark::DoNotOptimize(nullform_B(u1, u2, Sign::plus, Sign::minus));
}
BENCHMARK(BM_NullformB)->Unit(benchmark::kMillisecond);

static void BM_M12345(benchmark::State& state) {
    const std::array<Sign, 5> s{Sign::plus, Sign::minus, Sign::plus, Sign::plus, Sign::minus};
    const Vec2 xi{40.0, 1.0}, eta{-3.0, 2.5}, zeta{39.0, -4.0};
    double t = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(m12345(t, xi, eta, zeta, s));
        t += 1e-12;
    }
}
BENCHMARK(BM_M12345);

static void BM_M12345Oracle(benchmark::State& state) {
    const std::array<Sign, 5> s{Sign::plus, Sign::minus, Sign::plus, Sign::plus, Sign::minus};
    const Vec2 xi{40.0, 1.0}, eta{-3.0, 2.5}, zeta{39.0, -4.0};
    for (auto _ : state) benchmark::DoNotOptimize(m12345_oracle(0.01, xi, eta, zeta, s));
}
BENCHMARK(BM_M12345Oracle)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
