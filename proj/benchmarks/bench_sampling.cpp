#include <benchmark/benchmark.h>

#include "roughmix/gmfbm.hpp"

namespace {

void BM_Sample(benchmark::State& state) {
    const auto method = state.range(1) ? roughmix::SampleMethod::circulant : roughmix::SampleMethod::cholesky;
    const roughmix::GmfbmSampler sampler(roughmix::GmfbmSpec{{0.5, 0.75}, {1.0, 2.0}},
                                         roughmix::TimeGrid::uniform(1.0, static_cast<std::size_t>(state.range(0))),
                                         method);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(seed++));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sample)->Args({256, 0})->Args({1024, 0})->Args({1024, 1})->Args({1 << 16, 1});

void BM_SamplerSetup(benchmark::State& state) {
    const auto method = state.range(1) ? roughmix::SampleMethod::circulant : roughmix::SampleMethod::cholesky;
    for (auto _ : state)
        benchmark::DoNotOptimize(roughmix::GmfbmSampler(
            roughmix::GmfbmSpec{{0.3}, {1.0}}, roughmix::TimeGrid::uniform(1.0, static_cast<std::size_t>(state.range(0))),
            method));
}
BENCHMARK(BM_SamplerSetup)->Args({1024, 0})->Args({1024, 1})->Args({1 << 16, 1});

}  // namespace
