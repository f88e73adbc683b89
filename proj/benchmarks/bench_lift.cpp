#include <benchmark/benchmark.h>

#include "roughmix/gmfbm.hpp"
#include "roughmix/lift.hpp"
#include "roughmix/rde.hpp"

namespace {

roughmix::SamplePath driver(int level) {
    return roughmix::sample(roughmix::GmfbmSpec{{0.6}, {1.0}, 2}, roughmix::TimeGrid::dyadic(1.0, level), 1,
                            roughmix::SampleMethod::circulant);
}

void BM_LiftPiecewiseLinear(benchmark::State& state) {
    const auto path = driver(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(roughmix::lift_piecewise_linear(path));
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(BM_LiftPiecewiseLinear)->Arg(10)->Arg(14);

void BM_CauchyDistances(benchmark::State& state) {
    const int m_max = static_cast<int>(state.range(0));
    const auto path = driver(m_max + 1);
    for (auto _ : state) benchmark::DoNotOptimize(roughmix::cauchy_distances(path, 4, m_max, 2.1));
}
BENCHMARK(BM_CauchyDistances)->Arg(8)->Arg(10);

void BM_DavieSolve(benchmark::State& state) {
    const auto rp = roughmix::lift_piecewise_linear(driver(static_cast<int>(state.range(0))));
    const auto field = roughmix::bounded_sigmoid_field(2);
    const Eigen::VectorXd y0 = Eigen::VectorXd::Constant(2, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(roughmix::solve(rp, field, y0));
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(BM_DavieSolve)->Arg(10)->Arg(14);

}  // namespace
