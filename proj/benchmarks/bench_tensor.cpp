#include <benchmark/benchmark.h>

#include <random>

#include "roughmix/signature.hpp"
#include "roughmix/tensor.hpp"

namespace {

roughmix::TruncatedTensor random_tensor(int dim, int level, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    roughmix::TruncatedTensor x(dim, level);
    for (double& c : x.raw()) c = normal(gen);
    return x;
}

void BM_TensorMul(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const int level = static_cast<int>(state.range(1));
    const auto a = random_tensor(dim, level, 1), b = random_tensor(dim, level, 2);
    for (auto _ : state) benchmark::DoNotOptimize(roughmix::mul(a, b));
    state.counters["entries"] = static_cast<double>(a.raw().size());
}
BENCHMARK(BM_TensorMul)->Args({2, 4})->Args({2, 8})->Args({3, 6})->Args({5, 4});

void BM_TensorExp(benchmark::State& state) {
    auto x = random_tensor(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 3);
    x.scalar() = 0.0;
    for (auto _ : state) benchmark::DoNotOptimize(roughmix::exp(x));
}
BENCHMARK(BM_TensorExp)->Args({2, 6})->Args({3, 4});

void BM_Signature(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const int dim = static_cast<int>(state.range(1));
    std::mt19937_64 gen(4);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) + 1, dim);
    for (Eigen::Index i = 1; i < v.rows(); ++i)
        for (Eigen::Index c = 0; c < dim; ++c) v(i, c) = v(i - 1, c) + normal(gen);
    const roughmix::SamplePath path(roughmix::TimeGrid::uniform(1.0, n), v);
    for (auto _ : state) benchmark::DoNotOptimize(roughmix::signature(path, 4));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Signature)->Args({1024, 2})->Args({4096, 2})->Args({1024, 3});

}  // namespace
