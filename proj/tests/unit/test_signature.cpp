#include <gtest/gtest.h>

#include <cmath>

#include "roughmix/error.hpp"
#include "roughmix/lift.hpp"
#include "roughmix/rng.hpp"
#include "roughmix/signature.hpp"
#include "test_support.hpp"

using namespace roughmix;
using roughmix::testing::monomial_path;
using roughmix::testing::random_polyline;

namespace {

Word W(std::initializer_list<int> l) { return Word{std::vector<int>(l)}; }

double one_variation(const SamplePath& p) {
    double v = 0;
    for (Eigen::Index i = 1; i < p.values.rows(); ++i) v += (p.values.row(i) - p.values.row(i - 1)).cwiseAbs().maxCoeff();
    return v;
}

}  // namespace

TEST(Signature, StraightLineIsExponential) {
    Eigen::MatrixXd v(2, 3);
    v << 0, 0, 0, 0.8, -1.3, 0.45;
    const auto sig = signature(SamplePath(TimeGrid::uniform(1.0, 1), v), 6);
    const double delta[3] = {0.8, -1.3, 0.45};
    for (int n = 0; n <= 6; ++n)
        for (const Word& w : words_of_length(3, n)) {
            double expected = 1.0 / std::tgamma(n + 1.0);
            for (int letter : w.letters) expected *= delta[letter - 1];
            EXPECT_NEAR(sig[w], expected, 1e-12);
        }
}

TEST(Signature, PathThenReversalIsUnit) {
    const auto p = random_polyline(50, 2, 12);
    const auto sig = signature(concat(p, reverse(p)), 4);
    EXPECT_LT(max_abs_diff(sig, unit(2, 4)), 1e-9);
}

TEST(Signature, MonomialWords) {
    const auto sig = signature(monomial_path(4096), 2);
    EXPECT_NEAR(sig[W({1, 2})], 2.0 / 3.0, 1e-5);
    EXPECT_NEAR(sig[W({2, 1})], 1.0 / 3.0, 1e-5);
}

TEST(Signature, LevelOneIsTotalIncrement) {
    const auto p = random_polyline(20, 3, 2);
    const auto sig = signature(p, 3);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(sig[W({c + 1})], p.values(20, c) - p.values(0, c), 1e-12);
}

TEST(Signature, Errors) {
    const auto p = random_polyline(4, 10, 1);
    EXPECT_THROW(signature(p, 8), ConfigError);
    EXPECT_THROW(signature(p, 0), DomainError);
    EXPECT_THROW(signature(SamplePath(TimeGrid(), Eigen::MatrixXd::Zero(1, 2)), 2), DomainError);
}

TEST(Signature, GroupLike) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto r = is_group_like(signature(random_polyline(64, 2, s, 1.0, 0.3), 5), 1e-8);
        EXPECT_TRUE(r.passed) << r.max_violation;
    }
}

TEST(Signature, ChenMultiplicativity) {
    const auto p = random_polyline(30, 2, 5, 1.0, 0.4);
    const auto q = random_polyline(20, 2, 6, 1.0, 0.4);
    const auto joined = signature(concat(p, q), 4);
    EXPECT_LT(max_abs_diff(joined, mul(signature(p, 4), signature(q, 4))), 1e-10);
}

TEST(Signature, FactorialDecay) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto p = random_polyline(12, 3, 100 + s, 1.0, 0.7);
        const auto sig = signature(p, 5);
        const double v = one_variation(p);
        for (int n = 1; n <= 5; ++n) EXPECT_LE(sig.level_norm(n), std::pow(v, n) / std::tgamma(n + 1.0) + 1e-12);
    }
}

TEST(Signature, CollinearRefinementInvariant) {
    const auto p = random_polyline(10, 2, 8);
    // Insert the midpoint of every segment.
    std::vector<double> times;
    Eigen::MatrixXd v(21, 2);
    for (Eigen::Index i = 0; i < 10; ++i) {
        times.push_back(p.grid[static_cast<std::size_t>(i)]);
        times.push_back(0.5 * (p.grid[static_cast<std::size_t>(i)] + p.grid[static_cast<std::size_t>(i) + 1]));
        v.row(2 * i) = p.values.row(i);
        v.row(2 * i + 1) = 0.5 * (p.values.row(i) + p.values.row(i + 1));
    }
    times.push_back(p.grid.back());
    v.row(20) = p.values.row(10);
    const SamplePath refined(TimeGrid(times), v);
    EXPECT_LT(max_abs_diff(signature(refined, 4), signature(p, 4)), 1e-12);
}

TEST(Signature, ReversalIsInverse) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto p = random_polyline(40, 3, 20 + s, 1.0, 0.5);
        EXPECT_LT(max_abs_diff(mul(signature(p, 4), signature(reverse(p), 4)), unit(3, 4)), 1e-9);
    }
}

TEST(Signature, CoarseSignaturesApproachFine) {
    const auto path = sample(GmfbmSpec{{0.6, 0.8}, {1.0, 0.5}, 2, 1.0}, TimeGrid::dyadic(1.0, 12), 3,
                             SampleMethod::circulant);
    const auto fine = signature(path, 3);
    double prev = INFINITY;
    for (int m : {4, 6, 8, 10}) {
        const double err = max_abs_diff(signature(dyadic_nodes(path, m), 3), fine);
        EXPECT_LT(err, prev) << "m=" << m;
        prev = err;
    }
}

TEST(LevelFormulas, LinearPath) {
    Eigen::MatrixXd v(5, 2);
    for (int i = 0; i < 5; ++i) v.row(i) << 0.25 * i, -0.5 * i;
    const auto rep = level_formulas_check(SamplePath(TimeGrid::uniform(1.0, 4), v));
    EXPECT_LT(rep.level1_residual, 1e-15);
    EXPECT_LT(rep.adopted_residual, 1e-15);
    EXPECT_LT(rep.area_reading_residual, 1e-15);
    EXPECT_GT(rep.literal_residual, 0.1);
}

TEST(LevelFormulas, TwoSegmentPath) {
    Eigen::MatrixXd v(3, 2);
    v << 0, 0, 1.0, 0.5, 0.2, 2.0;
    const auto rep = level_formulas_check(SamplePath(TimeGrid::uniform(1.0, 2), v));
    EXPECT_LE(rep.adopted_residual, 1e-10);
    EXPECT_LE(rep.area_reading_residual, 1e-10);
}

TEST(LevelFormulas, ShuffleOnRandomPath) {
    const auto rep = level_formulas_check(random_polyline(63, 2, 77));
    EXPECT_LE(rep.shuffle_residual, 1e-10);
    EXPECT_LE(rep.adopted_residual, 1e-10);
}

TEST(ExpectedSignature, BrownianMoments) {
    const auto m = expected_signature_mc(GmfbmSpec{{0.5}, {1.0}}, TimeGrid::uniform(1.0, 32), 2, 8000, 5);
    EXPECT_LT(std::abs(m.mean[W({1})]), 4 * m.standard_error[W({1})]);
    EXPECT_LT(std::abs(m.mean[W({1, 1})] - 0.5), 4 * m.standard_error[W({1, 1})]);
}

TEST(ExpectedSignature, AntisymmetricPartVanishes) {
    MonteCarloOptions opts;
    opts.method = SampleMethod::circulant;
    const auto m = expected_signature_mc(GmfbmSpec{{0.5, 0.75}, {1.0, 2.0}, 2, 1.0}, TimeGrid::uniform(1.0, 64), 2,
                                         4000, 9, opts);
    for (int i = 1; i <= 2; ++i) EXPECT_LT(std::abs(m.mean[W({i})]), 4 * m.standard_error[W({i})]);
    const double anti = 0.5 * (m.mean[W({1, 2})] - m.mean[W({2, 1})]);
    const double se = std::hypot(m.standard_error[W({1, 2})], m.standard_error[W({2, 1})]);
    EXPECT_LT(std::abs(anti), 4 * se);
    EXPECT_THROW(expected_signature_mc(GmfbmSpec{{0.5}, {1.0}}, TimeGrid::uniform(1.0, 4), 2, 1, 1), ConfigError);
}

TEST(CrossTerm, BrownianAreaScalesQuadratically) {
    const std::vector<double> scales{0.125, 0.25, 0.5, 1.0};
    CrossTermOptions opts;
    opts.intervals = 256;
    const auto rep = cross_term_scaling(0.5, 0.5, scales, 4000, 3, opts);
    EXPECT_NEAR(rep.slope, 2.0, 0.2);
    EXPECT_DOUBLE_EQ(rep.expected_slope, 2.0);
}

TEST(CrossTerm, Errors) {
    const std::vector<double> one{1.0};
    EXPECT_THROW(cross_term_scaling(0.5, 0.75, one, 10, 1), DomainError);
    const std::vector<double> three{0.25, 0.5, 1.0};
    EXPECT_THROW(cross_term_scaling(0.2, 0.25, three, 10, 1), DomainError);
    const std::vector<double> off{0.3333, 0.5, 1.0};
    CrossTermOptions opts;
    opts.intervals = 8;
    EXPECT_THROW(cross_term_scaling(0.5, 0.75, off, 10, 1, opts), ResolutionError);
}
