#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "roughmix/error.hpp"
#include "roughmix/lift.hpp"
#include "roughmix/rng.hpp"
#include "test_support.hpp"

using namespace roughmix;
using roughmix::testing::monomial_path;
using roughmix::testing::random_polyline;

namespace {

// int_s^t (X_u - X_s) (x) dX_u over a polyline refined `factor` times per
// segment, with the integrand taken at the left point (trapezoid = false)
// or averaged over each refined step (trapezoid = true).
Eigen::MatrixXd riemann_level2(const SamplePath& path, int factor, bool trapezoid) {
    const auto d = path.values.cols();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    const Eigen::RowVectorXd x0 = path.values.row(0);
    for (Eigen::Index i = 0; i + 1 < path.values.rows(); ++i) {
        const Eigen::RowVectorXd a = path.values.row(i), b = path.values.row(i + 1);
        for (int k = 0; k < factor; ++k) {
            const Eigen::RowVectorXd p = a + (b - a) * (double(k) / factor);
            const Eigen::RowVectorXd q = a + (b - a) * (double(k + 1) / factor);
            const Eigen::RowVectorXd left = trapezoid ? Eigen::RowVectorXd(0.5 * (p + q)) : p;
            acc += (left - x0).transpose() * (q - p);
        }
    }
    return acc;
}

// Exact sup over all partitions by enumerating subsets of interior nodes.
double brute_force_variation(const Eigen::VectorXd& x, double p) {
    const auto n = static_cast<int>(x.size());
    double best = 0;
    for (unsigned mask = 0; mask < (1u << (n - 2)); ++mask) {
        double s = 0;
        int prev = 0;
        for (int k = 1; k < n; ++k) {
            if (k < n - 1 && !((mask >> (k - 1)) & 1u)) continue;
            s += std::pow(std::abs(x(k) - x(prev)), p);
            prev = k;
        }
        best = std::max(best, s);
    }
    return std::pow(best, 1.0 / p);
}

SamplePath scalar_values(const std::vector<double>& v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
    return SamplePath(TimeGrid::uniform(1.0, v.size() - 1), m);
}

}  // namespace

TEST(Lift, SingleSegment) {
    Eigen::MatrixXd v(2, 2);
    v << 0, 0, 1.5, -2;
    const auto rp = lift_piecewise_linear(SamplePath(TimeGrid::uniform(1.0, 1), v));
    Eigen::Vector2d d(1.5, -2);
    EXPECT_TRUE(rp.inc2[0].isApprox(0.5 * d * d.transpose(), 1e-15));
}

TEST(Lift, TwoSegmentsMatchRiemannSum) {
    Eigen::MatrixXd v(3, 2);
    v << 0, 0, 1.0, 0.5, 0.2, 2.0;
    const SamplePath path(TimeGrid::uniform(1.0, 2), v);
    const Eigen::Vector2d d1(1.0, 0.5), d2(-0.8, 1.5);
    const Eigen::Matrix2d closed = 0.5 * d1 * d1.transpose() + 0.5 * d2 * d2.transpose() + d1 * d2.transpose();
    const auto total = lift_piecewise_linear(path).total();
    EXPECT_LT((total.level2 - closed).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((total.level2 - riemann_level2(path, 5000, true)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lift, MonomialArea) {
    const auto l2 = lift_piecewise_linear(monomial_path(2048)).total().level2;
    EXPECT_NEAR(0.5 * (l2(0, 1) - l2(1, 0)), 1.0 / 6.0, 1e-6);
    EXPECT_NEAR(l2(0, 1), 2.0 / 3.0, 1e-6);
    EXPECT_NEAR(l2(1, 0), 1.0 / 3.0, 1e-6);
}

TEST(Lift, NeedsTwoPoints) {
    EXPECT_THROW(lift_piecewise_linear(SamplePath(TimeGrid(), Eigen::MatrixXd::Zero(1, 2))), DomainError);
}

TEST(Lift, ChenAndGeometricInvariants) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto rp = lift_piecewise_linear(random_polyline(200, 3, s));
        EXPECT_LT(max_chen_defect(rp), 1e-10);
        EXPECT_LT(max_geometric_defect(rp), 1e-14);
        const auto total = rp.total();
        const Eigen::MatrixXd sym = 0.5 * (total.level2 + total.level2.transpose());
        EXPECT_LT((sym - 0.5 * total.level1 * total.level1.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Lift, LeftPointRiemannConvergesAtFirstOrder) {
    const auto path = random_polyline(16, 2, 4);
    const auto exact = lift_piecewise_linear(path).total().level2;
    const double e1 = (riemann_level2(path, 100, false) - exact).cwiseAbs().maxCoeff();
    const double e2 = (riemann_level2(path, 200, false) - exact).cwiseAbs().maxCoeff();
    EXPECT_GE(std::log2(e1 / e2), 0.9);
}

TEST(ChenCompose, ZeroLengthIsNeutral) {
    const auto rp = lift_piecewise_linear(random_polyline(10, 2, 1));
    Level2RoughPath empty;
    empty.times = {rp.end()};
    empty.inc1 = Eigen::MatrixXd(0, 2);
    const auto out = chen_compose(rp, empty);
    EXPECT_EQ(out.times, rp.times);
    EXPECT_TRUE(out.inc1 == rp.inc1);
    Level2RoughPath head;
    head.times = {0.0};
    head.inc1 = Eigen::MatrixXd(0, 2);
    EXPECT_TRUE(chen_compose(head, rp).inc1 == rp.inc1);
}

TEST(ChenCompose, SplitAndRecompose) {
    const auto rp = lift_piecewise_linear(random_polyline(40, 2, 2));
    const auto joined = chen_compose(rp.slice(0, 17), rp.slice(17, 40));
    EXPECT_EQ(joined.times, rp.times);
    const auto a = joined.total(), b = rp.total();
    EXPECT_LT((a.level1 - b.level1).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a.level2 - b.level2).cwiseAbs().maxCoeff(), 1e-12);
    const auto chained = chen(rp.slice(0, 17).total(), rp.slice(17, 40).total());
    EXPECT_LT((chained.level2 - b.level2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ChenCompose, TwoSegmentsMatchDirectLift) {
    Eigen::MatrixXd v(3, 2);
    v << 0, 0, 1.0, 0.5, 0.2, 2.0;
    const SamplePath path(TimeGrid::uniform(1.0, 2), v);
    const auto whole = lift_piecewise_linear(path);
    const auto joined = chen_compose(whole.slice(0, 1), whole.slice(1, 2)).total();
    EXPECT_LT((joined.level2 - whole.total().level2).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ChenCompose, TimeMismatch) {
    const auto rp = lift_piecewise_linear(random_polyline(10, 2, 1));
    EXPECT_THROW(chen_compose(rp.slice(0, 4), rp.slice(5, 10)), ComposabilityError);
}

TEST(DyadicApprox, AnchorsAndMidpoints) {
    const auto path = random_polyline(64, 2, 3);
    const auto approx = dyadic_approx(path, 3);
    for (int k = 0; k <= 8; ++k) EXPECT_TRUE(approx.values.row(8 * k) == path.values.row(8 * k));
    for (int k = 0; k < 8; ++k) {
        const Eigen::RowVectorXd mid = 0.5 * (path.values.row(8 * k) + path.values.row(8 * k + 8));
        EXPECT_LT((approx.values.row(8 * k + 4) - mid).cwiseAbs().maxCoeff(), 1e-14);
    }
    EXPECT_TRUE(dyadic_approx(path, 6).values.isApprox(path.values, 1e-15));
    EXPECT_THROW(dyadic_approx(path, 8), ResolutionError);
}

TEST(DyadicApprox, MissingPoints) {
    const auto path = random_polyline(10, 1, 3);
    EXPECT_THROW(dyadic_approx(path, 2), ResolutionError);
    EXPECT_NO_THROW(dyadic_approx(path, 2, true));
    const auto nodes = dyadic_nodes(path, 2, true);
    EXPECT_EQ(nodes.size(), 5u);
    EXPECT_NEAR(nodes.values(2, 0), path.values(5, 0), 1e-15);
}

TEST(PVariation, MonotoneScalarPathOneVariation) {
    const auto rp = lift_piecewise_linear(scalar_values({0, 0.5, 0.7, 1.6, 2.0, 3.5, 3.6, 4.0, 5.0}));
    EXPECT_NEAR(p_variation_level(rp, 1.0, 1, PartitionSchedule::exact()), 5.0, 1e-14);
    EXPECT_NEAR(p_variation_level(rp, 1.0, 1, PartitionSchedule::dyadic()), 5.0, 1e-14);
}

TEST(PVariation, SingleIncrement) {
    const auto rp = lift_piecewise_linear(scalar_values({0, -1.75}));
    for (double p : {1.0, 2.0, 3.3}) EXPECT_NEAR(p_variation_level(rp, p, 1, PartitionSchedule::exact()), 1.75, 1e-14);
}

TEST(PVariation, ExactDynamicProgramMatchesEnumeration) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto path = random_polyline(13, 1, 50 + s);
        const auto rp = lift_piecewise_linear(path);
        for (double p : {1.0, 2.0, 2.5}) {
            const double dp = p_variation_level(rp, p, 1, PartitionSchedule::exact());
            EXPECT_NEAR(dp, brute_force_variation(path.values.col(0), p), 1e-12);
        }
    }
}

TEST(PVariation, DyadicBelowExact) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto rp = lift_piecewise_linear(random_polyline(15, 1, 80 + s));
        EXPECT_LE(p_variation_level(rp, 2.5, 1, PartitionSchedule::dyadic()),
                  p_variation_level(rp, 2.5, 1, PartitionSchedule::exact()) + 1e-12);
        EXPECT_LE(p_variation_level(rp, 2.5, 1, PartitionSchedule::uniform({1, 2, 3})),
                  p_variation_level(rp, 2.5, 1, PartitionSchedule::exact()) + 1e-12);
    }
}

TEST(PVariation, Errors) {
    const auto rp = lift_piecewise_linear(random_polyline(8, 2, 1));
    EXPECT_THROW(p_variation(rp, 0.5), DomainError);
    EXPECT_THROW(p_variation_level(rp, 1.5, 2, PartitionSchedule::dyadic()), DomainError);
    EXPECT_NO_THROW(p_variation(rp, 2.5));
    EXPECT_GE(p_variation(rp, 2.5), p_variation_level(rp, 2.5, 1, {}));
}

TEST(PrefixLift, MatchesSequentialChen) {
    const auto rp = lift_piecewise_linear(random_polyline(30, 3, 9));
    const PrefixLift prefix(rp);
    for (auto [a, b] : {std::pair<std::size_t, std::size_t>{0, 30}, {3, 17}, {12, 13}, {29, 30}}) {
        const auto inc = rp.over(a, b);
        EXPECT_LT((prefix.level1(a, b) - inc.level1).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((prefix.level2(a, b) - inc.level2).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(MixedLevel2, ComponentReconstruction) {
    const GmfbmSpec spec{{0.45, 0.8}, {1.3, -0.6}, 2, 1.0};
    const auto path = sample(spec, TimeGrid::uniform(1.0, 512), 4, SampleMethod::circulant);
    const auto direct = lift_piecewise_linear(path).total().level2;
    EXPECT_LT((mixed_level2(path) - direct).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_THROW(mixed_level2(SamplePath(path.grid, path.values)), DomainError);
}

TEST(MomentScaling, SecondLevelScalesLikeFourH) {
    const double h = 0.6;
    const GmfbmSampler sampler(GmfbmSpec{{h}, {1.0}, 2, 1.0}, TimeGrid::dyadic(1.0, 10), SampleMethod::circulant);
    const std::vector<std::size_t> nodes{64, 128, 256, 512};
    std::vector<double> moment(nodes.size(), 0.0);
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const PrefixLift prefix(lift_piecewise_linear(sampler.draw(derive_seed(31, static_cast<std::uint64_t>(i)))));
        for (std::size_t j = 0; j < nodes.size(); ++j) moment[j] += prefix.level2(0, nodes[j]).squaredNorm() / n;
    }
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        lx.push_back(std::log(nodes[j] / 1024.0));
        ly.push_back(std::log(moment[j]));
    }
    EXPECT_NEAR(roughmix::testing::ols_slope(lx, ly), 4 * h, 0.25);
}

TEST(Cauchy, ZeroPathHasZeroDistances) {
    const SamplePath zero(TimeGrid::dyadic(1.0, 8), Eigen::MatrixXd::Zero(257, 2));
    for (double d : cauchy_distances(zero, 1, 6, 2.5)) EXPECT_EQ(d, 0.0);
}

TEST(Cauchy, SmoothPathDecaysGeometrically) {
    const auto d = cauchy_distances(monomial_path(1024), 1, 8, 2.1);
    ASSERT_EQ(d.size(), 8u);
    for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LT(d[i], 0.75 * d[i - 1]) << "m=" << i + 1;
}

TEST(Cauchy, DiagnosticDecreasesAndWarns) {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 20; ++i) seeds.push_back(derive_seed(1, i));
    CauchyOptions opts;
    opts.m_min = 2;
    const auto rep = cauchy_diagnostic(GmfbmSpec{{0.7}, {1.0}}, 7, 2.1, seeds, opts);
    EXPECT_EQ(rep.rows.size(), 20u * 6u);
    EXPECT_TRUE(rep.strictly_decreasing);
    EXPECT_LT(rep.log2_decay_slope, 0.0);
    EXPECT_TRUE(rep.warnings.empty());
    const auto warned = cauchy_diagnostic(GmfbmSpec{{0.4}, {1.0}}, 4, 2.1, seeds, opts);
    EXPECT_FALSE(warned.warnings.empty());
}

TEST(Cauchy, ThreadCountDoesNotChangeResults) {
    const std::vector<std::uint64_t> seeds{7, 8, 9};
    CauchyOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = cauchy_diagnostic(GmfbmSpec{{0.6}, {1.0}}, 5, 2.1, seeds, one);
    const auto b = cauchy_diagnostic(GmfbmSpec{{0.6}, {1.0}}, 5, 2.1, seeds, four);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].d_p, b.rows[i].d_p);
}

TEST(Sharpness, BrownianAreaStabilizes) {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 50; ++s) seeds.push_back(derive_seed(3, s));
    SharpnessOptions opts;
    opts.m_min = 4;
    const auto rep = sharpness_probe(0.5, 8, seeds, opts);
    EXPECT_TRUE(rep.stabilizes) << rep.relative_spread;
    EXPECT_FALSE(rep.grows);
    EXPECT_THROW(sharpness_probe(0.7, 8, seeds, opts), DomainError);
}

TEST(CovarianceDecay, Table) {
    const std::vector<double> gaps{0.0, 1.0, 2.0, 4.0, 8.0};
    for (const auto& row : covariance_decay_table(0.5, 1.0, gaps)) EXPECT_NEAR(row.covariance, 0.0, 1e-14);
    const auto rows = covariance_decay_table(0.75, 1.0, gaps);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GT(rows[i].covariance, 0.0);
        EXPECT_LT(rows[i].covariance, rows[i - 1].covariance);
    }
    EXPECT_TRUE(std::isnan(rows[0].bound_shape) || rows[0].gap >= 1.0);
    EXPECT_NEAR(rows[2].bound_shape, std::pow(2.0, -0.5), 1e-14);
}

TEST(Level2RoughPath, Validate) {
    auto rp = lift_piecewise_linear(random_polyline(4, 2, 1));
    EXPECT_NO_THROW(rp.validate());
    rp.times[2] = rp.times[1];
    EXPECT_THROW(rp.validate(), DomainError);
}
