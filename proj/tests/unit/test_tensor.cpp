#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "roughmix/error.hpp"
#include "roughmix/tensor.hpp"

using namespace roughmix;

namespace {

TruncatedTensor random_tensor(int d, int n, std::uint64_t seed, double scalar) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TruncatedTensor x(d, n);
    for (double& v : x.raw()) v = u(gen);
    x.scalar() = scalar;
    return x;
}

// Brute-force product over explicit word concatenation.
TruncatedTensor oracle_mul(const TruncatedTensor& x, const TruncatedTensor& y) {
    const int d = x.dim(), n = x.level();
    TruncatedTensor out(d, n);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j)
            for (const Word& u : words_of_length(d, i))
                for (const Word& v : words_of_length(d, j)) {
                    Word uv = u;
                    uv.letters.insert(uv.letters.end(), v.letters.begin(), v.letters.end());
                    out[uv] += x[u] * y[v];
                }
    return out;
}

// Interleavings via bitmasks: bit k set means position k takes the next letter of v.
WordSum oracle_shuffle(const Word& u, const Word& v) {
    WordSum out;
    const std::size_t n = u.size() + v.size();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != v.size()) continue;
        Word w;
        std::size_t iu = 0, iv = 0;
        for (std::size_t k = 0; k < n; ++k) w.letters.push_back((mask >> k) & 1u ? v.letters[iv++] : u.letters[iu++]);
        ++out[w];
    }
    return out;
}

Word W(std::initializer_list<int> l) { return Word{std::vector<int>(l)}; }

}  // namespace

TEST(Tensor, Unit) {
    const auto one = unit(2, 3);
    EXPECT_EQ(one.scalar(), 1.0);
    const auto x = random_tensor(2, 3, 1, 0.7);
    EXPECT_EQ(mul(one, x), x);
    EXPECT_EQ(mul(x, one), x);
}

TEST(Tensor, ProductOfTwoLetters) {
    TruncatedTensor a = unit(2, 2), b = unit(2, 2);
    a[W({1})] = 1.0;
    b[W({2})] = 1.0;
    const auto p = mul(a, b);
    EXPECT_EQ(p.scalar(), 1.0);
    EXPECT_EQ(p[W({1})], 1.0);
    EXPECT_EQ(p[W({2})], 1.0);
    EXPECT_EQ(p[W({1, 2})], 1.0);
    EXPECT_EQ(p[W({2, 1})], 0.0);
}

TEST(Tensor, BinomialCube) {
    TruncatedTensor a = unit(1, 3);
    a[W({1})] = 1.0;
    const auto left = mul(mul(a, a), a);
    const auto right = mul(a, mul(a, a));
    EXPECT_EQ(left, right);
    EXPECT_EQ(left.scalar(), 1.0);
    EXPECT_EQ(left[W({1})], 3.0);
    EXPECT_EQ(left[W({1, 1})], 3.0);
    EXPECT_EQ(left[W({1, 1, 1})], 1.0);
}

TEST(Tensor, ProductMatchesWordOracle) {
    for (int d = 1; d <= 3; ++d)
        for (int n = 1; n <= 4; ++n) {
            const auto x = random_tensor(d, n, 10 + d * 7 + n, 0.3);
            const auto y = random_tensor(d, n, 20 + d * 7 + n, -1.2);
            EXPECT_LT(max_abs_diff(mul(x, y), oracle_mul(x, y)), 1e-13) << d << "," << n;
        }
}

TEST(Tensor, AssociativeAndUnital) {
    for (int d = 1; d <= 3; ++d)
        for (int n = 1; n <= 5; ++n) {
            const auto x = random_tensor(d, n, 100 + d + 10 * n, 1.0);
            const auto y = random_tensor(d, n, 200 + d + 10 * n, 0.5);
            const auto z = random_tensor(d, n, 300 + d + 10 * n, -2.0);
            const auto l = mul(mul(x, y), z);
            const auto r = mul(x, mul(y, z));
            double scale = 1.0;
            for (double v : l.raw()) scale = std::max(scale, std::abs(v));
            EXPECT_LE(max_abs_diff(l, r), 1e-12 * scale);
            EXPECT_EQ(mul(x, unit(d, n)), x);
        }
}

TEST(Tensor, ShapeMismatch) {
    EXPECT_THROW(mul(unit(2, 3), unit(3, 3)), ComposabilityError);
    EXPECT_THROW(mul(unit(2, 3), unit(2, 2)), ComposabilityError);
}

TEST(Tensor, SizeCap) {
    EXPECT_THROW(TruncatedTensor(10, 8), ConfigError);
    EXPECT_NO_THROW(TruncatedTensor(4, 6));
    EXPECT_THROW(TruncatedTensor(0, 2), DomainError);
    EXPECT_THROW(TruncatedTensor(2, 0), DomainError);
}

TEST(Tensor, ExpExamples) {
    EXPECT_EQ(exp(TruncatedTensor(2, 3)), unit(2, 3));
    TruncatedTensor x(1, 3);
    x[W({1})] = 2.0;
    const auto e = exp(x);
    EXPECT_NEAR(e.scalar(), 1.0, 1e-15);
    EXPECT_NEAR(e[W({1})], 2.0, 1e-15);
    EXPECT_NEAR(e[W({1, 1})], 2.0, 1e-15);
    EXPECT_NEAR(e[W({1, 1, 1})], 4.0 / 3.0, 1e-15);
    x.scalar() = 1.0;
    EXPECT_THROW(exp(x), DomainError);
}

TEST(Tensor, LogExamples) {
    EXPECT_LT(max_abs_diff(log(unit(3, 4)), TruncatedTensor(3, 4)), 1e-15);
    TruncatedTensor x = unit(1, 2);
    x[W({1})] = 1.0;
    x[W({1, 1})] = 0.5;
    const auto l = log(x);
    EXPECT_NEAR(l.scalar(), 0.0, 1e-15);
    EXPECT_NEAR(l[W({1})], 1.0, 1e-15);
    EXPECT_NEAR(l[W({1, 1})], 0.0, 1e-15);
    x.scalar() = 2.0;
    EXPECT_THROW(log(x), DomainError);
}

TEST(Tensor, ExpLogInverse) {
    for (int d = 1; d <= 3; ++d)
        for (int n = 1; n <= 5; ++n) {
            const auto x = random_tensor(d, n, 400 + d + 10 * n, 0.0);
            EXPECT_LT(max_abs_diff(log(exp(x)), x), 1e-10);
            const auto g = exp(x);
            EXPECT_LT(max_abs_diff(exp(log(g)), g), 1e-10);
        }
}

TEST(Tensor, CommutativeExponentials) {
    TruncatedTensor x(1, 5), y(1, 5);
    x[W({1})] = 0.7;
    y[W({1})] = -1.9;
    EXPECT_LT(max_abs_diff(mul(exp(x), exp(y)), exp(x + y)), 1e-12);
}

TEST(Tensor, Inverse) {
    const auto x = random_tensor(2, 4, 77, 1.0);
    EXPECT_LT(max_abs_diff(mul(x, inverse(x)), unit(2, 4)), 1e-12);
    EXPECT_LT(max_abs_diff(mul(inverse(x), x), unit(2, 4)), 1e-12);
}

TEST(Tensor, MulExpIncrementMatchesProduct) {
    for (int d = 1; d <= 3; ++d) {
        auto x = random_tensor(d, 5, 500 + d, 1.0);
        std::vector<double> v{0.3, -1.1, 0.8};
        v.resize(static_cast<std::size_t>(d));
        const auto expected = mul(x, exp(from_vector(v, 5)));
        mul_exp_increment(x, v);
        EXPECT_LT(max_abs_diff(x, expected), 1e-13);
    }
}

TEST(Tensor, StraightLineFactorialDecay) {
    const std::vector<double> delta{0.9, -1.7, 0.4};
    const auto e = exp(from_vector(delta, 6));
    double l1 = 0;
    for (double v : delta) l1 += std::abs(v);
    for (int n = 1; n <= 6; ++n) EXPECT_LE(e.level_norm(n), std::pow(l1, n) / std::tgamma(n + 1.0));
}

TEST(Shuffle, Examples) {
    const auto a = shuffle(W({1}), W({2}), 2);
    EXPECT_EQ(a, (WordSum{{W({1, 2}), 1}, {W({2, 1}), 1}}));
    EXPECT_EQ(shuffle(W({1}), Word{}, 2), (WordSum{{W({1}), 1}}));
    EXPECT_EQ(shuffle(W({1, 2}), W({3}), 3), (WordSum{{W({1, 2, 3}), 1}, {W({1, 3, 2}), 1}, {W({3, 1, 2}), 1}}));
    EXPECT_THROW(shuffle(W({1, 2}), W({3}), 2), DomainError);
}

TEST(Shuffle, MatchesBitmaskOracle) {
    const std::vector<Word> words{W({1}), W({1, 1}), W({2, 1}), W({1, 2, 1}), W({2, 2, 1}), W({3})};
    for (const auto& u : words)
        for (const auto& v : words) EXPECT_EQ(shuffle(u, v, 6), oracle_shuffle(u, v));
}

TEST(GroupLike, ExponentialsAndUnit) {
    EXPECT_TRUE(is_group_like(unit(2, 4), 1e-12).passed);
    TruncatedTensor x(3, 4);
    x[W({1})] = 0.4;
    x[W({2})] = -1.2;
    x[W({3})] = 2.0;
    const auto r = is_group_like(exp(x), 1e-10);
    EXPECT_TRUE(r.passed);
    EXPECT_LT(r.max_violation, 1e-10);
}

TEST(GroupLike, PureSecondLevelFails) {
    TruncatedTensor x = unit(1, 2);
    x[W({1, 1})] = 1.0;
    const auto r = is_group_like(x, 1e-8);
    EXPECT_FALSE(r.passed);
    // <x,1>^2 = 0 while <x, 1 sh 1> = 2 <x,11> = 2.
    EXPECT_NEAR(r.max_violation, 2.0, 1e-15);
    EXPECT_EQ(r.worst_u, W({1}));
    EXPECT_EQ(r.worst_v, W({1}));
}

TEST(GroupLike, ScalarPartCounts) {
    TruncatedTensor x = unit(2, 2);
    x.scalar() = 1.5;
    EXPECT_FALSE(is_group_like(x, 1e-8).passed);
}

TEST(Words, LexicographicLayout) {
    const auto ws = words_of_length(2, 2);
    ASSERT_EQ(ws.size(), 4u);
    EXPECT_EQ(ws[0], W({1, 1}));
    EXPECT_EQ(ws[1], W({1, 2}));
    EXPECT_EQ(ws[2], W({2, 1}));
    EXPECT_EQ(ws[3], W({2, 2}));
    TruncatedTensor x(2, 2);
    x[W({2, 1})] = 5.0;
    EXPECT_EQ(x.level_data(2)[2], 5.0);
}
