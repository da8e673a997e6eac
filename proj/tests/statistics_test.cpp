#include <gtest/gtest.h>

#include <random>

#include "nsqp/error.hpp"
#include "nsqp/rng.hpp"
#include "nsqp/statistics.hpp"

using namespace nsqp;

TEST(Philox, KnownAnswerVectors) {
    using B = std::array<std::uint32_t, 4>;
    EXPECT_EQ(PhiloxStream(0, 0).next_block(), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(PhiloxStream(~0ull, ~0ull, ~0ull).next_block(), (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    const std::uint64_t seed = (std::uint64_t{0x299f31d0} << 32) | 0xa4093822;
    const std::uint64_t stream = (std::uint64_t{0x03707344} << 32) | 0x13198a2e;
    const std::uint64_t block = (std::uint64_t{0x85a308d3} << 32) | 0x243f6a88;
    EXPECT_EQ(PhiloxStream(seed, stream, block).next_block(), (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, NormalsHaveUnitVarianceAndStreamsDiffer) {
    PhiloxStream a(1, 0), b(1, 1);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = a.normal();
        sum += x;
        sq += x * x;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.01);
    PhiloxStream a2(1, 0);
    EXPECT_NE(a2.normal(), b.normal());
    for (int i = 0; i < 1000; ++i) {
        const double u = b.uniform();
        EXPECT_GT(u, 0.0);
        EXPECT_LE(u, 1.0);
        EXPECT_LT(b.index(7), 7u);
    }
}

TEST(Statistics, PairwiseSumIsAccurate) {
    std::vector<double> x(1 << 20, 0.1);
    EXPECT_NEAR(pairwise_sum(x), 0.1 * x.size(), 1e-9);
    EXPECT_THROW(pairwise_mean(std::vector<double>{}), ValidationError);
}

TEST(Statistics, QuantileAndLineFit) {
    const std::vector<double> x{3, 1, 2, 4};
    EXPECT_DOUBLE_EQ(quantile(x, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile(x, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(quantile(x, 0.5), 2.5);
    const std::vector<double> xs{1, 2, 3, 4}, ys{3, 5, 7, 9};
    const LineFit f = ols_fit(xs, ys);
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 1.0, 1e-12);
    EXPECT_THROW(ols_fit(std::vector<double>{1, 1}, std::vector<double>{1, 2}), ValidationError);
}

TEST(Statistics, BootstrapIsDeterministicAndCoversTheMean) {
    PhiloxStream rng(3, 3);
    std::vector<double> x(500);
    for (double& v : x) v = 5.0 + rng.normal();
    const auto a = bootstrap_mean_ci(x, 9, 1), b = bootstrap_mean_ci(x, 9, 1);
    EXPECT_EQ(a, b);
    EXPECT_LT(a[0], pairwise_mean(x));
    EXPECT_GT(a[1], pairwise_mean(x));
    EXPECT_NEAR(a[1] - a[0], 2 * 1.96 / std::sqrt(500.0), 0.05);
}

TEST(Statistics, KolmogorovSmirnov) {
    std::mt19937_64 gen(1);
    std::exponential_distribution<double> e1(1.0), e2(2.0);
    std::vector<double> a(1000), b(1000), c(1000);
    for (double& v : a) v = e1(gen);
    for (double& v : b) v = e1(gen);
    for (double& v : c) v = e2(gen);
    EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
    EXPECT_LT(ks_two_sample(a, c).p_value, 1e-6);
    EXPECT_DOUBLE_EQ(ks_two_sample(a, a).statistic, 0.0);
}
