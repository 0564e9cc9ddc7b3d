#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sdews/noise.hpp"

using namespace sdews;

TEST(BrownianPath, StartsAtZero) {
    BrownianPath w(Rng(1));
    EXPECT_EQ(w.sample_at(0.0), 0.0);
    EXPECT_THROW((void)w.sample_at(-1.0), Error);
}

TEST(BrownianPath, MemoisedValuesAreStable) {
    BrownianPath w(Rng(2));
    const double a = w.sample_at(1.5);
    const double b = w.sample_at(0.7);
    const double c = w.sample_at(3.0);
    EXPECT_EQ(w.sample_at(1.5), a);
    EXPECT_EQ(w.sample_at(0.7), b);
    EXPECT_EQ(w.sample_at(3.0), c);
    EXPECT_EQ(w.known_times().size(), 4u);
}

TEST(BrownianPath, BridgeMomentsWithEqualEndpoints) {
    BrownianPath w(Rng(3));
    w.pin(1.0, 0.5);
    w.pin(3.0, 0.5);
    const auto m = w.bridge_moments(2.0);
    EXPECT_DOUBLE_EQ(m.mean, 0.5);
    EXPECT_DOUBLE_EQ(m.variance, 0.5);
}

TEST(BrownianPath, BridgeDrawsMatchClosedForm) {
    const int n = 20000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        BrownianPath w(make_rng(8, Stream::Brownian, i));
        w.pin(1.0, 0.5);
        w.pin(3.0, 0.5);
        const double x = w.sample_at(2.0);
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    EXPECT_LT(std::abs(mean - 0.5), 3.0 * std::sqrt(0.5 / n));
    EXPECT_NEAR(var, 0.5, 0.05 * 0.5);
}

TEST(BrownianPath, IncrementLaw) {
    const int n = 100000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        BrownianPath w(make_rng(9, Stream::Brownian, i));
        const double d = w.increment(1.0, 2.0);
        sum += d;
        sum_sq += d * d;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(1.0 / n));
    EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(BrownianPath, MarginalVarianceIndependentOfQueryOrder) {
    // query the far point first so the nearer ones come from bridges
    const int n = 10000;
    const std::vector<double> ts{2.0, 0.5, 1.0};
    std::vector<double> sum_sq(3, 0.0);
    for (int i = 0; i < n; ++i) {
        BrownianPath w(make_rng(10, Stream::Brownian, i));
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const double v = w.sample_at(ts[k]);
            sum_sq[k] += v * v;
        }
    }
    for (std::size_t k = 0; k < ts.size(); ++k) {
        EXPECT_NEAR(sum_sq[k] / n, ts[k], 0.05 * ts[k]) << "t = " << ts[k];
    }
}

TEST(BrownianPath, IncrementIdentities) {
    BrownianPath w(Rng(4));
    EXPECT_EQ(w.increment(1.0, 1.0), 0.0);
    const double wt = w.sample_at(0.8);
    EXPECT_EQ(w.increment(0.0, 0.8), wt);
    const double su = w.increment(0.3, 1.9);
    const double st = w.increment(0.3, 1.1);
    const double tu = w.increment(1.1, 1.9);
    EXPECT_NEAR(su, st + tu, 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(st) + std::abs(tu) + 1.0));
    EXPECT_THROW((void)w.increment(2.0, 1.0), Error);
}

TEST(BrownianPath, CoarseQueriesSeeFineValues) {
    BrownianPath w(Rng(5));
    std::vector<double> fine;
    for (int i = 1; i <= 64; ++i) fine.push_back(w.sample_at(i / 64.0));
    const std::size_t known = w.known_times().size();
    for (int i = 4; i <= 64; i += 4) EXPECT_EQ(w.sample_at(i / 64.0), fine[i - 1]);
    EXPECT_EQ(w.known_times().size(), known);
}

TEST(BrownianPath, SameSeedSameQueriesSameValues) {
    BrownianPath a(Rng(6));
    BrownianPath b(Rng(6));
    for (double t : {0.9, 0.1, 2.0, 0.5, 1.3}) EXPECT_EQ(a.sample_at(t), b.sample_at(t));
}
