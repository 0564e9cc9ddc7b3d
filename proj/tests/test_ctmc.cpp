#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "sdews/ctmc.hpp"

using namespace sdews;

namespace {

std::vector<std::vector<double>> telomere_rates() {
    std::vector<std::vector<double>> g(4, std::vector<double>(4, 0.1));
    for (int i = 0; i < 4; ++i) g[i][i] = -0.3;
    return g;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an sdews::Error";
    return ErrorCode::IoError;
}

}  // namespace

TEST(Generator, AcceptsExampleMatrix) {
    const auto g = validate_generator(telomere_rates());
    EXPECT_EQ(g.num_states(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        double sum = 0.0;
        for (double v : g.row(i)) sum += v;
        EXPECT_NEAR(sum, 0.0, 1e-12);
    }
}

TEST(Generator, SingleAbsorbingState) {
    const auto g = validate_generator({{0.0}});
    EXPECT_EQ(g.num_states(), 1u);
    EXPECT_EQ(holding_rate(g, 0), 0.0);
}

TEST(Generator, Rejections) {
    try {
        (void)validate_generator({{-0.1, 0.2}, {0.1, -0.1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RowSumNonzero);
        EXPECT_NE(std::string(e.what()).find("row 0"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("0.1"), std::string::npos);
    }
    EXPECT_EQ(code_of([] { (void)validate_generator({{-1.0, 1.0}}); }), ErrorCode::NonSquare);
    EXPECT_EQ(code_of([] { (void)validate_generator({}); }), ErrorCode::NonSquare);
    EXPECT_EQ(code_of([] { (void)validate_generator({{1.0, -1.0}, {1.0, -1.0}}); }), ErrorCode::NegativeOffDiagonal);
}

TEST(Generator, HoldingRates) {
    EXPECT_DOUBLE_EQ(holding_rate(validate_generator(telomere_rates()), 2), 0.3);
    EXPECT_EQ(holding_rate(GeneratorMatrix::zero(3), 0), 0.0);
    const auto g2 = validate_generator({{-2.0, 2.0}, {1.0, -1.0}});
    EXPECT_EQ(holding_rate(g2, 0), 2.0);
    EXPECT_EQ(code_of([&] { (void)holding_rate(g2, 2); }), ErrorCode::IndexOutOfRange);
}

TEST(Generator, TransitionPmf) {
    const auto p = transition_pmf(validate_generator(telomere_rates()), 0);
    ASSERT_EQ(p.size(), 4u);
    EXPECT_EQ(p[0], 0.0);
    for (int j = 1; j < 4; ++j) EXPECT_NEAR(p[j], 0.1 / 0.3, 1e-15);

    const auto p2 = transition_pmf(validate_generator({{-2.0, 2.0}, {1.0, -1.0}}), 0);
    EXPECT_EQ(p2[1], 1.0);

    const auto g3 = validate_generator({{-3.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, {1.0, 1.0, -2.0}});
    const auto p3 = transition_pmf(g3, 0);
    EXPECT_EQ(p3[0], 0.0);
    EXPECT_NEAR(p3[1], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(p3[2], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(p3[0] + p3[1] + p3[2], 1.0, 1e-12);
    EXPECT_EQ(code_of([&] { (void)transition_pmf(g3, 1); }), ErrorCode::AbsorbingState);
}

TEST(Chain, ZeroGeneratorNeverSwitches) {
    Rng rng(1);
    const auto path = simulate_chain(GeneratorMatrix::zero(3), 2, 30.0, rng);
    EXPECT_EQ(path.num_switches(), 0u);
    EXPECT_EQ(path.state_at(15.0), 2u);
}

TEST(Chain, StateAtIsRightContinuous) {
    const MarkovPath one(0, {1.0}, {2}, 10.0, 3);
    EXPECT_EQ(one.state_at(0.999), 0u);
    EXPECT_EQ(one.state_at(1.0), 2u);

    const MarkovPath two(0, {1.0, 2.5}, {2, 1}, 10.0, 3);
    EXPECT_EQ(two.state_at(2.0), 2u);
    EXPECT_EQ(two.state_at(2.5), 1u);
    EXPECT_EQ(two.state_at(10.0), 1u);
    EXPECT_EQ(code_of([&] { (void)two.state_at(10.5); }), ErrorCode::TimeOutOfRange);
    EXPECT_EQ(code_of([&] { (void)two.state_at(-0.1); }), ErrorCode::TimeOutOfRange);
}

TEST(Chain, PathConstructorRejectsBrokenInvariants) {
    EXPECT_EQ(code_of([] { MarkovPath(0, {1.0}, {0}, 5.0, 2); }), ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([] { MarkovPath(0, {2.0, 1.0}, {1, 0}, 5.0, 2); }), ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([] { MarkovPath(0, {6.0}, {1}, 5.0, 2); }), ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([] { MarkovPath(0, {1.0}, {3}, 5.0, 2); }), ErrorCode::IndexOutOfRange);
}

TEST(Chain, SwitchAtHorizonIsKept) {
    const MarkovPath p(0, {5.0}, {1}, 5.0, 2);
    EXPECT_EQ(p.state_at(5.0), 1u);
    EXPECT_EQ(p.switches_up_to(5.0), 1u);
}

TEST(Chain, SimulatedPathsSatisfyInvariants) {
    Rng gen_rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        // random generator with 1..5 states, some zero rates
        const std::size_t n = 1 + gen_rng() % 5;
        std::vector<std::vector<double>> rates(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                rates[i][j] = (gen_rng() % 3 == 0) ? 0.0 : 3.0 * uniform01(gen_rng);
                sum += rates[i][j];
            }
            rates[i][i] = -sum;
        }
        const auto g = validate_generator(rates);
        Rng rng(100 + trial);
        const auto path = simulate_chain(g, trial % n, 20.0, rng);
        StateIndex prev = path.initial_state();
        double prev_t = 0.0;
        for (std::size_t k = 0; k < path.num_switches(); ++k) {
            EXPECT_GT(path.switch_times()[k], prev_t);
            EXPECT_LE(path.switch_times()[k], 20.0);
            EXPECT_NE(path.states()[k], prev);
            EXPECT_LT(path.states()[k], n);
            EXPECT_GT(g.rate(prev, path.states()[k]), 0.0);
            prev = path.states()[k];
            prev_t = path.switch_times()[k];
        }
    }
}

TEST(Chain, SameSeedSamePath) {
    const auto g = validate_generator(telomere_rates());
    Rng a(99);
    Rng b(99);
    EXPECT_EQ(simulate_chain(g, 1, 30.0, a), simulate_chain(g, 1, 30.0, b));
}

TEST(Chain, MeanNumberOfSwitches) {
    // every holding rate is 0.3, so the switch count on [0, 30] is Poisson(9)
    const auto g = validate_generator(telomere_rates());
    double total = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        Rng rng = make_rng(42, Stream::Chain, i);
        total += static_cast<double>(simulate_chain(g, 0, 30.0, rng).num_switches());
    }
    const double mean = total / n;
    EXPECT_NEAR(mean, 9.0, 0.03 * 9.0);
}

TEST(Chain, FirstHoldingTimeMean) {
    const auto g = validate_generator({{-2.0, 2.0}, {1.0, -1.0}});
    const int n = 100000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        Rng rng = make_rng(5, Stream::Chain, i);
        const auto path = simulate_chain(g, 0, 50.0, rng);
        ASSERT_GE(path.num_switches(), 1u);
        const double h = path.switch_times()[0];
        sum += h;
        sum_sq += h * h;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.5, 0.02 * 0.5);
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - 0.5), 3.0 * se);
}

TEST(Chain, DestinationFrequencies) {
    const auto g = validate_generator({{-3.0, 1.0, 2.0}, {0.5, -0.5, 0.0}, {1.0, 1.0, -2.0}});
    const auto pmf = transition_pmf(g, 0);
    const int n = 100000;
    std::vector<int> counts(3, 0);
    Rng rng(11);
    for (int i = 0; i < n; ++i) ++counts[sample_destination(g, 0, rng)];
    EXPECT_EQ(counts[0], 0);
    for (int j = 1; j < 3; ++j) {
        const double freq = static_cast<double>(counts[j]) / n;
        const double se = std::sqrt(pmf[j] * (1.0 - pmf[j]) / n);
        EXPECT_LT(std::abs(freq - pmf[j]), 3.0 * se) << "destination " << j;
    }
}
