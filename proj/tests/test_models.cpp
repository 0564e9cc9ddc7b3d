#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sdews/models.hpp"

using namespace sdews;

namespace {

template <class M>
void expect_derivative_matches_fd(const M& m, double x, StateIndex i) {
    const double step = 1e-5 * std::max(1.0, std::abs(x));
    const double fd = (m.diffusion(x + step, i) - m.diffusion(x - step, i)) / (2.0 * step);
    const double analytic = m.diffusion_derivative(x, i);
    EXPECT_LT(std::abs(fd - analytic), 1e-6 * std::max(std::abs(analytic), 1e-300)) << "x = " << x << " i = " << i;
}

}  // namespace

TEST(Telomere, StateMapOrder) {
    const auto states = TelomereParams{}.state_map();
    ASSERT_EQ(states.size(), 4u);
    EXPECT_EQ(states[0], (TelomereRates{4.5, 0.22e-6}));
    EXPECT_EQ(states[1], (TelomereRates{4.5, 0.41e-6}));
    EXPECT_EQ(states[2], (TelomereRates{7.5, 0.22e-6}));
    EXPECT_EQ(states[3], (TelomereRates{7.5, 0.41e-6}));
}

TEST(Telomere, CoefficientValues) {
    const auto m = telomere_model(TelomereParams{});
    EXPECT_NEAR(m.drift(1000.0, 0), -4.72, 1e-12);
    EXPECT_EQ(m.diffusion(0.0, 2), 0.0);
    EXPECT_NEAR(m.diffusion_derivative(1000.0, 0) * m.diffusion(1000.0, 0), 0.11, 1e-14);
    // closed form a x^2 / 2 in every state
    for (StateIndex i = 0; i < 4; ++i) {
        const double a = m.states()[i].a;
        EXPECT_NEAR(m.diffusion_derivative(2500.0, i) * m.diffusion(2500.0, i), a * 2500.0 * 2500.0 / 2.0, 1e-12);
    }
}

TEST(Telomere, NegativeLengthHasNoNoise) {
    const auto m = TelomereModel::fixed(4.5, 0.22e-6);
    EXPECT_EQ(m.diffusion(-10.0, 0), 0.0);
    EXPECT_EQ(m.diffusion_derivative(-10.0, 0), 0.0);
    EXPECT_LT(m.drift(-10.0, 0), 0.0);
}

TEST(Telomere, DriftStrictlyNegative) {
    const auto m = telomere_model(TelomereParams{});
    Rng rng(1);
    for (int k = 0; k < 1000; ++k) {
        const double x = 1e4 * uniform01(rng);
        for (StateIndex i = 0; i < 4; ++i) EXPECT_LT(m.drift(x, i), 0.0);
    }
}

TEST(Telomere, InvalidParams) {
    TelomereParams p;
    p.a_values[1] = -1e-7;
    EXPECT_THROW((void)telomere_model(p), Error);
    EXPECT_THROW(TelomereModel::fixed(-1.0, 1e-6), Error);
    EXPECT_THROW(TelomereModel({}), Error);
    EXPECT_NO_THROW(TelomereModel::fixed(4.5, 0.0));
}

TEST(Models, DiffusionDerivativeMatchesFiniteDifferences) {
    const auto tel = telomere_model(TelomereParams{});
    const LinearModel lin({{0.5, -0.5, 0.1}, {0.3, 0.5, 1.2}});
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        expect_derivative_matches_fd(tel, 1.0 + (1e4 - 1.0) * uniform01(rng), rng() % 4);
        expect_derivative_matches_fd(lin, -50.0 + 100.0 * uniform01(rng), rng() % 3);
    }
}

TEST(Linear, CoefficientValues) {
    const LinearModel m({{0.05}, {0.2}});
    EXPECT_NEAR(m.drift(2.0, 0), 0.1, 1e-15);
    EXPECT_NEAR(m.diffusion_derivative(3.0, 0) * m.diffusion(3.0, 0), 0.2 * 0.2 * 3.0, 1e-15);
    const LinearModel zero({{0.0}, {0.0}});
    EXPECT_EQ(zero.drift(5.0, 0), 0.0);
    EXPECT_EQ(zero.diffusion(5.0, 0), 0.0);
    EXPECT_THROW(LinearModel({{1.0, 2.0}, {1.0}}), Error);
    EXPECT_THROW(LinearModel({{}, {}}), Error);
    EXPECT_THROW(LinearModel({{NAN}, {1.0}}), Error);
}

TEST(ExactLinear, DeterministicGrowth) {
    const MarkovPath chain(0, {}, {}, 2.0, 1);
    BrownianPath w(Rng(3));
    EXPECT_NEAR(exact_linear_solution({{0.05}, {0.0}}, 1.0, chain, w, 2.0), std::exp(0.1), 1e-15);
}

TEST(ExactLinear, TwoSegmentsCancel) {
    const MarkovPath chain(0, {1.0}, {1}, 2.0, 2);
    BrownianPath w(Rng(4));
    EXPECT_NEAR(exact_linear_solution({{0.1, -0.1}, {0.0, 0.0}}, 1.0, chain, w, 2.0), 1.0, 1e-15);
}

TEST(ExactLinear, SingleSegmentIsGbm) {
    const LinearModelParams p{{0.3}, {0.7}};
    for (int i = 0; i < 100; ++i) {
        const MarkovPath chain(0, {}, {}, 1.5, 1);
        BrownianPath w(make_rng(5, Stream::Brownian, i));
        const double x = exact_linear_solution(p, 2.0, chain, w, 1.5);
        const double direct = 2.0 * std::exp((0.3 - 0.5 * 0.49) * 1.5 + 0.7 * w.sample_at(1.5));
        EXPECT_NEAR(x, direct, 1e-14 * direct);
    }
}

TEST(ExactLinear, MultiplicativeOverTimeSplitting) {
    const LinearModelParams p{{0.5, -0.5}, {0.3, 0.5}};
    const MarkovPath chain(0, {0.2, 0.45, 0.8}, {1, 0, 1}, 1.0, 2);
    for (int i = 0; i < 50; ++i) {
        BrownianPath w(make_rng(6, Stream::Brownian, i));
        const double whole = exact_linear_solution(p, 1.0, chain, w, 1.0);
        for (double s : {0.1, 0.45, 0.6}) {
            const double head = exact_linear_solution(p, 1.0, chain, w, s);
            const double composed = exact_linear_solution(p, head, chain, w, 1.0, s);
            EXPECT_NEAR(composed, whole, 1e-13 * whole);
        }
    }
}

TEST(ExactLinear, RejectsTimesBeyondHorizon) {
    const MarkovPath chain(0, {}, {}, 1.0, 1);
    BrownianPath w(Rng(7));
    EXPECT_THROW((void)exact_linear_solution({{0.1}, {0.1}}, 1.0, chain, w, 1.5), Error);
}
