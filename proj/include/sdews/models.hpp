#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sdews/ctmc.hpp"
#include "sdews/error.hpp"
#include "sdews/noise.hpp"

namespace sdews {

/// Scalar SDE with Markovian switching: dX = f(X, r) dt + g(X, r) dW.
///
/// diffusion_derivative is dg/dx (used by the Milstein correction) and
/// drift_derivative is df/dx (used by the Newton solve of the implicit map).
template <class M>
concept RegimeModel = requires(const M& m, double x, StateIndex i) {
    { m.num_states() } -> std::convertible_to<std::size_t>;
    { m.drift(x, i) } -> std::convertible_to<double>;
    { m.diffusion(x, i) } -> std::convertible_to<double>;
    { m.diffusion_derivative(x, i) } -> std::convertible_to<double>;
    { m.drift_derivative(x, i) } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------
// Telomere length model
// ---------------------------------------------------------------------------

/// Decay rate c (bp/day) and break intensity a (1/(bp^2 day)) of one regime.
struct TelomereRates {
    double c;
    double a;
    friend bool operator==(const TelomereRates&, const TelomereRates&) = default;
};

/// Two decay rates and two break intensities; the four regimes are
/// (c1,a1), (c1,a2), (c2,a1), (c2,a2) in that order.
struct TelomereParams {
    std::array<double, 2> c_values{4.5, 7.5};
    std::array<double, 2> a_values{0.22e-6, 0.41e-6};

    [[nodiscard]] std::vector<TelomereRates> state_map() const {
        return {{c_values[0], a_values[0]},
                {c_values[0], a_values[1]},
                {c_values[1], a_values[0]},
                {c_values[1], a_values[1]}};
    }
};

/// dL = -(c_r + a_r L^2) dt + sqrt(a_r L^3 / 3) dW.
///
/// The diffusion is extended by zero for L < 0, so a path that crosses zero
/// continues under the drift alone. a = 0 gives the deterministic decay -c.
class TelomereModel {
public:
    explicit TelomereModel(std::vector<TelomereRates> states) : states_(std::move(states)) {
        if (states_.empty()) throw Error(ErrorCode::InvalidParams, "telomere model needs at least one state");
        for (std::size_t i = 0; i < states_.size(); ++i) {
            const auto& s = states_[i];
            if (!(s.c > 0.0) || !(s.a >= 0.0) || !std::isfinite(s.c) || !std::isfinite(s.a)) {
                throw Error(ErrorCode::InvalidParams,
                            "telomere state " + std::to_string(i) + " needs c > 0 and a >= 0");
            }
        }
    }

    /// Single-regime model without switching.
    static TelomereModel fixed(double c, double a) { return TelomereModel({{c, a}}); }

    [[nodiscard]] std::size_t num_states() const noexcept { return states_.size(); }
    [[nodiscard]] const std::vector<TelomereRates>& states() const noexcept { return states_; }

    [[nodiscard]] double drift(double x, StateIndex i) const {
        const auto& s = states_[i];
        return -(s.c + s.a * x * x);
    }
    [[nodiscard]] double drift_derivative(double x, StateIndex i) const { return -2.0 * states_[i].a * x; }
    [[nodiscard]] double diffusion(double x, StateIndex i) const {
        if (x <= 0.0) return 0.0;
        return std::sqrt(states_[i].a * x * x * x / 3.0);
    }
    [[nodiscard]] double diffusion_derivative(double x, StateIndex i) const {
        if (x <= 0.0) return 0.0;
        return 0.5 * std::sqrt(3.0 * states_[i].a * x);
    }

private:
    std::vector<TelomereRates> states_;
};

inline TelomereModel telomere_model(const TelomereParams& p) {
    for (double v : p.c_values) {
        if (!(v > 0.0)) throw Error(ErrorCode::InvalidParams, "telomere c values must be positive");
    }
    for (double v : p.a_values) {
        if (!(v >= 0.0)) throw Error(ErrorCode::InvalidParams, "telomere a values must be non-negative");
    }
    return TelomereModel(p.state_map());
}

// ---------------------------------------------------------------------------
// Linear (geometric Brownian motion) test model
// ---------------------------------------------------------------------------

struct LinearModelParams {
    std::vector<double> mu;
    std::vector<double> sigma;
};

/// dX = mu_r X dt + sigma_r X dW. Conditional on the chain, each constant-regime
/// segment is geometric Brownian motion, which gives an exact solution.
class LinearModel {
public:
    explicit LinearModel(LinearModelParams p) : p_(std::move(p)) {
        if (p_.mu.empty() || p_.mu.size() != p_.sigma.size()) {
            throw Error(ErrorCode::InvalidParams, "mu and sigma must be non-empty and of equal length");
        }
        for (std::size_t i = 0; i < p_.mu.size(); ++i) {
            if (!std::isfinite(p_.mu[i]) || !std::isfinite(p_.sigma[i])) {
                throw Error(ErrorCode::InvalidParams, "linear model coefficients must be finite");
            }
        }
    }

    [[nodiscard]] std::size_t num_states() const noexcept { return p_.mu.size(); }
    [[nodiscard]] const LinearModelParams& params() const noexcept { return p_; }

    [[nodiscard]] double drift(double x, StateIndex i) const { return p_.mu[i] * x; }
    [[nodiscard]] double drift_derivative(double, StateIndex i) const { return p_.mu[i]; }
    [[nodiscard]] double diffusion(double x, StateIndex i) const { return p_.sigma[i] * x; }
    [[nodiscard]] double diffusion_derivative(double, StateIndex i) const { return p_.sigma[i]; }

private:
    LinearModelParams p_;
};

inline LinearModel linear_model(const LinearModelParams& p) { return LinearModel(p); }

/// Exact solution of the linear model from X(t0) = x0 to time t on the given
/// chain and Brownian path. W is queried at t0, every switch in (t0, t), and t,
/// in increasing order.
inline double exact_linear_solution(const LinearModelParams& p, double x0, const MarkovPath& chain,
                                    BrownianPath& path, double t, double t0 = 0.0) {
    if (!(t0 >= 0.0) || t < t0 || t > chain.horizon()) {
        throw Error(ErrorCode::TimeOutOfRange,
                    "[" + std::to_string(t0) + ", " + std::to_string(t) + "] outside chain horizon");
    }
    if (p.mu.size() != p.sigma.size()) throw Error(ErrorCode::InvalidParams, "mu/sigma length mismatch");

    double exponent = 0.0;
    double seg_start = t0;
    double w_start = path.sample_at(t0);
    const auto& taus = chain.switch_times();
    auto next = std::upper_bound(taus.begin(), taus.end(), t0);
    for (;;) {
        const bool last = next == taus.end() || *next >= t;
        const double seg_end = last ? t : *next;
        const StateIndex state = chain.state_at(seg_start);
        if (state >= p.mu.size()) throw Error(ErrorCode::IndexOutOfRange, "chain state beyond model states");
        const double w_end = path.sample_at(seg_end);
        const double mu = p.mu[state];
        const double sigma = p.sigma[state];
        exponent += (mu - 0.5 * sigma * sigma) * (seg_end - seg_start) + sigma * (w_end - w_start);
        if (last) break;
        seg_start = seg_end;
        w_start = w_end;
        ++next;
    }
    return x0 * std::exp(exponent);
}

}  // namespace sdews
