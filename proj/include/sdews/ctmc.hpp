#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdews/error.hpp"
#include "sdews/random.hpp"

namespace sdews {

/// Zero-based index into the chain's state space {0, ..., L-1}.
using StateIndex = std::size_t;

/// Transition-rate matrix of a finite continuous-time Markov chain.
///
/// Off-diagonal entries are jump rates i -> j (>= 0); each diagonal entry is the
/// negated sum of its row's off-diagonals, so rows sum to zero. Instances are
/// only produced by validate_generator() and are immutable afterwards.
class GeneratorMatrix {
public:
    static constexpr double kRowSumTolerance = 1e-12;

    [[nodiscard]] std::size_t num_states() const noexcept { return n_; }
    [[nodiscard]] double rate(StateIndex i, StateIndex j) const { return rates_[i * n_ + j]; }
    [[nodiscard]] std::span<const double> row(StateIndex i) const {
        return std::span<const double>(rates_).subspan(i * n_, n_);
    }
    [[nodiscard]] std::vector<std::vector<double>> rows() const {
        std::vector<std::vector<double>> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i].assign(row(i).begin(), row(i).end());
        return out;
    }

    /// The L-state chain with all rates zero (every state absorbing).
    static GeneratorMatrix zero(std::size_t num_states) {
        return GeneratorMatrix(num_states, std::vector<double>(num_states * num_states, 0.0));
    }

private:
    GeneratorMatrix(std::size_t n, std::vector<double> rates) : n_(n), rates_(std::move(rates)) {}
    friend GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rates);

    std::size_t n_;
    std::vector<double> rates_;
};

inline GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rates) {
    const std::size_t n = rates.size();
    if (n == 0) throw Error(ErrorCode::NonSquare, "generator must have at least one row");
    for (std::size_t i = 0; i < n; ++i) {
        if (rates[i].size() != n) {
            throw Error(ErrorCode::NonSquare, "row " + std::to_string(i) + " has " +
                                                  std::to_string(rates[i].size()) + " entries, expected " +
                                                  std::to_string(n));
        }
    }
    std::vector<double> flat;
    flat.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = rates[i][j];
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NegativeOffDiagonal,
                            "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
            }
            if (i != j && v < 0.0) {
                throw Error(ErrorCode::NegativeOffDiagonal,
                            "(" + std::to_string(i) + "," + std::to_string(j) + ") = " + std::to_string(v));
            }
            sum += v;
            flat.push_back(v);
        }
        if (std::abs(sum) > GeneratorMatrix::kRowSumTolerance) {
            throw Error(ErrorCode::RowSumNonzero,
                        "row " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
    }
    return GeneratorMatrix(n, std::move(flat));
}

/// lambda_i = -gamma_ii. Zero means state i is absorbing.
inline double holding_rate(const GeneratorMatrix& g, StateIndex i) {
    if (i >= g.num_states()) {
        throw Error(ErrorCode::IndexOutOfRange, "state " + std::to_string(i) + " with L = " +
                                                    std::to_string(g.num_states()));
    }
    return -g.rate(i, i);
}

/// Jump distribution out of state i: p_ij = gamma_ij / lambda_i, p_ii = 0.
inline std::vector<double> transition_pmf(const GeneratorMatrix& g, StateIndex i) {
    const double lambda = holding_rate(g, i);
    if (!(lambda > 0.0)) {
        throw Error(ErrorCode::AbsorbingState, "state " + std::to_string(i) + " has zero holding rate");
    }
    std::vector<double> p(g.num_states(), 0.0);
    for (std::size_t j = 0; j < g.num_states(); ++j) {
        if (j != i) p[j] = g.rate(i, j) / lambda;
    }
    return p;
}

/// One realisation of the chain on [0, T]: the initial state plus the
/// (time, new state) pairs of every genuine switch. r(t) is right-continuous.
class MarkovPath {
public:
    MarkovPath(StateIndex initial_state, std::vector<double> switch_times, std::vector<StateIndex> states,
               double horizon, std::size_t num_states)
        : initial_state_(initial_state),
          switch_times_(std::move(switch_times)),
          states_(std::move(states)),
          horizon_(horizon) {
        if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
            throw Error(ErrorCode::InvalidParams, "horizon must be positive and finite");
        }
        if (switch_times_.size() != states_.size()) {
            throw Error(ErrorCode::InvalidParams, "switch_times and states differ in length");
        }
        if (initial_state_ >= num_states) throw Error(ErrorCode::IndexOutOfRange, "initial state out of range");
        StateIndex prev = initial_state_;
        double prev_t = 0.0;
        for (std::size_t k = 0; k < states_.size(); ++k) {
            if (states_[k] >= num_states) throw Error(ErrorCode::IndexOutOfRange, "state out of range");
            if (states_[k] == prev) throw Error(ErrorCode::InvalidParams, "switch to the same state");
            if (!(switch_times_[k] > prev_t) || switch_times_[k] > horizon_) {
                throw Error(ErrorCode::InvalidParams, "switch times must be strictly increasing in (0, T]");
            }
            prev = states_[k];
            prev_t = switch_times_[k];
        }
    }

    [[nodiscard]] StateIndex initial_state() const noexcept { return initial_state_; }
    [[nodiscard]] const std::vector<double>& switch_times() const noexcept { return switch_times_; }
    [[nodiscard]] const std::vector<StateIndex>& states() const noexcept { return states_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t num_switches() const noexcept { return switch_times_.size(); }

    /// Number of switches in (0, t].
    [[nodiscard]] std::size_t switches_up_to(double t) const {
        return static_cast<std::size_t>(std::upper_bound(switch_times_.begin(), switch_times_.end(), t) -
                                        switch_times_.begin());
    }

    /// State in force at t, taking the post-switch value at a switch instant.
    [[nodiscard]] StateIndex state_at(double t) const {
        if (!(t >= 0.0) || t > horizon_) {
            throw Error(ErrorCode::TimeOutOfRange, "t = " + std::to_string(t));
        }
        const std::size_t n = switches_up_to(t);
        return n == 0 ? initial_state_ : states_[n - 1];
    }

    /// First switch time strictly after t, if any.
    [[nodiscard]] std::optional<double> next_switch_after(double t) const {
        auto it = std::upper_bound(switch_times_.begin(), switch_times_.end(), t);
        if (it == switch_times_.end()) return std::nullopt;
        return *it;
    }

    friend bool operator==(const MarkovPath&, const MarkovPath&) = default;

private:
    StateIndex initial_state_;
    std::vector<double> switch_times_;
    std::vector<StateIndex> states_;
    double horizon_;
};

/// Draws the destination of a jump out of state i from transition_pmf(g, i).
inline StateIndex sample_destination(const GeneratorMatrix& g, StateIndex i, Rng& rng) {
    const double lambda = holding_rate(g, i);
    const double target = uniform01(rng) * lambda;
    double cumulative = 0.0;
    StateIndex last_reachable = i;
    for (std::size_t j = 0; j < g.num_states(); ++j) {
        if (j == i) continue;
        const double r = g.rate(i, j);
        if (r <= 0.0) continue;
        cumulative += r;
        last_reachable = j;
        if (target < cumulative) return j;
    }
    // target landed in the rounding gap between the cumulative sum and lambda
    return last_reachable;
}

inline MarkovPath simulate_chain(const GeneratorMatrix& g, StateIndex r0, double horizon, Rng& rng) {
    if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidParams, "horizon must be positive");
    if (r0 >= g.num_states()) throw Error(ErrorCode::IndexOutOfRange, "initial state out of range");

    std::vector<double> times;
    std::vector<StateIndex> states;
    StateIndex current = r0;
    double t = 0.0;
    for (;;) {
        const double lambda = holding_rate(g, current);
        if (!(lambda > 0.0)) break;
        const double next = t + sample_exponential(rng, lambda);
        // a holding time below the spacing of doubles near t is not a distinct switch
        if (next <= t) continue;
        t = next;
        if (t > horizon) break;
        current = sample_destination(g, current, rng);
        times.push_back(t);
        states.push_back(current);
    }
    return MarkovPath(r0, std::move(times), std::move(states), horizon, g.num_states());
}

}  // namespace sdews
