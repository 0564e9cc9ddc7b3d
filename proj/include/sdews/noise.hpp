#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "sdews/error.hpp"
#include "sdews/random.hpp"

namespace sdews {

/// One scalar Brownian motion W sampled lazily at arbitrary query times.
///
/// Queries past the last known time draw a forward Gaussian increment; queries
/// between two known times draw from the Brownian bridge conditioned on both
/// neighbours. Every value is memoised, so solvers at different resolutions
/// that share one BrownianPath are driven by the same underlying path.
///
/// Values depend on the seed and on the order of queries. Single owner,
/// not thread-safe.
class BrownianPath {
public:
    explicit BrownianPath(Rng rng) : rng_(std::move(rng)), times_{0.0}, values_{0.0} {}

    [[nodiscard]] double sample_at(double t) {
        if (!(t >= 0.0)) throw Error(ErrorCode::NegativeTime, "t = " + std::to_string(t));

        if (t > times_.back()) {
            const double dt = t - times_.back();
            const double w = values_.back() + std::sqrt(dt) * normal_(rng_);
            times_.push_back(t);
            values_.push_back(w);
            return w;
        }

        const auto it = std::lower_bound(times_.begin(), times_.end(), t);
        const auto idx = static_cast<std::size_t>(it - times_.begin());
        if (*it == t) return values_[idx];

        // times_[idx - 1] < t < times_[idx]; idx >= 1 because times_[0] == 0 <= t
        const double s = times_[idx - 1];
        const double u = times_[idx];
        const double ws = values_[idx - 1];
        const double wu = values_[idx];
        const double mean = ws + (t - s) / (u - s) * (wu - ws);
        const double var = (t - s) * (u - t) / (u - s);
        const double w = mean + std::sqrt(var) * normal_(rng_);
        times_.insert(it, t);
        values_.insert(values_.begin() + static_cast<std::ptrdiff_t>(idx), w);
        return w;
    }

    /// W(t) - W(s); exactly zero when s == t.
    [[nodiscard]] double increment(double s, double t) {
        if (t < s) throw Error(ErrorCode::ReversedInterval, "[" + std::to_string(s) + ", " + std::to_string(t) + "]");
        if (s == t) {
            (void)sample_at(s);
            return 0.0;
        }
        const double ws = sample_at(s);
        const double wt = sample_at(t);
        return wt - ws;
    }

    /// Memoised (time, value) pairs in increasing time order.
    [[nodiscard]] const std::vector<double>& known_times() const noexcept { return times_; }
    [[nodiscard]] const std::vector<double>& known_values() const noexcept { return values_; }

    /// Bridge moments of W(t) given the memoised neighbours, without drawing.
    /// Requires t strictly inside the memoised range and not memoised itself.
    struct BridgeMoments {
        double mean;
        double variance;
    };
    [[nodiscard]] BridgeMoments bridge_moments(double t) const {
        const auto it = std::lower_bound(times_.begin(), times_.end(), t);
        if (it == times_.begin() || it == times_.end() || *it == t) {
            throw Error(ErrorCode::TimeOutOfRange, "t is not strictly between memoised points");
        }
        const auto idx = static_cast<std::size_t>(it - times_.begin());
        const double s = times_[idx - 1];
        const double u = times_[idx];
        return {values_[idx - 1] + (t - s) / (u - s) * (values_[idx] - values_[idx - 1]),
                (t - s) * (u - t) / (u - s)};
    }

    /// Pins W(t) = value without drawing. For tests and replay; t must not be
    /// memoised already.
    void pin(double t, double value) {
        if (!(t > 0.0)) throw Error(ErrorCode::NegativeTime, "can only pin t > 0");
        const auto it = std::lower_bound(times_.begin(), times_.end(), t);
        if (it != times_.end() && *it == t) throw Error(ErrorCode::InvalidParams, "time already memoised");
        const auto idx = it - times_.begin();
        times_.insert(it, t);
        values_.insert(values_.begin() + idx, value);
    }

private:
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::vector<double> times_;
    std::vector<double> values_;
};

}  // namespace sdews
