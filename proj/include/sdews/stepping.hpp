#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "sdews/error.hpp"

namespace sdews {

/// Adaptive mesh parameters. h_min = h_max / rho.
class StepParams {
public:
    StepParams(double h_max, double rho, double k) : h_max_(h_max), rho_(rho), k_(k) {
        if (!(rho > 1.0) || !std::isfinite(rho)) {
            throw Error(ErrorCode::InvalidParams, "rho must be > 1 (h_max = rho * h_min with h_min < h_max)");
        }
        if (!(h_max > 0.0) || h_max > 1.0) throw Error(ErrorCode::InvalidParams, "h_max must lie in (0, 1]");
        if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorCode::InvalidParams, "k must be positive");
        h_min_ = h_max / rho;
    }

    /// h_max = 3e-2, rho = 15, k = 10.
    static StepParams telomere_defaults() { return {0.03, 15.0, 10.0}; }

    [[nodiscard]] double h_max() const noexcept { return h_max_; }
    [[nodiscard]] double h_min() const noexcept { return h_min_; }
    [[nodiscard]] double rho() const noexcept { return rho_; }
    [[nodiscard]] double k() const noexcept { return k_; }

    /// Bound R = rho^k on |Y| at every unclamped main-map step.
    [[nodiscard]] double norm_bound() const { return std::pow(rho_, k_); }

private:
    double h_max_;
    double rho_;
    double k_;
    double h_min_;
};

enum class StepReason { NormControlled, ClampedToSwitch, ClampedToTerminal, FlooredAtHmin };

constexpr std::string_view to_string(StepReason r) noexcept {
    switch (r) {
        case StepReason::NormControlled: return "NormControlled";
        case StepReason::ClampedToSwitch: return "ClampedToSwitch";
        case StepReason::ClampedToTerminal: return "ClampedToTerminal";
        case StepReason::FlooredAtHmin: return "FlooredAtHmin";
    }
    return "Unknown";
}

struct StepDecision {
    double h;
    double t_next;  ///< bitwise equal to the switch time or T when clamped
    bool use_backstop;
    StepReason reason;
};

/// Next mesh step from t_n:
///   h = (h_min v (h_max / |Y|^(1/k) ^ h_max)) ^ (tau_next - t_n) ^ (T - t_n),
/// with |Y| = 0 giving h_max. The backstop is used iff h <= h_min, where h is
/// the realised width t_next - t_n.
inline StepDecision next_step(double y_norm, double t_n, std::optional<double> next_switch, double horizon,
                              const StepParams& p) {
    if (!(horizon > t_n)) {
        throw Error(ErrorCode::NonpositiveRemainingTime,
                    "t_n = " + std::to_string(t_n) + " is not before T = " + std::to_string(horizon));
    }
    if (next_switch && !(*next_switch > t_n)) {
        throw Error(ErrorCode::NonpositiveRemainingTime, "next switch is not after t_n");
    }

    double candidate = p.h_max();
    StepReason reason = StepReason::NormControlled;
    if (std::isnan(y_norm)) {
        candidate = 0.0;
    } else if (y_norm > 0.0) {
        const double scaled = p.h_max() / std::pow(y_norm, 1.0 / p.k());
        if (scaled < candidate) candidate = scaled;
    }
    if (!(candidate > p.h_min())) {
        candidate = p.h_min();
        reason = StepReason::FlooredAtHmin;
    }

    double t_next = t_n + candidate;
    if (next_switch && *next_switch <= horizon && t_next >= *next_switch) {
        t_next = *next_switch;
        reason = StepReason::ClampedToSwitch;
    }
    if (t_next >= horizon) {
        t_next = horizon;
        reason = StepReason::ClampedToTerminal;
    }

    const double h = t_next - t_n;
    return {h, t_next, h <= p.h_min(), reason};
}

struct MeshBound {
    std::size_t n_min;
    std::size_t n_max;
};

/// floor(t / h_max) and ceil(t / h_min + n_switches).
inline MeshBound build_mesh_bound(double t, const StepParams& p, std::size_t n_switches) {
    if (!(t >= 0.0)) throw Error(ErrorCode::TimeOutOfRange, "t must be non-negative");
    const auto n_min = static_cast<std::size_t>(std::floor(t / p.h_max()));
    const auto n_max = static_cast<std::size_t>(std::ceil(t / p.h_min() + static_cast<double>(n_switches)));
    return {n_min, n_max};
}

}  // namespace sdews
