#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sdews/ctmc.hpp"
#include "sdews/error.hpp"
#include "sdews/models.hpp"
#include "sdews/noise.hpp"
#include "sdews/stepping.hpp"

namespace sdews {

enum class MainScheme { EulerMaruyama, Milstein };

constexpr std::string_view to_string(MainScheme s) noexcept {
    return s == MainScheme::EulerMaruyama ? "euler-maruyama" : "milstein";
}

namespace detail {
inline double checked(double value, std::string_view map, double x, double h, double dw) {
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonfiniteResult, std::string(map) + " produced a nonfinite value from x = " +
                                                    std::to_string(x) + ", h = " + std::to_string(h) +
                                                    ", dW = " + std::to_string(dw));
    }
    return value;
}
}  // namespace detail

template <RegimeModel M>
double em_map(double x, StateIndex i, double h, double dw, const M& m) {
    return detail::checked(x + h * m.drift(x, i) + m.diffusion(x, i) * dw, "em_map", x, h, dw);
}

template <RegimeModel M>
double milstein_map(double x, StateIndex i, double h, double dw, const M& m) {
    const double g = m.diffusion(x, i);
    const double correction = 0.5 * m.diffusion_derivative(x, i) * g * (dw * dw - h);
    return detail::checked(x + h * m.drift(x, i) + g * dw + correction, "milstein_map", x, h, dw);
}

/// Settings for the scalar root solve inside the drift-implicit Milstein map.
struct ImplicitSolverSettings {
    double residual_tolerance = 1e-12;  ///< relative to max(1, |X|)
    int max_newton_iterations = 50;
    int max_bracket_doublings = 60;
};

/// |X - x - h f(X) - g dW - 1/2 g' g (dW^2 - h)|, coefficients g and g' frozen at x.
template <RegimeModel M>
double implicit_milstein_residual(double X, double x, StateIndex i, double h, double dw, const M& m) {
    const double g = m.diffusion(x, i);
    const double explicit_part = x + g * dw + 0.5 * m.diffusion_derivative(x, i) * g * (dw * dw - h);
    return X - h * m.drift(X, i) - explicit_part;
}

/// Drift-implicit Milstein step: solves X = x + h f(X) + g dW + 1/2 g' g (dW^2 - h)
/// by Newton from the explicit Milstein value, falling back to bisection on a
/// bracket [x - D, x + D] with D doubled from max(1, |x|).
template <RegimeModel M>
double implicit_milstein_map(double x, StateIndex i, double h, double dw, const M& m,
                             const ImplicitSolverSettings& settings = {}) {
    const double g = m.diffusion(x, i);
    const double rhs = x + g * dw + 0.5 * m.diffusion_derivative(x, i) * g * (dw * dw - h);
    detail::checked(rhs, "implicit_milstein_map", x, h, dw);

    auto residual = [&](double X) { return X - h * m.drift(X, i) - rhs; };
    auto converged = [&](double X, double r) {
        return std::abs(r) <= settings.residual_tolerance * std::max(1.0, std::abs(X));
    };

    double X = x + h * m.drift(x, i) + g * dw + 0.5 * m.diffusion_derivative(x, i) * g * (dw * dw - h);
    if (!std::isfinite(X)) X = x;
    for (int iter = 0; iter < settings.max_newton_iterations; ++iter) {
        const double r = residual(X);
        if (!std::isfinite(r)) break;
        if (converged(X, r)) return X;
        const double slope = 1.0 - h * m.drift_derivative(X, i);
        if (!std::isfinite(slope) || slope == 0.0) break;
        const double next = X - r / slope;
        if (!std::isfinite(next)) break;
        if (next == X) {
            // stalled: accept only if the residual is at the rounding level of its terms
            const double scale = std::abs(X) + std::abs(h * m.drift(X, i)) + std::abs(rhs);
            if (std::abs(r) <= 8.0 * std::numeric_limits<double>::epsilon() * scale) return X;
            break;
        }
        X = next;
    }

    // Bisection fallback.
    double delta = std::max(1.0, std::abs(x));
    double lo = 0.0;
    double hi = 0.0;
    double r_lo = 0.0;
    bool bracketed = false;
    for (int d = 0; d <= settings.max_bracket_doublings; ++d, delta *= 2.0) {
        lo = x - delta;
        hi = x + delta;
        r_lo = residual(lo);
        const double r_hi = residual(hi);
        if (!std::isfinite(r_lo) || !std::isfinite(r_hi)) break;
        if (r_lo == 0.0) return lo;
        if (r_hi == 0.0) return hi;
        if ((r_lo < 0.0) != (r_hi < 0.0)) {
            bracketed = true;
            break;
        }
    }
    if (!bracketed) {
        throw Error(ErrorCode::RootNotFound, "implicit Milstein: no sign change around x = " + std::to_string(x) +
                                                 " (h = " + std::to_string(h) + ", dW = " + std::to_string(dw) + ")");
    }
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double r_mid = residual(mid);
        if (converged(mid, r_mid)) return mid;
        if ((r_mid < 0.0) == (r_lo < 0.0)) {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
        }
    }
    // adjacent doubles: take the smaller residual
    const double r_hi = residual(hi);
    return std::abs(r_lo) <= std::abs(r_hi) ? lo : hi;
}

struct StepRecord {
    double t_start;
    double t_end;
    StateIndex state;
    double h;
    double dw;
    bool used_backstop;
    StepReason reason;
    double y_start;
    double y_end;
};

struct Trajectory {
    std::vector<StepRecord> records;  ///< empty unless SolveOptions::keep_records
    double x0 = 0.0;
    double terminal_value = 0.0;
    std::size_t step_count = 0;
    std::size_t backstop_count = 0;
    std::size_t step_budget = 0;  ///< N_max for this chain
};

struct SolveOptions {
    bool keep_records = false;
    ImplicitSolverSettings implicit{};
};

/// Integrates the model from X(0) = x0 to T on the adaptive, switch-adapted
/// mesh. Each step uses the main map when h_min < h <= h_max and the implicit
/// Milstein backstop when h <= h_min. The regime is frozen at its value at the
/// start of the step; every switch time in (0, T] and T itself are mesh points.
template <RegimeModel M>
Trajectory solve_trajectory(const M& model, const MarkovPath& chain, BrownianPath& w, double x0, double horizon,
                            const StepParams& p, MainScheme main, const SolveOptions& opts = {}) {
    if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidParams, "T must be positive");
    if (chain.horizon() < horizon) throw Error(ErrorCode::InvalidParams, "chain horizon shorter than T");
    if (!std::isfinite(x0)) throw Error(ErrorCode::InvalidParams, "x0 must be finite");

    Trajectory out;
    out.x0 = x0;
    out.step_budget = build_mesh_bound(horizon, p, chain.switches_up_to(horizon)).n_max;

    double t = 0.0;
    double y = x0;
    while (t < horizon) {
        if (out.step_count >= out.step_budget) {
            throw Error(ErrorCode::StepBudgetExceeded,
                        "reached N_max = " + std::to_string(out.step_budget) + " steps at t = " + std::to_string(t));
        }
        const StateIndex state = chain.state_at(t);
        if (state >= model.num_states()) throw Error(ErrorCode::InvalidParams, "chain state beyond model states");
        auto next_switch = chain.next_switch_after(t);
        if (next_switch && *next_switch > horizon) next_switch.reset();

        const StepDecision d = next_step(std::abs(y), t, next_switch, horizon, p);
        const double dw = w.increment(t, d.t_next);
        double y_next = 0.0;
        try {
            if (d.use_backstop) {
                y_next = implicit_milstein_map(y, state, d.h, dw, model, opts.implicit);
            } else if (main == MainScheme::Milstein) {
                y_next = milstein_map(y, state, d.h, dw, model);
            } else {
                y_next = em_map(y, state, d.h, dw, model);
            }
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " at t = " + std::to_string(t));
        }

        if (opts.keep_records) {
            out.records.push_back({t, d.t_next, state, d.h, dw, d.use_backstop, d.reason, y, y_next});
        }
        ++out.step_count;
        if (d.use_backstop) ++out.backstop_count;
        t = d.t_next;
        y = y_next;
    }
    out.terminal_value = y;
    return out;
}

}  // namespace sdews
