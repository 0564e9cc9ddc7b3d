#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sdews/ctmc.hpp"
#include "sdews/error.hpp"
#include "sdews/models.hpp"
#include "sdews/noise.hpp"
#include "sdews/random.hpp"
#include "sdews/schemes.hpp"
#include "sdews/stats.hpp"
#include "sdews/stepping.hpp"

namespace sdews {

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). The first exception thrown by any task is rethrown after all
/// workers join.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// How each trajectory picks the chain's starting state.
struct InitialStateRule {
    std::optional<StateIndex> fixed;  ///< nullopt: uniform over all states

    static InitialStateRule uniform() { return {}; }
    static InitialStateRule at(StateIndex i) { return {i}; }

    [[nodiscard]] StateIndex draw(std::size_t num_states, std::uint64_t seed, std::uint64_t index) const {
        if (fixed) {
            if (*fixed >= num_states) throw Error(ErrorCode::IndexOutOfRange, "initial chain state out of range");
            return *fixed;
        }
        Rng rng = make_rng(seed, Stream::ChainStartState, index);
        auto s = static_cast<StateIndex>(uniform01(rng) * static_cast<double>(num_states));
        return std::min(s, num_states - 1);
    }
};

/// Fixed initial value or a uniform draw on [lo, hi].
struct InitialCondition {
    enum class Kind { Fixed, Uniform } kind = Kind::Fixed;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    static InitialCondition fixed_at(double v) { return {Kind::Fixed, v, v, v}; }
    static InitialCondition uniform(double lo, double hi) { return {Kind::Uniform, 0.5 * (lo + hi), lo, hi}; }

    [[nodiscard]] double draw(std::uint64_t seed, std::uint64_t index) const {
        if (kind == Kind::Fixed) return value;
        Rng rng = make_rng(seed, Stream::Initial, index);
        return lo + (hi - lo) * uniform01(rng);
    }
};

struct RunOptions {
    MainScheme main = MainScheme::Milstein;
    unsigned threads = 1;
    bool keep_first_trajectory = false;  ///< keep step records of trajectory 0
};

// ---------------------------------------------------------------------------
// Strong convergence order
// ---------------------------------------------------------------------------

struct ConvergenceReport {
    std::vector<double> h_max_grid;
    std::vector<double> rms_errors;
    double fitted_order = 0.0;
    double fit_intercept = 0.0;
    std::size_t sample_count = 0;
    MainScheme scheme = MainScheme::Milstein;
    std::optional<Trajectory> first_trajectory;  ///< sample 0 at the finest level
};

struct StrongOrderSetup {
    LinearModelParams model;
    GeneratorMatrix generator = GeneratorMatrix::zero(1);
    double x0 = 1.0;
    double horizon = 1.0;
    std::vector<double> grid;  ///< strictly decreasing h_max values
    double rho = 15.0;
    double k = 10.0;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    InitialStateRule r0 = InitialStateRule::at(0);
};

/// RMS terminal error against the exact linear solution on each h_max level.
/// Each sample draws one chain and one Brownian path shared by every level;
/// the exact solution queries the path first, then levels run finest first.
inline ConvergenceReport strong_order_study(const StrongOrderSetup& s, const RunOptions& opts = {}) {
    if (s.grid.size() < 3) throw Error(ErrorCode::DegenerateGrid, "need at least 3 grid levels");
    for (std::size_t l = 1; l < s.grid.size(); ++l) {
        if (!(s.grid[l] < s.grid[l - 1])) throw Error(ErrorCode::InvalidParams, "grid must be strictly decreasing");
    }
    if (s.samples < 100) throw Error(ErrorCode::InvalidParams, "need at least 100 samples");
    const LinearModel model(s.model);
    if (model.num_states() != s.generator.num_states()) {
        throw Error(ErrorCode::InvalidParams, "model and generator disagree on the number of states");
    }
    std::vector<StepParams> levels;
    levels.reserve(s.grid.size());
    for (double h : s.grid) levels.emplace_back(h, s.rho, s.k);

    const std::size_t L = levels.size();
    std::vector<double> sq_errors(s.samples * L, 0.0);
    std::optional<Trajectory> first;

    parallel_for(s.samples, opts.threads, [&](std::size_t i) {
        Rng chain_rng = make_rng(s.seed, Stream::Chain, i);
        const StateIndex r0 = s.r0.draw(s.generator.num_states(), s.seed, i);
        const MarkovPath chain = simulate_chain(s.generator, r0, s.horizon, chain_rng);
        BrownianPath w(make_rng(s.seed, Stream::Brownian, i));
        const double exact = exact_linear_solution(s.model, s.x0, chain, w, s.horizon);
        for (std::size_t l = L; l-- > 0;) {
            SolveOptions so;
            so.keep_records = opts.keep_first_trajectory && i == 0 && l == L - 1;
            Trajectory tr = solve_trajectory(model, chain, w, s.x0, s.horizon, levels[l], opts.main, so);
            const double e = tr.terminal_value - exact;
            sq_errors[i * L + l] = e * e;
            if (so.keep_records) first = std::move(tr);
        }
    });

    ConvergenceReport rep;
    rep.h_max_grid = s.grid;
    rep.sample_count = s.samples;
    rep.scheme = opts.main;
    rep.rms_errors.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double sum = 0.0;
        for (std::size_t i = 0; i < s.samples; ++i) sum += sq_errors[i * L + l];
        rep.rms_errors[l] = std::sqrt(sum / static_cast<double>(s.samples));
    }
    std::vector<double> lx(L);
    std::vector<double> ly(L);
    for (std::size_t l = 0; l < L; ++l) {
        lx[l] = std::log(rep.h_max_grid[l]);
        ly[l] = std::log(rep.rms_errors[l]);
    }
    const LinearFit fit = least_squares(lx, ly);
    rep.fitted_order = fit.slope;
    rep.fit_intercept = fit.intercept;
    rep.first_trajectory = std::move(first);
    return rep;
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct EnsembleSummary {
    std::vector<double> terminal_values;  ///< successful trajectories, in index order
    double mean = 0.0;
    double std_dev = 0.0;
    double standard_error = 0.0;
    Histogram histogram;
    std::size_t total_steps = 0;
    std::size_t backstop_steps = 0;
    double backstop_fraction = 0.0;
    std::size_t requested = 0;
    std::size_t failed_count = 0;
    std::vector<std::string> failures;  ///< first few diagnostics
    std::optional<Trajectory> first_trajectory;
};

namespace detail {

struct TrajectoryOutcome {
    bool ok = false;
    double initial = 0.0;
    double terminal = 0.0;
    std::size_t steps = 0;
    std::size_t backstops = 0;
    std::string error;
};

template <RegimeModel M>
TrajectoryOutcome run_one(const M& model, const GeneratorMatrix& g, double x0, StateIndex r0, double horizon,
                          const StepParams& p, MainScheme main, std::uint64_t seed, std::uint64_t index,
                          std::optional<Trajectory>* keep) {
    TrajectoryOutcome out;
    out.initial = x0;
    // the chain is generated in full before any solver step
    Rng chain_rng = make_rng(seed, Stream::Chain, index);
    const MarkovPath chain = simulate_chain(g, r0, horizon, chain_rng);
    BrownianPath w(make_rng(seed, Stream::Brownian, index));
    SolveOptions so;
    so.keep_records = keep != nullptr;
    try {
        Trajectory tr = solve_trajectory(model, chain, w, x0, horizon, p, main, so);
        out.ok = true;
        out.terminal = tr.terminal_value;
        out.steps = tr.step_count;
        out.backstops = tr.backstop_count;
        if (keep) *keep = std::move(tr);
    } catch (const Error& e) {
        if (!is_trajectory_failure(e.code())) throw;
        out.error = "trajectory " + std::to_string(index) + ": " + e.what();
    }
    return out;
}

inline void finish_summary(EnsembleSummary& s) {
    const SampleMoments m = sample_moments(s.terminal_values);
    s.mean = m.mean;
    s.std_dev = m.std_dev;
    s.standard_error = m.standard_error;
    s.histogram = density_histogram(s.terminal_values);
    s.backstop_fraction =
        s.total_steps == 0 ? 0.0 : static_cast<double>(s.backstop_steps) / static_cast<double>(s.total_steps);
}

inline void check_model_states(std::size_t model_states, const GeneratorMatrix& g) {
    if (model_states != g.num_states()) {
        throw Error(ErrorCode::InvalidParams, "model has " + std::to_string(model_states) +
                                                  " states but generator has " + std::to_string(g.num_states()));
    }
}

constexpr std::size_t kMaxRecordedFailures = 16;

}  // namespace detail

/// M independent trajectories, each with a fresh chain, Brownian path and
/// initial value. Trajectories that fail (nonfinite value, root solve failure,
/// step budget) are counted and excluded from the statistics.
template <RegimeModel Model>
EnsembleSummary run_ensemble(const Model& model, const GeneratorMatrix& g, const InitialCondition& initial,
                             const InitialStateRule& r0, double horizon, const StepParams& p, std::size_t count,
                             std::uint64_t seed, const RunOptions& opts = {}) {
    if (count < 1) throw Error(ErrorCode::InvalidParams, "need at least one trajectory");
    detail::check_model_states(model.num_states(), g);

    std::vector<detail::TrajectoryOutcome> outcomes(count);
    std::optional<Trajectory> first;
    parallel_for(count, opts.threads, [&](std::size_t i) {
        const double x0 = initial.draw(seed, i);
        const StateIndex s0 = r0.draw(g.num_states(), seed, i);
        outcomes[i] = detail::run_one(model, g, x0, s0, horizon, p, opts.main, seed, i,
                                      opts.keep_first_trajectory && i == 0 ? &first : nullptr);
    });

    EnsembleSummary s;
    s.requested = count;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++s.failed_count;
            if (s.failures.size() < detail::kMaxRecordedFailures) s.failures.push_back(o.error);
            continue;
        }
        s.terminal_values.push_back(o.terminal);
        s.total_steps += o.steps;
        s.backstop_steps += o.backstops;
    }
    if (s.terminal_values.empty()) {
        throw Error(ErrorCode::AllTrajectoriesFailed,
                    s.failures.empty() ? std::string("no trajectory succeeded") : s.failures.front());
    }
    detail::finish_summary(s);
    s.first_trajectory = std::move(first);
    return s;
}

struct MeanChangeRow {
    double initial;
    double mean_final;    ///< over successful runs from this initial value
    double single_final;  ///< first successful run
    double mean_change;   ///< mean of (final - initial) over successful runs
    std::size_t successful_runs;
};

struct MeanChangeResult {
    std::vector<MeanChangeRow> rows;  ///< sorted by initial value
    double grand_mean_change = 0.0;   ///< over every successful run
    double grand_standard_error = 0.0;
    EnsembleSummary per_initial;  ///< statistics of the per-initial mean changes
};

struct MeanChangeSetup {
    double lo = 4000.0;
    double hi = 8000.0;
    double t_start = 5.0;  ///< day at which the uniform draw is the length
    double t_end = 30.0;
    std::size_t n_initials = 1000;
    std::size_t runs_per_initial = 100;
    std::uint64_t seed = 0;
    InitialStateRule r0 = InitialStateRule::uniform();
};

/// Draws n_initials uniform lengths on [lo, hi], runs runs_per_initial
/// trajectories from each over t_end - t_start, and reports the mean change.
template <RegimeModel Model>
MeanChangeResult mean_change_study(const Model& model, const GeneratorMatrix& g, const StepParams& p,
                                   const MeanChangeSetup& s, const RunOptions& opts = {}) {
    if (!(s.hi > s.lo) || !(s.lo > 0.0)) throw Error(ErrorCode::InvalidParams, "need hi > lo > 0");
    if (!(s.t_end > s.t_start)) throw Error(ErrorCode::InvalidParams, "need t_end > t_start");
    if (s.n_initials < 1 || s.runs_per_initial < 1) {
        throw Error(ErrorCode::InvalidParams, "need at least one initial value and one run");
    }
    detail::check_model_states(model.num_states(), g);

    const double horizon = s.t_end - s.t_start;
    const InitialCondition ic = InitialCondition::uniform(s.lo, s.hi);
    std::vector<double> initials(s.n_initials);
    for (std::size_t j = 0; j < s.n_initials; ++j) initials[j] = ic.draw(s.seed, j);

    const std::size_t total = s.n_initials * s.runs_per_initial;
    std::vector<detail::TrajectoryOutcome> outcomes(total);
    std::optional<Trajectory> first;
    parallel_for(total, opts.threads, [&](std::size_t idx) {
        const std::size_t j = idx / s.runs_per_initial;
        const StateIndex s0 = s.r0.draw(g.num_states(), s.seed, idx);
        outcomes[idx] = detail::run_one(model, g, initials[j], s0, horizon, p, opts.main, s.seed, idx,
                                        opts.keep_first_trajectory && idx == 0 ? &first : nullptr);
    });

    MeanChangeResult res;
    EnsembleSummary& summary = res.per_initial;
    summary.requested = total;
    std::vector<double> all_changes;
    all_changes.reserve(total);
    for (std::size_t j = 0; j < s.n_initials; ++j) {
        MeanChangeRow row{initials[j], 0.0, 0.0, 0.0, 0};
        double sum = 0.0;
        double change_sum = 0.0;
        for (std::size_t r = 0; r < s.runs_per_initial; ++r) {
            const auto& o = outcomes[j * s.runs_per_initial + r];
            if (!o.ok) {
                ++summary.failed_count;
                if (summary.failures.size() < detail::kMaxRecordedFailures) summary.failures.push_back(o.error);
                continue;
            }
            if (row.successful_runs == 0) row.single_final = o.terminal;
            ++row.successful_runs;
            sum += o.terminal;
            change_sum += o.terminal - o.initial;
            all_changes.push_back(o.terminal - o.initial);
            summary.total_steps += o.steps;
            summary.backstop_steps += o.backstops;
        }
        if (row.successful_runs == 0) continue;
        row.mean_final = sum / static_cast<double>(row.successful_runs);
        row.mean_change = change_sum / static_cast<double>(row.successful_runs);
        res.rows.push_back(row);
        summary.terminal_values.push_back(row.mean_change);
    }
    if (res.rows.empty()) {
        throw Error(ErrorCode::AllTrajectoriesFailed,
                    summary.failures.empty() ? std::string("no trajectory succeeded") : summary.failures.front());
    }
    detail::finish_summary(summary);
    summary.first_trajectory = std::move(first);

    const SampleMoments all = sample_moments(all_changes);
    res.grand_mean_change = all.mean;
    res.grand_standard_error = all.standard_error;
    std::stable_sort(res.rows.begin(), res.rows.end(),
                     [](const MeanChangeRow& a, const MeanChangeRow& b) { return a.initial < b.initial; });
    return res;
}

}  // namespace sdews
