#pragma once

#include <chrono>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdews/config.hpp"
#include "sdews/error.hpp"
#include "sdews/harness.hpp"
#include "sdews/io.hpp"

namespace sdews::cli {

struct RunOutcome {
    std::vector<std::string> files;  ///< written, relative to the output directory
    json summary;
    std::size_t failed_count = 0;
};

namespace detail {

inline json ensemble_json(const EnsembleSummary& s) {
    json j;
    j["mean"] = s.mean;
    j["sd"] = s.std_dev;
    j["se"] = s.standard_error;
    j["M"] = s.requested;
    j["successful"] = s.terminal_values.size();
    j["failed_count"] = s.failed_count;
    j["total_steps"] = s.total_steps;
    j["backstop_steps"] = s.backstop_steps;
    j["backstop_fraction"] = s.backstop_fraction;
    j["failures"] = s.failures;
    return j;
}

template <class Fn>
decltype(auto) with_model(const RunConfig& c, Fn&& fn) {
    if (c.model.kind == ModelConfig::Kind::Telomere) return fn(TelomereModel(c.model.telomere_states));
    return fn(LinearModel(c.model.linear));
}

class OutputDir {
public:
    explicit OutputDir(const std::filesystem::path& dir) : dir_(dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir_.string() + ": " + ec.message());
    }
    void write(const std::string& name, const std::string& content, RunOutcome& out) {
        io::write_text(dir_ / name, content);
        out.files.push_back(name);
    }

private:
    std::filesystem::path dir_;
};

}  // namespace detail

/// Runs the experiment and writes its outputs plus config.json (a loadable echo
/// of the resolved configuration) and manifest.json into c.out_dir.
/// Everything except the wall time in manifest.json is a function of the config.
inline RunOutcome run(const RunConfig& c, std::ostream& log) {
    const auto started = std::chrono::steady_clock::now();
    RunOutcome out;
    detail::OutputDir dir(c.out_dir);
    const GeneratorMatrix g = validate_generator(c.generator);
    RunOptions opts;
    opts.main = c.scheme;
    opts.threads = c.threads;
    opts.keep_first_trajectory = c.dump_trajectory;

    json summary;
    summary["experiment"] = std::string(to_string(c.experiment));
    summary["seed"] = c.seed;

    switch (c.experiment) {
        case Experiment::SimulateChain: {
            std::vector<double> switch_counts;
            std::optional<MarkovPath> first;
            for (std::size_t i = 0; i < c.trajectories; ++i) {
                Rng rng = make_rng(c.seed, Stream::Chain, i);
                const StateIndex r0 = c.r0_rule().draw(g.num_states(), c.seed, i);
                MarkovPath path = simulate_chain(g, r0, c.horizon, rng);
                switch_counts.push_back(static_cast<double>(path.num_switches()));
                if (i == 0) first = std::move(path);
            }
            dir.write("chain.csv", io::chain_csv(*first), out);
            const SampleMoments m = sample_moments(switch_counts);
            summary["paths"] = c.trajectories;
            summary["mean_switches"] = m.mean;
            summary["se_switches"] = m.standard_error;
            log << "simulated " << c.trajectories << " chain path(s); mean switches " << io::format_double(m.mean)
                << '\n';
            break;
        }
        case Experiment::Convergence: {
            StrongOrderSetup s;
            s.model = c.model.linear;
            s.generator = g;
            s.x0 = c.initial.value;
            s.horizon = c.horizon;
            s.grid = c.grid;
            s.rho = c.rho;
            s.k = c.k;
            s.samples = c.trajectories;
            s.seed = c.seed;
            s.r0 = c.r0_rule();
            const ConvergenceReport rep = strong_order_study(s, opts);
            dir.write("convergence.csv", io::convergence_csv(rep), out);
            if (rep.first_trajectory) dir.write("trajectory.csv", io::trajectory_csv(*rep.first_trajectory), out);
            summary["scheme"] = std::string(to_string(rep.scheme));
            summary["M"] = rep.sample_count;
            summary["h_max"] = rep.h_max_grid;
            summary["rms_error"] = rep.rms_errors;
            summary["fitted_order"] = rep.fitted_order;
            summary["fit_intercept"] = rep.fit_intercept;
            summary["failed_count"] = 0;
            log << "fitted strong order " << io::format_double(rep.fitted_order) << " (" << to_string(rep.scheme)
                << ", M = " << rep.sample_count << ")\n";
            break;
        }
        case Experiment::Ensemble: {
            const EnsembleSummary s = detail::with_model(c, [&](const auto& model) {
                return run_ensemble(model, g, c.initial, c.r0_rule(), c.horizon, c.step_params(), c.trajectories,
                                    c.seed, opts);
            });
            dir.write("histogram.csv", io::histogram_csv(s.histogram), out);
            dir.write("terminal_values.csv", io::terminal_values_csv(s), out);
            if (s.first_trajectory) dir.write("trajectory.csv", io::trajectory_csv(*s.first_trajectory), out);
            summary.update(detail::ensemble_json(s));
            out.failed_count = s.failed_count;
            log << "ensemble mean " << io::format_double(s.mean) << " (se " << io::format_double(s.standard_error)
                << ", M = " << s.terminal_values.size() << ", failed " << s.failed_count << ", backstop fraction "
                << io::format_double(s.backstop_fraction) << ")\n";
            break;
        }
        case Experiment::MeanChange: {
            MeanChangeSetup ms = c.mean_change;
            ms.seed = c.seed;
            ms.r0 = c.r0_rule();
            const MeanChangeResult res = detail::with_model(
                c, [&](const auto& model) { return mean_change_study(model, g, c.step_params(), ms, opts); });
            dir.write("meanchange.csv", io::meanchange_csv(res), out);
            dir.write("histogram.csv", io::histogram_csv(res.per_initial.histogram), out);
            if (res.per_initial.first_trajectory) {
                dir.write("trajectory.csv", io::trajectory_csv(*res.per_initial.first_trajectory), out);
            }
            summary["grand_mean_change"] = res.grand_mean_change;
            summary["grand_se"] = res.grand_standard_error;
            summary["per_initial"] = detail::ensemble_json(res.per_initial);
            summary["failed_count"] = res.per_initial.failed_count;
            out.failed_count = res.per_initial.failed_count;
            log << "grand mean change " << io::format_double(res.grand_mean_change) << " (se "
                << io::format_double(res.grand_standard_error) << ", " << res.rows.size() << " initials x "
                << ms.runs_per_initial << " runs)\n";
            break;
        }
    }

    summary["params"] = to_json(c);
    dir.write("summary.json", summary.dump(2) + "\n", out);
    dir.write("config.json", to_json(c).dump(2) + "\n", out);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest;
    manifest["tool"] = "sdews";
    manifest["version"] = std::string(kVersion);
    manifest["experiment"] = std::string(to_string(c.experiment));
    manifest["seed"] = c.seed;
    manifest["config"] = to_json(c);
    manifest["wall_time_seconds"] = wall;
    manifest["failed_count"] = out.failed_count;
    manifest["outputs"] = out.files;
    io::write_text(std::filesystem::path(c.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    out.files.push_back("manifest.json");
    out.summary = std::move(summary);
    return out;
}

}  // namespace sdews::cli
