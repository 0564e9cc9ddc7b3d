// Command-line front end: sdews <simulate-chain|convergence|ensemble|mean-change> [flags]
//
// Exit codes: 0 success, 2 configuration error, 3 computation failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sdews/app.hpp"
#include "sdews/config.hpp"
#include "sdews/error.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitComputation = 3;

bool is_config_error(sdews::ErrorCode code) {
    using sdews::ErrorCode;
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::ValidationError:
        case ErrorCode::NonSquare:
        case ErrorCode::NegativeOffDiagonal:
        case ErrorCode::RowSumNonzero:
        case ErrorCode::InvalidParams:
        case ErrorCode::DegenerateGrid:
            return true;
        default:
            return false;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace sdews::cli;

    CLI::App app{"Adaptive hybrid Milstein solver for SDEs with Markovian switching"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t trajectories = 0;
    std::string model;
    std::string scheme;
    unsigned threads = 0;
    std::size_t initials = 0;
    std::size_t runs = 0;
    bool dump = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (or a manifest.json from an earlier run)")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master random seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--trajectories", trajectories, "number of trajectories / samples / paths");
        sub->add_option("--threads", threads, "worker threads (0 = all cores)");
        sub->add_flag("--dump-trajectory", dump, "write trajectory.csv for the first trajectory");
    };

    CLI::App* chain_cmd = app.add_subcommand("simulate-chain", "simulate Markov chain paths");
    add_common(chain_cmd);

    CLI::App* conv_cmd = app.add_subcommand("convergence", "strong convergence order study on the linear model");
    add_common(conv_cmd);
    conv_cmd->add_option("--scheme", scheme, "main map: milstein | euler-maruyama");

    CLI::App* ens_cmd = app.add_subcommand("ensemble", "Monte Carlo ensemble of terminal values");
    add_common(ens_cmd);
    ens_cmd->add_option("--model", model, "telomere | linear (preset parameters)");
    ens_cmd->add_option("--scheme", scheme, "main map: milstein | euler-maruyama");

    CLI::App* mc_cmd = app.add_subcommand("mean-change", "mean change from uniformly drawn initial lengths");
    add_common(mc_cmd);
    mc_cmd->add_option("--model", model, "telomere | linear (preset parameters)");
    mc_cmd->add_option("--initials", initials, "number of uniformly drawn initial values");
    mc_cmd->add_option("--runs", runs, "trajectories per initial value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    const Experiment experiment = parse_experiment(sub->get_name());

    Overrides flags;
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--seed")) flags.seed = seed;
    if (given("--out")) flags.out_dir = out_dir;
    if (given("--trajectories")) flags.trajectories = trajectories;
    if (given("--threads")) flags.threads = threads;
    if (given("--dump-trajectory")) flags.dump_trajectory = dump;
    if (sub->get_option_no_throw("--model") && given("--model")) flags.model = model;
    if (sub->get_option_no_throw("--scheme") && given("--scheme")) flags.scheme = scheme;
    if (sub->get_option_no_throw("--initials") && given("--initials")) flags.initials = initials;
    if (sub->get_option_no_throw("--runs") && given("--runs")) flags.runs_per_initial = runs;

    RunConfig config;
    try {
        config = config_path.empty() ? load_config(experiment, nullptr, flags)
                                     : load_config(experiment, std::filesystem::path(config_path), flags);
    } catch (const sdews::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const RunOutcome outcome = run(config, std::cout);
        std::cout << "wrote";
        for (const auto& f : outcome.files) std::cout << ' ' << f;
        std::cout << " to " << config.out_dir << '\n';
    } catch (const sdews::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_config_error(e.code()) ? kExitConfig : kExitComputation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitComputation;
    }
    return 0;
}
