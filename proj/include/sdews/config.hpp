#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdews/ctmc.hpp"
#include "sdews/error.hpp"
#include "sdews/harness.hpp"
#include "sdews/models.hpp"
#include "sdews/schemes.hpp"
#include "sdews/stepping.hpp"

namespace sdews::cli {

using json = nlohmann::json;

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 12345;

enum class Experiment { SimulateChain, Convergence, Ensemble, MeanChange };

constexpr std::string_view to_string(Experiment e) noexcept {
    switch (e) {
        case Experiment::SimulateChain: return "simulate-chain";
        case Experiment::Convergence: return "convergence";
        case Experiment::Ensemble: return "ensemble";
        case Experiment::MeanChange: return "mean-change";
    }
    return "unknown";
}

inline Experiment parse_experiment(std::string_view s) {
    for (auto e : {Experiment::SimulateChain, Experiment::Convergence, Experiment::Ensemble, Experiment::MeanChange}) {
        if (s == to_string(e)) return e;
    }
    throw Error(ErrorCode::ValidationError, "unknown experiment '" + std::string(s) + "'");
}

struct ModelConfig {
    enum class Kind { Telomere, Linear } kind = Kind::Telomere;
    std::vector<TelomereRates> telomere_states = TelomereParams{}.state_map();
    LinearModelParams linear{{0.5, -0.5}, {0.3, 0.5}};

    [[nodiscard]] std::size_t num_states() const {
        return kind == Kind::Telomere ? telomere_states.size() : linear.mu.size();
    }
};

/// Fully resolved experiment description. Every field is explicit so that the
/// JSON echo written next to the outputs reproduces the run.
struct RunConfig {
    Experiment experiment = Experiment::Ensemble;
    ModelConfig model;
    std::vector<std::vector<double>> generator;
    double h_max = 0.03;
    double rho = 15.0;
    double k = 10.0;
    double horizon = 30.0;
    InitialCondition initial = InitialCondition::fixed_at(1000.0);
    std::optional<StateIndex> r0;  ///< zero-based; nullopt = uniform
    std::size_t trajectories = 1000;
    std::uint64_t seed = kDefaultSeed;
    std::string out_dir = "out";
    MainScheme scheme = MainScheme::Milstein;
    std::vector<double> grid;
    MeanChangeSetup mean_change;  ///< seed and r0 come from the top-level fields
    unsigned threads = 1;
    bool dump_trajectory = false;

    [[nodiscard]] StepParams step_params() const { return {h_max, rho, k}; }
    [[nodiscard]] InitialStateRule r0_rule() const { return r0 ? InitialStateRule::at(*r0) : InitialStateRule::uniform(); }
};

/// Flag values that take precedence over the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> trajectories;
    std::optional<std::string> model;
    std::optional<std::string> scheme;
    std::optional<unsigned> threads;
    std::optional<std::size_t> initials;
    std::optional<std::size_t> runs_per_initial;
    bool dump_trajectory = false;
};

inline std::vector<std::vector<double>> telomere_generator() {
    std::vector<std::vector<double>> g(4, std::vector<double>(4, 0.1));
    for (std::size_t i = 0; i < 4; ++i) g[i][i] = -0.3;
    return g;
}

inline std::vector<std::vector<double>> two_state_generator() { return {{-1.0, 1.0}, {1.0, -1.0}}; }

inline std::vector<std::vector<double>> zero_generator(std::size_t n) {
    return std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0));
}

inline std::vector<double> dyadic_grid(int first_exponent, int last_exponent) {
    std::vector<double> grid;
    for (int e = first_exponent; e <= last_exponent; ++e) grid.push_back(std::ldexp(1.0, -e));
    return grid;
}

/// Presets: telomere ensembles use the four-regime model with h_max = 0.03,
/// rho = 15, k = 10; convergence uses the two-state linear test model.
inline RunConfig default_config(Experiment e) {
    RunConfig c;
    c.experiment = e;
    switch (e) {
        case Experiment::SimulateChain:
            c.generator = telomere_generator();
            c.horizon = 30.0;
            c.r0 = 0;
            c.trajectories = 1;
            break;
        case Experiment::Convergence:
            c.model.kind = ModelConfig::Kind::Linear;
            c.generator = two_state_generator();
            c.horizon = 1.0;
            c.initial = InitialCondition::fixed_at(1.0);
            c.r0 = 0;
            c.trajectories = 1000;
            c.grid = dyadic_grid(4, 9);
            break;
        case Experiment::Ensemble:
            c.generator = telomere_generator();
            break;
        case Experiment::MeanChange:
            c.generator = telomere_generator();
            c.horizon = c.mean_change.t_end - c.mean_change.t_start;
            break;
    }
    return c;
}

namespace detail {

inline void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw Error(ErrorCode::ValidationError, std::string(where) + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw Error(ErrorCode::ValidationError, "unknown key '" + key + "' in " + std::string(where));
    }
}

inline double get_real(const json& v, std::string_view name) {
    if (!v.is_number()) throw Error(ErrorCode::ValidationError, std::string(name) + " must be a number");
    return v.get<double>();
}

inline std::uint64_t get_count(const json& v, std::string_view name) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw Error(ErrorCode::ValidationError, std::string(name) + " must be a non-negative integer");
}

inline std::vector<double> get_real_list(const json& v, std::string_view name) {
    if (!v.is_array()) throw Error(ErrorCode::ValidationError, std::string(name) + " must be an array");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(get_real(x, name));
    return out;
}

inline std::vector<std::vector<double>> get_matrix(const json& v, std::string_view name) {
    if (!v.is_array()) throw Error(ErrorCode::ValidationError, std::string(name) + " must be an array of rows");
    std::vector<std::vector<double>> out;
    for (const auto& row : v) out.push_back(get_real_list(row, name));
    return out;
}

inline MainScheme parse_scheme(std::string_view s) {
    if (s == "milstein") return MainScheme::Milstein;
    if (s == "euler-maruyama" || s == "em") return MainScheme::EulerMaruyama;
    throw Error(ErrorCode::ValidationError, "scheme must be 'milstein' or 'euler-maruyama'");
}

inline ModelConfig preset_model(std::string_view kind) {
    ModelConfig m;
    if (kind == "telomere") {
        m.kind = ModelConfig::Kind::Telomere;
    } else if (kind == "linear") {
        m.kind = ModelConfig::Kind::Linear;
    } else {
        throw Error(ErrorCode::ValidationError, "model kind must be 'telomere' or 'linear'");
    }
    return m;
}

inline ModelConfig parse_model(const json& v) {
    if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string()) {
        throw Error(ErrorCode::ValidationError, "model needs a string 'kind'");
    }
    ModelConfig m = preset_model(v["kind"].get<std::string>());
    if (m.kind == ModelConfig::Kind::Telomere) {
        reject_unknown(v, "model", {"kind", "c", "a", "states"});
        if (v.contains("states") && (v.contains("c") || v.contains("a"))) {
            throw Error(ErrorCode::ValidationError, "telomere model takes either 'states' or 'c'/'a', not both");
        }
        if (v.contains("states")) {
            m.telomere_states.clear();
            if (!v["states"].is_array()) throw Error(ErrorCode::ValidationError, "model.states must be an array");
            for (const auto& s : v["states"]) {
                reject_unknown(s, "model.states[]", {"c", "a"});
                if (!s.contains("c") || !s.contains("a")) {
                    throw Error(ErrorCode::ValidationError, "each telomere state needs 'c' and 'a'");
                }
                m.telomere_states.push_back({get_real(s["c"], "c"), get_real(s["a"], "a")});
            }
        } else if (v.contains("c") || v.contains("a")) {
            TelomereParams p;
            if (v.contains("c")) {
                const auto c = get_real_list(v["c"], "model.c");
                if (c.size() != 2) throw Error(ErrorCode::ValidationError, "model.c must hold (c1, c2)");
                p.c_values = {c[0], c[1]};
            }
            if (v.contains("a")) {
                const auto a = get_real_list(v["a"], "model.a");
                if (a.size() != 2) throw Error(ErrorCode::ValidationError, "model.a must hold (a1, a2)");
                p.a_values = {a[0], a[1]};
            }
            m.telomere_states = p.state_map();
        }
    } else {
        reject_unknown(v, "model", {"kind", "mu", "sigma"});
        if (v.contains("mu")) m.linear.mu = get_real_list(v["mu"], "model.mu");
        if (v.contains("sigma")) m.linear.sigma = get_real_list(v["sigma"], "model.sigma");
    }
    return m;
}

inline InitialCondition parse_initial(const json& v) {
    if (v.is_number()) return InitialCondition::fixed_at(get_real(v, "initial"));
    reject_unknown(v, "initial", {"fixed", "uniform"});
    if (v.contains("fixed") == v.contains("uniform")) {
        throw Error(ErrorCode::ValidationError, "initial needs exactly one of 'fixed' or 'uniform'");
    }
    if (v.contains("fixed")) return InitialCondition::fixed_at(get_real(v["fixed"], "initial.fixed"));
    const auto r = get_real_list(v["uniform"], "initial.uniform");
    if (r.size() != 2) throw Error(ErrorCode::ValidationError, "initial.uniform must be [lo, hi]");
    return InitialCondition::uniform(r[0], r[1]);
}

inline std::vector<std::vector<double>> default_generator_for(const ModelConfig& m) {
    if (m.kind == ModelConfig::Kind::Telomere && m.num_states() == 4) return telomere_generator();
    if (m.kind == ModelConfig::Kind::Linear && m.num_states() == 2) return two_state_generator();
    return zero_generator(m.num_states());
}

}  // namespace detail

/// Checks every module precondition so that nothing fails on bad input after
/// computation has started. Throws ValidationError with the module's message.
inline void validate(const RunConfig& c) {
    try {
        const GeneratorMatrix g = validate_generator(c.generator);
        if (c.experiment != Experiment::SimulateChain) {
            (void)c.step_params();
            if (c.model.kind == ModelConfig::Kind::Telomere) {
                (void)TelomereModel(c.model.telomere_states);
            } else {
                (void)LinearModel(c.model.linear);
            }
            if (c.model.num_states() != g.num_states()) {
                throw Error(ErrorCode::ValidationError, "model has " + std::to_string(c.model.num_states()) +
                                                            " states but the generator has " +
                                                            std::to_string(g.num_states()));
            }
        }
        if (c.r0 && *c.r0 >= g.num_states()) throw Error(ErrorCode::ValidationError, "r0 out of range");
        if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) throw Error(ErrorCode::ValidationError, "T must be positive");
        if (c.trajectories < 1) throw Error(ErrorCode::ValidationError, "trajectories must be at least 1");
        if (c.initial.kind == InitialCondition::Kind::Uniform && !(c.initial.hi > c.initial.lo)) {
            throw Error(ErrorCode::ValidationError, "initial.uniform needs lo < hi");
        }
        if (!std::isfinite(c.initial.value)) throw Error(ErrorCode::ValidationError, "initial value must be finite");
        switch (c.experiment) {
            case Experiment::Convergence:
                if (c.model.kind != ModelConfig::Kind::Linear) {
                    throw Error(ErrorCode::ValidationError, "convergence needs the linear model (exact solution)");
                }
                if (c.initial.kind != InitialCondition::Kind::Fixed) {
                    throw Error(ErrorCode::ValidationError, "convergence needs a fixed initial value");
                }
                if (c.grid.size() < 3) throw Error(ErrorCode::DegenerateGrid, "grid needs at least 3 levels");
                for (std::size_t l = 0; l < c.grid.size(); ++l) {
                    (void)StepParams(c.grid[l], c.rho, c.k);
                    if (l > 0 && !(c.grid[l] < c.grid[l - 1])) {
                        throw Error(ErrorCode::ValidationError, "grid must be strictly decreasing");
                    }
                }
                if (c.trajectories < 100) throw Error(ErrorCode::ValidationError, "convergence needs >= 100 samples");
                break;
            case Experiment::MeanChange: {
                const auto& m = c.mean_change;
                if (!(m.hi > m.lo) || !(m.lo > 0.0)) throw Error(ErrorCode::ValidationError, "mean_change needs hi > lo > 0");
                if (!(m.t_end > m.t_start)) throw Error(ErrorCode::ValidationError, "mean_change needs t_end > t_start");
                if (m.n_initials < 1 || m.runs_per_initial < 1) {
                    throw Error(ErrorCode::ValidationError, "mean_change needs n_initials >= 1 and runs_per_initial >= 1");
                }
                break;
            }
            default:
                break;
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ValidationError) throw;
        throw Error(ErrorCode::ValidationError, e.what());
    }
}

/// Resolves presets, config-file values and flag overrides (in that order of
/// increasing precedence) and validates the result.
inline RunConfig load_config(Experiment experiment, const json* file, const Overrides& flags = {}) {
    RunConfig c = default_config(experiment);
    bool generator_given = false;

    if (file) {
        const json& f = *file;
        detail::reject_unknown(f, "config",
                               {"experiment", "model", "generator", "step", "T", "initial", "r0", "trajectories",
                                "seed", "out", "scheme", "grid", "mean_change", "threads", "dump_trajectory"});
        if (f.contains("experiment")) {
            if (!f["experiment"].is_string() || parse_experiment(f["experiment"].get<std::string>()) != experiment) {
                throw Error(ErrorCode::ValidationError, "config is for a different experiment");
            }
        }
        if (f.contains("model")) c.model = detail::parse_model(f["model"]);
        if (f.contains("generator")) {
            c.generator = detail::get_matrix(f["generator"], "generator");
            generator_given = true;
        }
        if (f.contains("step")) {
            const json& s = f["step"];
            detail::reject_unknown(s, "step", {"h_max", "rho", "k"});
            if (s.contains("h_max")) c.h_max = detail::get_real(s["h_max"], "step.h_max");
            if (s.contains("rho")) c.rho = detail::get_real(s["rho"], "step.rho");
            if (s.contains("k")) c.k = detail::get_real(s["k"], "step.k");
        }
        if (f.contains("T")) {
            if (experiment == Experiment::MeanChange) {
                throw Error(ErrorCode::ValidationError, "mean-change takes its horizon from mean_change.t_start/t_end");
            }
            c.horizon = detail::get_real(f["T"], "T");
        }
        if (f.contains("initial")) c.initial = detail::parse_initial(f["initial"]);
        if (f.contains("r0")) {
            const json& r = f["r0"];
            if (r.is_string() && r.get<std::string>() == "uniform") {
                c.r0.reset();
            } else {
                const auto one_based = detail::get_count(r, "r0");
                if (one_based < 1) throw Error(ErrorCode::ValidationError, "r0 is 1-based");
                c.r0 = static_cast<StateIndex>(one_based - 1);
            }
        }
        if (f.contains("trajectories")) c.trajectories = detail::get_count(f["trajectories"], "trajectories");
        if (f.contains("seed")) c.seed = detail::get_count(f["seed"], "seed");
        if (f.contains("out")) {
            if (!f["out"].is_string()) throw Error(ErrorCode::ValidationError, "out must be a string");
            c.out_dir = f["out"].get<std::string>();
        }
        if (f.contains("scheme")) {
            if (!f["scheme"].is_string()) throw Error(ErrorCode::ValidationError, "scheme must be a string");
            c.scheme = detail::parse_scheme(f["scheme"].get<std::string>());
        }
        if (f.contains("grid")) c.grid = detail::get_real_list(f["grid"], "grid");
        if (f.contains("dump_trajectory")) {
            if (!f["dump_trajectory"].is_boolean()) {
                throw Error(ErrorCode::ValidationError, "dump_trajectory must be true or false");
            }
            c.dump_trajectory = f["dump_trajectory"].get<bool>();
        }
        if (f.contains("threads")) c.threads = static_cast<unsigned>(detail::get_count(f["threads"], "threads"));
        if (f.contains("mean_change")) {
            const json& m = f["mean_change"];
            detail::reject_unknown(m, "mean_change", {"lo", "hi", "t_start", "t_end", "n_initials", "runs_per_initial"});
            auto& mc = c.mean_change;
            if (m.contains("lo")) mc.lo = detail::get_real(m["lo"], "mean_change.lo");
            if (m.contains("hi")) mc.hi = detail::get_real(m["hi"], "mean_change.hi");
            if (m.contains("t_start")) mc.t_start = detail::get_real(m["t_start"], "mean_change.t_start");
            if (m.contains("t_end")) mc.t_end = detail::get_real(m["t_end"], "mean_change.t_end");
            if (m.contains("n_initials")) mc.n_initials = detail::get_count(m["n_initials"], "mean_change.n_initials");
            if (m.contains("runs_per_initial")) {
                mc.runs_per_initial = detail::get_count(m["runs_per_initial"], "mean_change.runs_per_initial");
            }
        }
    }

    if (flags.model) {
        const bool same_kind = detail::preset_model(*flags.model).kind == c.model.kind;
        if (!same_kind) c.model = detail::preset_model(*flags.model);
    }
    if (!generator_given) c.generator = detail::default_generator_for(c.model);
    if (flags.seed) c.seed = *flags.seed;
    if (flags.out_dir) c.out_dir = *flags.out_dir;
    if (flags.trajectories) {
        if (experiment == Experiment::MeanChange) {
            c.mean_change.n_initials = *flags.trajectories;
        } else {
            c.trajectories = *flags.trajectories;
        }
    }
    if (flags.scheme) c.scheme = detail::parse_scheme(*flags.scheme);
    if (flags.threads) c.threads = *flags.threads;
    if (flags.initials) c.mean_change.n_initials = *flags.initials;
    if (flags.runs_per_initial) c.mean_change.runs_per_initial = *flags.runs_per_initial;
    c.dump_trajectory = c.dump_trajectory || flags.dump_trajectory;
    if (experiment == Experiment::MeanChange) c.horizon = c.mean_change.t_end - c.mean_change.t_start;

    validate(c);
    return c;
}

inline json parse_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::ParseError, "cannot open config " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

/// Accepts a config file or a manifest.json written by a previous run.
inline RunConfig load_config(Experiment experiment, const std::filesystem::path& path, const Overrides& flags = {}) {
    json f = parse_json_file(path);
    if (f.is_object() && f.contains("tool") && f.contains("config")) f = json(f["config"]);
    return load_config(experiment, &f, flags);
}

/// Config-file JSON for c; load_config(c.experiment, &to_json(c)) == c.
inline json to_json(const RunConfig& c) {
    json j;
    j["experiment"] = std::string(to_string(c.experiment));
    json m;
    if (c.model.kind == ModelConfig::Kind::Telomere) {
        m["kind"] = "telomere";
        m["states"] = json::array();
        for (const auto& s : c.model.telomere_states) m["states"].push_back({{"c", s.c}, {"a", s.a}});
    } else {
        m["kind"] = "linear";
        m["mu"] = c.model.linear.mu;
        m["sigma"] = c.model.linear.sigma;
    }
    j["model"] = m;
    j["generator"] = c.generator;
    j["step"] = {{"h_max", c.h_max}, {"rho", c.rho}, {"k", c.k}};
    if (c.experiment != Experiment::MeanChange) j["T"] = c.horizon;
    if (c.initial.kind == InitialCondition::Kind::Fixed) {
        j["initial"] = {{"fixed", c.initial.value}};
    } else {
        j["initial"] = {{"uniform", {c.initial.lo, c.initial.hi}}};
    }
    if (c.r0) {
        j["r0"] = *c.r0 + 1;
    } else {
        j["r0"] = "uniform";
    }
    j["trajectories"] = c.trajectories;
    j["seed"] = c.seed;
    j["out"] = c.out_dir;
    j["scheme"] = std::string(to_string(c.scheme));
    j["grid"] = c.grid;
    j["threads"] = c.threads;
    j["dump_trajectory"] = c.dump_trajectory;
    const auto& mc = c.mean_change;
    j["mean_change"] = {{"lo", mc.lo},           {"hi", mc.hi},
                        {"t_start", mc.t_start}, {"t_end", mc.t_end},
                        {"n_initials", mc.n_initials}, {"runs_per_initial", mc.runs_per_initial}};
    return j;
}

}  // namespace sdews::cli
