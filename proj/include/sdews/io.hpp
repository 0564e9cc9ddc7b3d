#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "sdews/ctmc.hpp"
#include "sdews/error.hpp"
#include "sdews/harness.hpp"
#include "sdews/schemes.hpp"
#include "sdews/stats.hpp"

namespace sdews::io {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw Error(ErrorCode::IoError, "cannot format double");
    return std::string(buf, res.ptr);
}

namespace detail {
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    f << content;
    if (!f) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}
}  // namespace detail

/// `# r0=<state>,T=<horizon>` metadata row, then `tau,state`. States are 1-based.
inline std::string chain_csv(const MarkovPath& path) {
    std::ostringstream os;
    os << "# r0=" << path.initial_state() + 1 << ",T=" << format_double(path.horizon()) << '\n';
    os << "tau,state\n";
    for (std::size_t k = 0; k < path.num_switches(); ++k) {
        os << format_double(path.switch_times()[k]) << ',' << path.states()[k] + 1 << '\n';
    }
    return os.str();
}

/// One row per mesh point `t,state,y,h,backstop`, starting with t = 0 (h = 0).
/// `state` is the regime in force on the step ending at t (1-based).
inline std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "t,state,y,h,backstop\n";
    if (!tr.records.empty()) {
        os << "0," << tr.records.front().state + 1 << ',' << format_double(tr.x0) << ",0,0\n";
    }
    for (const auto& r : tr.records) {
        os << format_double(r.t_end) << ',' << r.state + 1 << ',' << format_double(r.y_end) << ','
           << format_double(r.h) << ',' << (r.used_backstop ? 1 : 0) << '\n';
    }
    return os.str();
}

inline std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os << "bin_left,bin_right,density\n";
    for (std::size_t b = 0; b < h.densities.size(); ++b) {
        os << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ','
           << format_double(h.densities[b]) << '\n';
    }
    return os.str();
}

inline std::string convergence_csv(const ConvergenceReport& rep) {
    std::ostringstream os;
    os << "h_max,rms_error\n";
    for (std::size_t l = 0; l < rep.h_max_grid.size(); ++l) {
        os << format_double(rep.h_max_grid[l]) << ',' << format_double(rep.rms_errors[l]) << '\n';
    }
    return os.str();
}

inline std::string meanchange_csv(const MeanChangeResult& res) {
    std::ostringstream os;
    os << "initial,mean_final,single_final\n";
    for (const auto& r : res.rows) {
        os << format_double(r.initial) << ',' << format_double(r.mean_final) << ',' << format_double(r.single_final)
           << '\n';
    }
    return os.str();
}

inline std::string terminal_values_csv(const EnsembleSummary& s) {
    std::ostringstream os;
    os << "value\n";
    for (double v : s.terminal_values) os << format_double(v) << '\n';
    return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    detail::write_file(path, content);
}

}  // namespace sdews::io
