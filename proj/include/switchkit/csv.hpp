#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "switchkit/errors.hpp"
#include "switchkit/estimators.hpp"
#include "switchkit/grid.hpp"
#include "switchkit/process.hpp"

namespace switchkit {

// shortest representation that round-trips a double; deterministic on a
// fixed platform, which is what the seeded-output contract requires
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        return true;
    }
    return false;
}

inline double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parameter_error(std::string("CSV: cannot parse '") + s + "' as " + what);
    }
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "# schema: switchkit/trajectory/v1\n";
    os << "initial_sign,t_start\n";
    os << traj.initial_sign << ',' << format_double(traj.t_start) << '\n';
    os << "# epochs, one per row\n";
    for (double e : traj.epochs) os << format_double(e) << '\n';
}

/// Reads the trajectory dump; the span end is taken to be the last epoch.
inline Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!detail::next_data_line(is, line) || line != "initial_sign,t_start")
        throw parameter_error("trajectory CSV: expected header 'initial_sign,t_start'");
    if (!detail::next_data_line(is, line)) throw parameter_error("trajectory CSV: missing meta row");
    const auto meta = detail::split_csv_line(line);
    if (meta.size() != 2) throw parameter_error("trajectory CSV: meta row needs 2 fields");
    Trajectory traj;
    traj.initial_sign = static_cast<int>(detail::parse_double(meta[0], "initial_sign"));
    traj.t_start = detail::parse_double(meta[1], "t_start");
    while (detail::next_data_line(is, line)) traj.epochs.push_back(detail::parse_double(line, "epoch"));
    if (traj.epochs.empty()) throw parameter_error("trajectory CSV: no epochs");
    traj.t_end = traj.epochs.back();
    return traj;
}

inline void write_estimate_csv(std::ostream& os, const EstimateTable& table) {
    os << "# schema: switchkit/estimate/v1\n";
    os << "# kind: " << to_string(table.kind) << '\n';
    os << "t,mean,se,n_paths\n";
    for (std::size_t i = 0; i < table.grid.size(); ++i)
        os << format_double(table.grid[i]) << ',' << format_double(table.mean[i]) << ','
           << format_double(table.se[i]) << ',' << table.n_paths << '\n';
}

inline EstimateTable read_estimate_csv(std::istream& is) {
    std::string line;
    if (!detail::next_data_line(is, line) || line != "t,mean,se,n_paths")
        throw parameter_error("estimate CSV: expected header 't,mean,se,n_paths'");
    EstimateTable table;
    while (detail::next_data_line(is, line)) {
        const auto f = detail::split_csv_line(line);
        if (f.size() != 4) throw parameter_error("estimate CSV: rows need 4 fields");
        table.grid.push_back(detail::parse_double(f[0], "t"));
        table.mean.push_back(detail::parse_double(f[1], "mean"));
        table.se.push_back(detail::parse_double(f[2], "se"));
        table.n_paths = static_cast<long long>(detail::parse_double(f[3], "n_paths"));
    }
    if (table.grid.empty()) throw parameter_error("estimate CSV: no rows");
    return table;
}

inline void write_grid_csv(std::ostream& os, const GridFunction& g, const char* value_name) {
    os << "# schema: switchkit/grid/v1\n";
    os << "t," << value_name << '\n';
    for (std::size_t i = 0; i < g.grid.size(); ++i)
        os << format_double(g.grid[i]) << ',' << format_double(g.values[i]) << '\n';
}

}  // namespace switchkit
