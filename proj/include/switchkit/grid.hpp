#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "switchkit/errors.hpp"

namespace switchkit {

/// A sampled real function of time with a known limit at +infinity.
/// `noise`, when non-empty, is a per-point 1-sigma scale (Monte Carlo
/// standard errors propagated through any smoothing).
struct GridFunction {
    std::vector<double> grid;
    std::vector<double> values;
    double tail = 0.0;
    std::vector<double> noise;

    void validate() const {
        if (grid.size() != values.size() || grid.size() < 2)
            throw parameter_error("grid function needs matching grid/values with >= 2 points");
        if (!noise.empty() && noise.size() != grid.size())
            throw parameter_error("grid function noise must match the grid size");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!std::isfinite(grid[i]) || !std::isfinite(values[i]))
                throw parameter_error("grid function entries must be finite");
            if (i > 0 && grid[i] <= grid[i - 1])
                throw parameter_error("grid must be strictly ascending");
        }
        if (!std::isfinite(tail)) throw parameter_error("tail limit must be finite");
    }

    // linear interpolation; flat on the left, tail beyond the last point
    double operator()(double t) const {
        if (t <= grid.front()) return values.front();
        if (t == grid.back()) return values.back();
        if (t > grid.back()) return tail;
        const auto it = std::upper_bound(grid.begin(), grid.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
        const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
        return values[i] + w * (values[i + 1] - values[i]);
    }
};

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return acc;
}

inline std::vector<double> cumulative_trapezoid(std::span<const double> x,
                                                std::span<const double> y) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return out;
}

inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 2 || !(b > a)) throw parameter_error("linspace needs n >= 2 and b > a");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (n - 1);
    out.back() = b;
    return out;
}

inline std::vector<double> log_spaced(double a, double b, int n) {
    if (!(a > 0.0) || !(b > a) || n < 2) throw parameter_error("log_spaced needs 0 < a < b, n >= 2");
    std::vector<double> out(static_cast<std::size_t>(n));
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * static_cast<double>(i) / (n - 1));
    out.back() = b;
    return out;
}

}  // namespace switchkit
