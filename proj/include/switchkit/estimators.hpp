#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "switchkit/errors.hpp"
#include "switchkit/grid.hpp"
#include "switchkit/process.hpp"
#include "switchkit/rng.hpp"

namespace switchkit {

enum class EstimateKind { E_plus, E_minus, P_plus, P_minus, R, stationary_mean };

inline const char* to_string(EstimateKind k) {
    switch (k) {
        case EstimateKind::E_plus: return "E_plus";
        case EstimateKind::E_minus: return "E_minus";
        case EstimateKind::P_plus: return "P_plus";
        case EstimateKind::P_minus: return "P_minus";
        case EstimateKind::R: return "R";
        default: return "stationary_mean";
    }
}

/// Monte Carlo estimate of a time-grid characteristic with pointwise
/// normal-approximation standard errors.
struct EstimateTable {
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> se;
    long long n_paths = 0;
    EstimateKind kind = EstimateKind::E_plus;
};

namespace detail {

// contiguous partition of [0, n) over worker threads; workers receive
// (worker index, lo, hi) and must only touch their own accumulator slot
template <class Worker>
void run_partitioned(long long n, int threads, Worker work) {
    if (threads <= 1) {
        work(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    const long long chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const long long lo = w * chunk;
        const long long hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&work, w, lo, hi] { work(w, lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// sign of the forced-start trajectory at every grid point, accumulated into
// sums; one path is evaluated at all grid points (common random numbers)
inline void accumulate_path_values(const Trajectory& traj, std::span<const double> grid,
                                   std::vector<double>& sums, bool indicator) {
    int cur = traj.initial_sign;
    std::size_t j = 1;  // epochs[0] is the anchored switch at 0
    const auto& e = traj.epochs;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (j < e.size() && e[j] <= grid[i]) {
            cur = -cur;
            ++j;
        }
        sums[i] += indicator ? (cur > 0 ? 1.0 : 0.0) : static_cast<double>(cur);
    }
}

inline EstimateTable reduce_sign_sums(std::span<const double> grid,
                                      const std::vector<std::vector<double>>& partial,
                                      long long n_paths, EstimateKind kind, bool indicator) {
    EstimateTable out;
    out.grid.assign(grid.begin(), grid.end());
    out.mean.assign(grid.size(), 0.0);
    out.se.assign(grid.size(), 0.0);
    out.n_paths = n_paths;
    out.kind = kind;
    for (const auto& p : partial)
        for (std::size_t i = 0; i < grid.size(); ++i) out.mean[i] += p[i];
    const double n = static_cast<double>(n_paths);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double m = out.mean[i] / n;
        out.mean[i] = m;
        // +-1 (or {0,1}) samples: the sample variance is a function of the mean
        const double var = indicator ? m * (1.0 - m) : 1.0 - m * m;
        out.se[i] = std::sqrt(std::max(0.0, var) / n);
    }
    return out;
}

inline void check_estimation_args(std::span<const double> t_grid, long long n_paths) {
    if (t_grid.empty()) throw parameter_error("estimation needs a non-empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_grid[i - 1]) throw parameter_error("time grid must be strictly ascending");
    if (n_paths < 100) throw parameter_error("estimation needs at least 100 paths");
}

enum class StartMode { forced, weighted };

inline EstimateTable estimate_sign_curve(const ProcessSpec& spec, StartMode mode, int sign,
                                         std::span<const double> t_grid, long long n_paths,
                                         std::uint64_t seed, int threads, EstimateKind kind,
                                         bool indicator) {
    check_estimation_args(t_grid, n_paths);
    if (t_grid.front() < 0.0) throw parameter_error("time grid must start at t >= 0");
    const double horizon = std::max(t_grid.back(), 1e-9);
    const int workers = std::max(1, threads);
    std::vector<std::vector<double>> partial(static_cast<std::size_t>(workers),
                                             std::vector<double>(t_grid.size(), 0.0));
    run_partitioned(n_paths, workers, [&](int w, long long lo, long long hi) {
        auto& sums = partial[static_cast<std::size_t>(w)];
        for (long long i = lo; i < hi; ++i) {
            Rng rng = path_rng(seed, static_cast<std::uint64_t>(i));
            const Trajectory traj =
                mode == StartMode::forced
                    ? simulate_nonstationary_forced(spec, sign, horizon, rng)
                    : simulate_nonstationary(spec, horizon, rng);
            accumulate_path_values(traj, t_grid, sums, indicator);
        }
    });
    return reduce_sign_sums(t_grid, partial, n_paths, kind, indicator);
}

}  // namespace detail

/// E_sign(t) over a grid: forces the initial sign, averages the path value at
/// every grid point (one path serves the whole grid).
inline EstimateTable estimate_E(const ProcessSpec& spec, int sign, std::span<const double> t_grid,
                                long long n_paths, std::uint64_t seed, int threads = 1) {
    return detail::estimate_sign_curve(spec, detail::StartMode::forced, sign, t_grid, n_paths, seed,
                                       threads, sign > 0 ? EstimateKind::E_plus : EstimateKind::E_minus,
                                       false);
}

/// Unconditional E D(t) with the initial sign drawn per path from start_prob.
inline EstimateTable estimate_E_mixed(const ProcessSpec& spec, std::span<const double> t_grid,
                                      long long n_paths, std::uint64_t seed, int threads = 1) {
    return detail::estimate_sign_curve(spec, detail::StartMode::weighted, +1, t_grid, n_paths, seed,
                                       threads, EstimateKind::E_plus, false);
}

/// P_sign(t) = P(D(t) = 1 | sign) over a grid.
inline EstimateTable estimate_P(const ProcessSpec& spec, int sign, std::span<const double> t_grid,
                                long long n_paths, std::uint64_t seed, int threads = 1) {
    return detail::estimate_sign_curve(spec, detail::StartMode::forced, sign, t_grid, n_paths, seed,
                                       threads, sign > 0 ? EstimateKind::P_plus : EstimateKind::P_minus,
                                       true);
}

/// Stationary mean E D~(t) over a grid (should be flat at gamma).
inline EstimateTable estimate_stationary_mean(const ProcessSpec& spec, std::span<const double> t_grid,
                                              long long n_paths, std::uint64_t seed, int threads = 1) {
    detail::check_estimation_args(t_grid, n_paths);
    const StationarySampler sampler(spec);
    const double t_min = std::min(0.0, t_grid.front()) - 1e-9;
    const double t_max = t_grid.back() + 1e-9;
    const int workers = std::max(1, threads);
    std::vector<std::vector<double>> partial(static_cast<std::size_t>(workers),
                                             std::vector<double>(t_grid.size(), 0.0));
    detail::run_partitioned(n_paths, workers, [&](int w, long long lo, long long hi) {
        auto& sums = partial[static_cast<std::size_t>(w)];
        for (long long i = lo; i < hi; ++i) {
            Rng rng = path_rng(seed, static_cast<std::uint64_t>(i));
            const Trajectory traj = sampler.trajectory(t_min, t_max, rng);
            for (std::size_t g = 0; g < t_grid.size(); ++g)
                sums[g] += static_cast<double>(value_at(traj, t_grid[g]));
        }
    });
    return detail::reduce_sign_sums(t_grid, partial, n_paths, EstimateKind::stationary_mean, false);
}

/// Stationary covariance R(lag) = Cov(D~(u), D~(u+lag)) on a lag grid.
/// Standard errors come from batch means over path blocks.
inline EstimateTable estimate_R(const ProcessSpec& spec, std::span<const double> lag_grid,
                                long long n_paths, double base_point, std::uint64_t seed,
                                int threads = 1, int n_batches = 32) {
    detail::check_estimation_args(lag_grid, n_paths);
    if (base_point < 0.0) throw parameter_error("base point must be >= 0");
    if (lag_grid.front() < 0.0) throw parameter_error("lags must be >= 0");
    const int batches = static_cast<int>(std::min<long long>(n_batches, n_paths / 2));
    const StationarySampler sampler(spec);
    const double t_max = base_point + lag_grid.back() + 1e-9;
    const std::size_t L = lag_grid.size();

    struct BatchAcc {
        double count = 0.0, sx = 0.0;
        std::vector<double> sy, sxy;
    };
    std::vector<BatchAcc> acc(static_cast<std::size_t>(batches));
    for (auto& a : acc) {
        a.sy.assign(L, 0.0);
        a.sxy.assign(L, 0.0);
    }
    // batch ranges are contiguous in the path index, so with one worker per
    // batch no two workers share an accumulator
    const int workers = std::max(1, std::min(threads, batches));
    detail::run_partitioned(batches, workers, [&](int, long long blo, long long bhi) {
        for (long long b = blo; b < bhi; ++b) {
            auto& a = acc[static_cast<std::size_t>(b)];
            const long long lo = b * n_paths / batches;
            const long long hi = (b + 1) * n_paths / batches;
            for (long long i = lo; i < hi; ++i) {
                Rng rng = path_rng(seed, static_cast<std::uint64_t>(i));
                const Trajectory traj = sampler.trajectory(-1e-9, t_max, rng);
                const double x = static_cast<double>(value_at(traj, base_point));
                a.count += 1.0;
                a.sx += x;
                for (std::size_t l = 0; l < L; ++l) {
                    const double y = static_cast<double>(value_at(traj, base_point + lag_grid[l]));
                    a.sy[l] += y;
                    a.sxy[l] += x * y;
                }
            }
        }
    });

    EstimateTable out;
    out.grid.assign(lag_grid.begin(), lag_grid.end());
    out.mean.assign(L, 0.0);
    out.se.assign(L, 0.0);
    out.n_paths = n_paths;
    out.kind = EstimateKind::R;
    for (std::size_t l = 0; l < L; ++l) {
        double msum = 0.0, m2sum = 0.0;
        for (const auto& a : acc) {
            const double cov = a.sxy[l] / a.count - (a.sx / a.count) * (a.sy[l] / a.count);
            msum += cov;
            m2sum += cov * cov;
        }
        const double nb = static_cast<double>(batches);
        const double m = msum / nb;
        out.mean[l] = m;
        out.se[l] = std::sqrt(std::max(0.0, (m2sum / nb - m * m) / (nb - 1.0)));
    }
    return out;
}

struct PmfEstimate {
    std::vector<double> probability;
    std::vector<double> se;
    long long n_paths = 0;
};

/// Empirical pmf of the switch count N(t) given the initial sign.
inline PmfEstimate estimate_pmf_N(const ProcessSpec& spec, double t, int k_max, long long n_paths,
                                  int sign, std::uint64_t seed) {
    if (!(t > 0.0)) throw parameter_error("pmf estimation needs t > 0");
    if (k_max < 0) throw parameter_error("k_max must be >= 0");
    if (n_paths < 100) throw parameter_error("estimation needs at least 100 paths");
    std::vector<long long> counts(static_cast<std::size_t>(k_max) + 1, 0);
    for (long long i = 0; i < n_paths; ++i) {
        Rng rng = path_rng(seed, static_cast<std::uint64_t>(i));
        const Trajectory traj = simulate_nonstationary_forced(spec, sign, t, rng);
        const std::int64_t k = count_switches(traj, t);
        if (k <= k_max) ++counts[static_cast<std::size_t>(k)];
    }
    PmfEstimate out;
    out.n_paths = n_paths;
    out.probability.resize(counts.size());
    out.se.resize(counts.size());
    const double n = static_cast<double>(n_paths);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double p = static_cast<double>(counts[k]) / n;
        out.probability[k] = p;
        out.se[k] = std::sqrt(p * (1.0 - p) / n);
    }
    return out;
}

/// Local-quadratic (Savitzky-Golay style) derivative of an estimated curve.
/// Windows shift to one side at the edges. Pointwise noise is the standard
/// error propagated through the fit weights; the returned tail is 0.
inline GridFunction smooth_derivative(const EstimateTable& table, int window = 9) {
    const std::size_t n = table.grid.size();
    if (n < 64) throw resolution_error("derivative smoothing needs at least 64 grid points");
    if (window < 5) throw parameter_error("smoothing window must be at least 5");
    if (window % 2 == 0) ++window;
    if (static_cast<std::size_t>(window) > n) throw resolution_error("smoothing window exceeds the grid");

    GridFunction out;
    out.grid = table.grid;
    out.values.assign(n, 0.0);
    out.tail = 0.0;
    const bool have_se = !table.se.empty();
    if (have_se) out.noise.assign(n, 0.0);

    const std::size_t w = static_cast<std::size_t>(window);
    const std::size_t half = w / 2;
    std::vector<double> weights(w);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t lo = c <= half ? 0 : c - half;
        if (lo + w > n) lo = n - w;
        // quadratic least squares on (dx, y); the derivative at dx=0 is the
        // linear coefficient, a known linear functional of the y values
        double m0 = 0, m1 = 0, m2 = 0, m3 = 0, m4 = 0;
        for (std::size_t j = 0; j < w; ++j) {
            const double dx = table.grid[lo + j] - table.grid[c];
            m0 += 1.0;
            m1 += dx;
            m2 += dx * dx;
            m3 += dx * dx * dx;
            m4 += dx * dx * dx * dx;
        }
        // row of (X^T X)^{-1} selecting the linear coefficient
        const double a11 = m0, a12 = m1, a13 = m2, a22 = m2, a23 = m3, a33 = m4;
        const double det = a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
                           a13 * (a12 * a23 - a22 * a13);
        if (det == 0.0) throw resolution_error("degenerate smoothing window");
        const double r1 = -(a12 * a33 - a23 * a13) / det;
        const double r2 = (a11 * a33 - a13 * a13) / det;
        const double r3 = -(a11 * a23 - a12 * a13) / det;
        double deriv = 0.0, var = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
            const double dx = table.grid[lo + j] - table.grid[c];
            weights[j] = r1 + r2 * dx + r3 * dx * dx;
            deriv += weights[j] * table.mean[lo + j];
            if (have_se) var += weights[j] * weights[j] * table.se[lo + j] * table.se[lo + j];
        }
        out.values[c] = deriv;
        if (have_se) out.noise[c] = std::sqrt(var);
    }
    return out;
}

}  // namespace switchkit
