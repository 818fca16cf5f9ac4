#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "switchkit/errors.hpp"
#include "switchkit/rng.hpp"
#include "switchkit/switching_law.hpp"

namespace switchkit {

/// Pair of switching-time laws plus the probability that the process starts
/// in state +1.
struct ProcessSpec {
    SwitchingLaw plus;   // dwell law of state +1
    SwitchingLaw minus;  // dwell law of state -1
    double start_prob = 0.5;
};

/// A realized path, stored as switch epochs only; values follow by parity
/// from `initial_sign`, the state at time zero. Epoch generation always
/// overshoots the span on each open side so that delay queries near the edges
/// are unbiased. Conventions: the anchored switch of the non-stationary
/// process appears as an epoch at exactly 0; the stationary construction has
/// no epoch at 0.
struct Trajectory {
    int initial_sign = 1;
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<double> epochs;
};

/// Stationary delay triple: state at the origin, forward delay A to the next
/// switch, backward delay B since the previous one.
struct StationaryInit {
    int sign = 1;
    double forward_delay = 0.0;   // A
    double backward_delay = 0.0;  // B
};

namespace detail {

inline const SwitchingLaw& law_of(const ProcessSpec& spec, int sign) {
    return sign > 0 ? spec.plus : spec.minus;
}

// interlace intervals forward from `from`, states starting at `state`,
// until the epoch exceeds `limit`
inline void extend_forward(std::vector<double>& epochs, const ProcessSpec& spec, double from,
                           int state, double limit, Rng& rng) {
    double t = from;
    while (t <= limit) {
        t += law_of(spec, state).sampler(rng);
        epochs.push_back(t);
        state = -state;
    }
}

// mirror image: interlace intervals leftward from `from`
inline void extend_backward(std::vector<double>& epochs, const ProcessSpec& spec, double from,
                            int state, double limit, Rng& rng) {
    double t = from;
    while (t >= limit) {
        t -= law_of(spec, state).sampler(rng);
        epochs.push_back(t);
        state = -state;
    }
}

}  // namespace detail

inline Trajectory simulate_nonstationary_forced(const ProcessSpec& spec, int sign, double horizon,
                                                Rng& rng) {
    if (!(horizon > 0.0)) throw parameter_error("horizon must be positive");
    Trajectory traj;
    traj.initial_sign = sign;
    traj.t_start = 0.0;
    traj.t_end = horizon;
    traj.epochs.push_back(0.0);  // the switch anchored at time zero
    detail::extend_forward(traj.epochs, spec, 0.0, sign, horizon, rng);
    return traj;
}

/// Non-stationary process D(t) on [0, horizon]: starts with a switch at zero
/// into the state drawn with P(+1) = start_prob, then interlaces T+/T-.
inline Trajectory simulate_nonstationary(const ProcessSpec& spec, double horizon, Rng& rng) {
    const int sign = uniform01(rng) < spec.start_prob ? 1 : -1;
    return simulate_nonstationary_forced(spec, sign, horizon, rng);
}

inline Trajectory simulate_two_sided_forced(const ProcessSpec& spec, int sign, double t_min,
                                            double t_max, Rng& rng) {
    if (!(t_min < 0.0) || !(t_max > 0.0)) throw parameter_error("two-sided span needs t_min < 0 < t_max");
    Trajectory traj;
    traj.initial_sign = sign;
    traj.t_start = t_min;
    traj.t_end = t_max;
    // backward: the interval just left of zero carries the opposite value, so
    // its length is drawn from the law of state -sign
    std::vector<double> back;
    detail::extend_backward(back, spec, 0.0, -sign, t_min, rng);
    std::reverse(back.begin(), back.end());
    traj.epochs = std::move(back);
    traj.epochs.push_back(0.0);
    detail::extend_forward(traj.epochs, spec, 0.0, sign, t_max, rng);
    return traj;
}

/// Extension of D(t) to the whole real line (a switch still sits at zero).
inline Trajectory simulate_two_sided(const ProcessSpec& spec, double t_min, double t_max, Rng& rng) {
    const int sign = uniform01(rng) < spec.start_prob ? 1 : -1;
    return simulate_two_sided_forced(spec, sign, t_min, t_max, rng);
}

/// Stationary initial conditions: P(sign=+1) = mu+/(mu+ + mu-), and given the
/// sign, (A,B) from the size-biased split of that state's law.
class StationarySampler {
  public:
    explicit StationarySampler(ProcessSpec spec)
        : spec_(std::move(spec)), split_plus_(spec_.plus), split_minus_(spec_.minus) {}

    StationaryInit init(Rng& rng) const {
        const double p_plus = spec_.plus.mean / (spec_.plus.mean + spec_.minus.mean);
        StationaryInit out;
        out.sign = uniform01(rng) < p_plus ? 1 : -1;
        const auto [a, b] = (out.sign > 0 ? split_plus_ : split_minus_)(rng);
        out.forward_delay = a;
        out.backward_delay = b;
        return out;
    }

    Trajectory trajectory(double t_min, double t_max, Rng& rng) const {
        if (!(t_min < t_max)) throw parameter_error("stationary span needs t_min < t_max");
        const StationaryInit st = init(rng);
        Trajectory traj;
        traj.initial_sign = st.sign;
        traj.t_start = t_min;
        traj.t_end = t_max;
        std::vector<double> back;
        back.push_back(-st.backward_delay);
        if (-st.backward_delay >= t_min)
            detail::extend_backward(back, spec_, -st.backward_delay, -st.sign, t_min, rng);
        std::reverse(back.begin(), back.end());
        traj.epochs = std::move(back);
        traj.epochs.push_back(st.forward_delay);
        if (st.forward_delay <= t_max)
            detail::extend_forward(traj.epochs, spec_, st.forward_delay, -st.sign, t_max, rng);
        return traj;
    }

    const ProcessSpec& spec() const { return spec_; }

  private:
    ProcessSpec spec_;
    SizeBiasedSplitter split_plus_;
    SizeBiasedSplitter split_minus_;
};

inline StationaryInit sample_stationary_init(const ProcessSpec& spec, Rng& rng) {
    return StationarySampler(spec).init(rng);
}

/// Stationary process D~(t): value `sign` on [-B, A], with non-stationary
/// processes attached at both ends in state -sign.
inline Trajectory simulate_stationary(const ProcessSpec& spec, double t_min, double t_max, Rng& rng) {
    return StationarySampler(spec).trajectory(t_min, t_max, rng);
}

/// Signed switch count: #epochs in (0, t] for t >= 0, minus #epochs in (t, 0]
/// for t < 0 (the negative-side convention of the two-sided extension).
inline std::int64_t count_switches(const Trajectory& traj, double t) {
    if (t < traj.t_start || t > traj.t_end) throw range_error("time outside the trajectory span");
    const auto& e = traj.epochs;
    const auto at = [&](double x) {
        return static_cast<std::int64_t>(std::upper_bound(e.begin(), e.end(), x) - e.begin());
    };
    return t >= 0.0 ? at(t) - at(0.0) : -(at(0.0) - at(t));
}

/// D(t) = (-1)^{N(t) + (1-sign)/2}: the initial sign flipped once per switch.
inline int value_at(const Trajectory& traj, double t) {
    const std::int64_t n = count_switches(traj, t);
    return (n % 2 == 0) ? traj.initial_sign : -traj.initial_sign;
}

/// (B, A) = (t - S_L(t), S_R(t) - t): time since the last switch at or before
/// t, and time to the first switch strictly after t.
inline std::pair<double, double> delays_at(const Trajectory& traj, double t) {
    if (!(t > traj.t_start) || !(t < traj.t_end))
        throw boundary_error("delay query must lie strictly inside the span");
    const auto& e = traj.epochs;
    const auto it = std::upper_bound(e.begin(), e.end(), t);
    if (it == e.begin()) throw boundary_error("no switch at or before the query time");
    if (it == e.end()) throw boundary_error("no switch after the query time");
    return {t - *(it - 1), *it - t};
}

namespace detail {

// midpoint-staggered CDF increments: cell i holds F((i+1/2)h) - F((i-1/2)h),
// mass centred at i*h; second-order accurate under convolution
inline std::vector<double> cdf_increments(const SwitchingLaw& law, double h, std::size_t n) {
    std::vector<double> inc(n + 1);
    double prev = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double hi = law.cdf((static_cast<double>(i) + 0.5) * h);
        inc[i] = hi - prev;
        prev = hi;
    }
    return inc;
}

inline std::vector<double> convolve_truncated(const std::vector<double>& a,
                                              const std::vector<double>& b, std::size_t n) {
    std::vector<double> c(n + 1, 0.0);
    for (std::size_t i = 0; i <= n && i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        const std::size_t jmax = std::min(n - i, b.size() - 1);
        for (std::size_t j = 0; j <= jmax; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

// CDF at t = n*h from a mass vector: everything below plus half the boundary cell
inline double mass_cdf_at_end(const std::vector<double>& inc, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += inc[i];
    return acc + 0.5 * inc[n];
}

struct PmfConvolutions {
    std::vector<double> cycle;  // increments of F+ * F-
    std::vector<double> fdelta; // increments of the delta-state law
    std::size_t n = 0;
};

inline PmfConvolutions pmf_setup(const ProcessSpec& spec, double t, int sign, double grid_step) {
    if (!(t > 0.0)) throw parameter_error("pmf oracle needs t > 0");
    const double step = grid_step > 0.0 ? grid_step : t / 2048.0;
    const std::size_t n = std::max<std::size_t>(16, static_cast<std::size_t>(std::llround(t / step)));
    const double h = t / static_cast<double>(n);
    PmfConvolutions out;
    out.n = n;
    auto inc_p = cdf_increments(spec.plus, h, n);
    auto inc_m = cdf_increments(spec.minus, h, n);
    out.cycle = convolve_truncated(inc_p, inc_m, n);
    out.fdelta = sign > 0 ? std::move(inc_p) : std::move(inc_m);
    return out;
}

}  // namespace detail

/// Exact-law oracle for P(N(t) = k | sign), evaluated by discretized
/// Stieltjes convolution of the switching-time CDFs:
///   k = 2l:   (F+ * F-)^{l*}(t) - (F+ * F-)^{l*} * F_sign(t)
///   k = 2l+1: (F+ * F-)^{l*} * F_sign(t) - (F+ * F-)^{(l+1)*}(t)
/// `accuracy_warning` is set when k is large enough relative to the grid that
/// discretization error may dominate the tiny probability.
inline double pmf_N_oracle(const ProcessSpec& spec, double t, int k, int sign,
                           double grid_step = 0.0, bool* accuracy_warning = nullptr) {
    if (k < 0) throw parameter_error("switch count must be non-negative");
    auto conv = detail::pmf_setup(spec, t, sign, grid_step);
    if (accuracy_warning) *accuracy_warning = static_cast<std::size_t>(k) * 16 >= conv.n;

    std::vector<double> power(conv.n + 1, 0.0);
    power[0] = 1.0;  // point mass at zero: identity under convolution
    for (int l = 0; l < k / 2; ++l) power = detail::convolve_truncated(power, conv.cycle, conv.n);

    const double base = detail::mass_cdf_at_end(power, conv.n);
    const auto with_delta = detail::convolve_truncated(power, conv.fdelta, conv.n);
    const double plus_delta = detail::mass_cdf_at_end(with_delta, conv.n);
    if (k % 2 == 0) return base - plus_delta;
    const auto next = detail::convolve_truncated(power, conv.cycle, conv.n);
    return plus_delta - detail::mass_cdf_at_end(next, conv.n);
}

/// pmf for all k <= k_max at once, reusing the convolution powers.
inline std::vector<double> pmf_N_oracle_table(const ProcessSpec& spec, double t, int k_max, int sign,
                                              double grid_step = 0.0) {
    if (k_max < 0) throw parameter_error("switch count must be non-negative");
    auto conv = detail::pmf_setup(spec, t, sign, grid_step);
    std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
    std::vector<double> power(conv.n + 1, 0.0);
    power[0] = 1.0;
    for (int l = 0;; ++l) {
        const double base = detail::mass_cdf_at_end(power, conv.n);
        const auto with_delta = detail::convolve_truncated(power, conv.fdelta, conv.n);
        const double plus_delta = detail::mass_cdf_at_end(with_delta, conv.n);
        if (2 * l <= k_max) out[static_cast<std::size_t>(2 * l)] = base - plus_delta;
        power = detail::convolve_truncated(power, conv.cycle, conv.n);
        if (2 * l + 1 <= k_max)
            out[static_cast<std::size_t>(2 * l + 1)] = plus_delta - detail::mass_cdf_at_end(power, conv.n);
        if (2 * l + 1 >= k_max) break;
    }
    return out;
}

}  // namespace switchkit
