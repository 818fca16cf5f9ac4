#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "switchkit/errors.hpp"
#include "switchkit/grid.hpp"
#include "switchkit/transform.hpp"

namespace switchkit {

/// L(F)(s) = Psi(s)/s for a CDF F with density transform Psi.
inline TransformFn laplace_of_cdf(const TransformFn& psi) {
    return make_transform_from([psi](auto s) { return psi.call(s) / s; }, {&psi},
                               psi.s_min, psi.s_max);
}

/// L(h')(s) = s L(h)(s) - h(0).
inline TransformFn derivative_transform(const TransformFn& Lh, double h0) {
    return make_transform_from([Lh, h0](auto s) { return s * Lh.call(s) - h0; }, {&Lh},
                               Lh.s_min, Lh.s_max);
}

namespace detail {

template <class S>
S forward_quadrature(const GridFunction& g, S s, std::size_t stride) {
    // trapezoid of (g - tail) e^{-st} over the grid, plus tail/s exactly
    using std::exp;
    const auto& t = g.grid;
    const auto& v = g.values;
    S acc{};
    std::size_t prev = 0;
    S fprev = (static_cast<S>(v[0]) - static_cast<S>(g.tail)) * exp(-s * static_cast<S>(t[0]));
    for (std::size_t i = stride; i < t.size(); i += stride) {
        const std::size_t j = std::min(i, t.size() - 1);
        const S fj = (static_cast<S>(v[j]) - static_cast<S>(g.tail)) * exp(-s * static_cast<S>(t[j]));
        acc += S(0.5) * static_cast<S>(t[j] - t[prev]) * (fj + fprev);
        fprev = fj;
        prev = j;
        if (j == t.size() - 1) break;
    }
    if (prev != t.size() - 1) {
        const std::size_t j = t.size() - 1;
        const S fj = (static_cast<S>(v[j]) - static_cast<S>(g.tail)) * exp(-s * static_cast<S>(t[j]));
        acc += S(0.5) * static_cast<S>(t[j] - t[prev]) * (fj + fprev);
    }
    return acc + static_cast<S>(g.tail) / s;
}

}  // namespace detail

/// Forward transform of a sampled function: s -> int_0^Tmax (g - tail) e^{-st} dt + tail/s.
/// Splitting off the tail makes the truncated integrand absolutely integrable.
/// Requires the grid to have reached its tail: |g(Tmax) - tail| < tail_eps.
/// The advisory validity bound s_max marks where the trapezoid error,
/// which grows like (s h)^2 / 12, stays below ~1e-4 relative; evaluation
/// beyond it is allowed but increasingly biased.
inline TransformFn numeric_forward(const GridFunction& g, double tail_eps = 1e-4) {
    g.validate();
    if (std::abs(g.values.back() - g.tail) >= tail_eps)
        throw tail_error("grid too short: |g(" + std::to_string(g.grid.back()) + ") - tail| = " +
                         std::to_string(std::abs(g.values.back() - g.tail)) + " >= tail_eps = " +
                         std::to_string(tail_eps));
    double h_max = 0.0;
    for (std::size_t i = 1; i < g.grid.size(); ++i) h_max = std::max(h_max, g.grid[i] - g.grid[i - 1]);
    auto shared = std::make_shared<const GridFunction>(g);
    TransformFn out =
        make_transform([shared](auto s) { return detail::forward_quadrature(*shared, s, 1); });
    out.s_max = std::sqrt(12.0 * 1e-4) / h_max;
    return out;
}

/// Richardson check for numeric_forward: |full - half-resolution| / 3 estimates
/// the quadrature error of the full-grid trapezoid at s.
inline double forward_quadrature_error(const GridFunction& g, double s) {
    const double full = detail::forward_quadrature<double>(g, s, 1);
    const double half = detail::forward_quadrature<double>(g, s, 2);
    return std::abs(full - half) / 3.0;
}

/// 1-sigma scale of numeric_forward's output induced by the grid's pointwise
/// noise (independent-point propagation through the trapezoid weights).
/// Returns an empty function when the grid carries no noise field.
inline std::function<double(double)> forward_noise(const GridFunction& g) {
    if (g.noise.empty()) return {};
    auto shared = std::make_shared<const GridFunction>(g);
    return [shared](double s) {
        const auto& t = shared->grid;
        const auto& sig = shared->noise;
        double var = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double w_lo = i > 0 ? 0.5 * (t[i] - t[i - 1]) : 0.0;
            const double w_hi = i + 1 < t.size() ? 0.5 * (t[i + 1] - t[i]) : 0.0;
            const double w = (w_lo + w_hi) * std::exp(-s * t[i]) * sig[i];
            var += w * w;
        }
        return std::sqrt(var);
    };
}

namespace detail {

// Stehfest weights, computed and cached in long double; magnitudes grow
// roughly 30x per step of 2 in the order, which is what caps usable orders.
inline const std::vector<long double>& gs_coefficients(int order) {
    static thread_local std::map<int, std::vector<long double>> cache;
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    const int half = order / 2;
    std::vector<long double> fact(static_cast<std::size_t>(2 * order + 2), 1.0L);
    for (std::size_t i = 1; i < fact.size(); ++i)
        fact[i] = fact[i - 1] * static_cast<long double>(i);

    std::vector<long double> V(static_cast<std::size_t>(order));
    for (int k = 1; k <= order; ++k) {
        long double sum = 0.0L;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            long double term =
                std::pow(static_cast<long double>(j), static_cast<long double>(half)) *
                fact[static_cast<std::size_t>(2 * j)];
            term /= fact[static_cast<std::size_t>(half - j)] * fact[static_cast<std::size_t>(j)] *
                    fact[static_cast<std::size_t>(j - 1)] * fact[static_cast<std::size_t>(k - j)] *
                    fact[static_cast<std::size_t>(2 * j - k)];
            sum += term;
        }
        V[static_cast<std::size_t>(k - 1)] = ((half + k) % 2 == 0) ? sum : -sum;
    }
    return cache.emplace(order, std::move(V)).first->second;
}

}  // namespace detail

inline constexpr int kGsDefaultOrder = 14;
inline constexpr int kGsMaxDoubleOrder = 18;  // beyond this the transform must supply eval_ext
inline constexpr int kGsMaxOrder = 26;

/// Gaver-Stehfest inversion at t. Weights and accumulation run in long
/// double; the transform itself is evaluated through its extended channel
/// when available. Orders above 18 require that channel, and orders above 26
/// would need more precision than long double provides.
inline double invert(const TransformFn& F, double t, int order = kGsDefaultOrder) {
    if (!(t > 0.0)) throw domain_error("inversion requires t > 0");
    if (order < 2 || order % 2 != 0) throw parameter_error("Gaver-Stehfest order must be even and >= 2");
    if (order > kGsMaxOrder)
        throw precision_error("Gaver-Stehfest order > 26 needs precision beyond long double");
    if (order > kGsMaxDoubleOrder && !F.has_ext())
        throw precision_error(
            "Gaver-Stehfest order > 18 requires extended precision; this transform has no "
            "extended-precision evaluator");

    const auto& V = detail::gs_coefficients(order);
    const long double ln2 = 0.69314718055994530942L;
    const long double tl = static_cast<long double>(t);
    long double acc = 0.0L;
    for (int k = 1; k <= order; ++k) {
        const long double s = static_cast<long double>(k) * ln2 / tl;
        const long double fval = F.has_ext() ? F.eval_ext(s) : static_cast<long double>(F.eval(static_cast<double>(s)));
        acc += V[static_cast<std::size_t>(k - 1)] * fval;
    }
    return static_cast<double>(acc * ln2 / tl);
}

/// Fixed-Talbot inversion (deformed contour); the fallback for originals that
/// oscillate, where Gaver-Stehfest degrades. Needs the complex channel.
inline double invert_talbot(const TransformFn& F, double t, int terms = 32) {
    if (!(t > 0.0)) throw domain_error("inversion requires t > 0");
    if (terms < 4) throw parameter_error("Talbot inversion needs at least 4 terms");
    if (!F.has_complex())
        throw precision_error("Talbot inversion requires a complex-capable transform");

    const double r = 2.0 * terms / (5.0 * t);
    double acc = 0.5 * F.eval_cplx(std::complex<double>(r, 0.0)).real() * std::exp(r * t);
    const double pi = 3.14159265358979323846;
    for (int k = 1; k < terms; ++k) {
        const double th = k * pi / terms;
        const double cot = std::cos(th) / std::sin(th);
        const std::complex<double> sk(r * th * cot, r * th);
        const double sigma = th + (th * cot - 1.0) * cot;
        acc += (std::exp(sk * t) * F.eval_cplx(sk) * std::complex<double>(1.0, sigma)).real();
    }
    return acc * r / terms;
}

enum class CmVerdict { consistent, violated, inconclusive };

struct CmViolation {
    double s;
    int order;
    double estimate;     // n! times the divided difference, signed by (-1)^n
    double noise_bound;  // combined threshold: 10x roundoff + 3x data noise
};

struct CmReport {
    CmVerdict verdict = CmVerdict::inconclusive;
    int max_order = 0;
    std::size_t points_supported = 0;
    std::size_t points_indeterminate = 0;
    std::size_t points_total = 0;
    std::vector<CmViolation> violations;
};

inline const char* to_string(CmVerdict v) {
    switch (v) {
        case CmVerdict::consistent: return "consistent";
        case CmVerdict::violated: return "violated";
        default: return "inconclusive";
    }
}

/// Samples whether (-1)^n F^(n)(s) >= 0 holds for n <= max_order across a
/// log-spaced grid. Each derivative is estimated as n! times the Newton
/// divided difference on a geometric stencil around s; divided differences of
/// a completely monotone function carry the exact derivative sign, so a
/// violation can only come from the function, from roundoff, or from sampling
/// noise baked into the transform. A violation is declared only when the
/// signed estimate exceeds 10x its propagated roundoff bound plus 3x the
/// propagated data noise (when `eval_noise`, a per-s 1-sigma scale for F, is
/// supplied); estimates inside the bound count as indeterminate. Verdict:
/// violated if any confident violation exists, consistent if none and at
/// least half of the probed points are confidently positive, inconclusive
/// otherwise. Noise therefore yields "inconclusive", never "violated".
inline CmReport complete_monotonicity_probe(const TransformFn& F, std::span<const double> s_grid,
                                            int max_order = 6, double stencil_ratio = 1.35,
                                            const std::function<double(double)>& eval_noise = {}) {
    if (max_order < 2) throw parameter_error("complete monotonicity probe needs max_order >= 2");
    if (!(stencil_ratio > 1.0)) throw parameter_error("stencil ratio must exceed 1");

    constexpr double eps = 2.220446049250313e-16;
    CmReport report;
    report.max_order = max_order;

    for (int n = 0; n <= max_order; ++n) {
        double factorial = 1.0;
        for (int i = 2; i <= n; ++i) factorial *= i;
        for (double s : s_grid) {
            if (!(s > 0.0)) throw domain_error("probe grid must be positive");
            std::vector<double> x(static_cast<std::size_t>(n + 1));
            std::vector<double> d(static_cast<std::size_t>(n + 1));
            std::vector<double> e(static_cast<std::size_t>(n + 1));
            for (int j = 0; j <= n; ++j) {
                x[static_cast<std::size_t>(j)] = s * std::pow(stencil_ratio, j - 0.5 * n);
                d[static_cast<std::size_t>(j)] = F.eval(x[static_cast<std::size_t>(j)]);
                e[static_cast<std::size_t>(j)] = eps * std::abs(d[static_cast<std::size_t>(j)]);
            }
            double data_var = 0.0;
            if (eval_noise) {
                // divided-difference weights: f[x0..xn] = sum_j f(x_j) / prod_{i!=j}(x_j - x_i)
                for (int j = 0; j <= n; ++j) {
                    double denom = 1.0;
                    for (int i = 0; i <= n; ++i)
                        if (i != j) denom *= x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(i)];
                    const double wsig = eval_noise(x[static_cast<std::size_t>(j)]) / denom;
                    data_var += wsig * wsig;
                }
            }
            for (int k = 1; k <= n; ++k) {
                for (int i = 0; i + k <= n; ++i) {
                    const double dx = x[static_cast<std::size_t>(i + k)] - x[static_cast<std::size_t>(i)];
                    const double hi = d[static_cast<std::size_t>(i + 1)];
                    const double lo = d[static_cast<std::size_t>(i)];
                    d[static_cast<std::size_t>(i)] = (hi - lo) / dx;
                    // propagated input error, plus the rounding of the
                    // cancellation-prone subtraction itself
                    e[static_cast<std::size_t>(i)] =
                        (e[static_cast<std::size_t>(i + 1)] + e[static_cast<std::size_t>(i)] +
                         eps * (std::abs(hi) + std::abs(lo))) /
                            dx +
                        eps * std::abs(d[static_cast<std::size_t>(i)]);
                }
            }
            const double signed_est = (n % 2 == 0 ? 1.0 : -1.0) * factorial * d[0];
            const double bound = 10.0 * factorial * e[0] + 3.0 * factorial * std::sqrt(data_var);
            ++report.points_total;
            if (signed_est < -bound) {
                report.violations.push_back({s, n, signed_est, bound});
            } else if (signed_est > bound) {
                ++report.points_supported;
            } else {
                ++report.points_indeterminate;
            }
        }
    }

    if (!report.violations.empty())
        report.verdict = CmVerdict::violated;
    else if (2 * report.points_supported >= report.points_total)
        report.verdict = CmVerdict::consistent;
    else
        report.verdict = CmVerdict::inconclusive;
    return report;
}

}  // namespace switchkit
