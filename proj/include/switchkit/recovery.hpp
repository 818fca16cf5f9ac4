#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "switchkit/characteristics.hpp"
#include "switchkit/errors.hpp"
#include "switchkit/grid.hpp"
#include "switchkit/laplace.hpp"
#include "switchkit/switching_law.hpp"
#include "switchkit/transform.hpp"

namespace switchkit {

/// Switching-time transforms from the expected-value transforms:
///   Psi+(s) = (s L(E+)(s) - 1)/(s L(E-)(s) - 1),
///   Psi-(s) = (s L(E-)(s) + 1)/(s L(E+)(s) + 1).
/// The returned validity range [s_min, s_max] marks where the denominators
/// are well conditioned; evaluation outside is allowed but the denominator
/// guard may fire. Needs no monotonicity.
inline std::pair<TransformFn, TransformFn> invert_expected_values(const TransformFn& LE_plus,
                                                                  const TransformFn& LE_minus,
                                                                  double s_min = 1e-3,
                                                                  double s_max = 1e3) {
    const auto guard = [](auto den) {
        if constexpr (!detail::is_complex_scalar<decltype(den)>) {
            if (std::abs(static_cast<double>(den)) < 1e-12)
                throw singularity_error("expected-value inversion denominator below 1e-12");
        }
        return den;
    };
    const double lo = std::max({s_min, LE_plus.s_min, LE_minus.s_min});
    const double hi = std::min({s_max, LE_plus.s_max, LE_minus.s_max});
    TransformFn psi_plus = make_transform_from(
        [LE_plus, LE_minus, guard](auto s) {
            using S = decltype(s);
            return (s * LE_plus.call(s) - S(1)) / guard(s * LE_minus.call(s) - S(1));
        },
        {&LE_plus, &LE_minus}, lo, hi);
    TransformFn psi_minus = make_transform_from(
        [LE_plus, LE_minus, guard](auto s) {
            using S = decltype(s);
            return (s * LE_minus.call(s) + S(1)) / guard(s * LE_plus.call(s) + S(1));
        },
        {&LE_plus, &LE_minus}, lo, hi);
    return {std::move(psi_plus), std::move(psi_minus)};
}

namespace detail {

// mean of the last 10% of a curve, with a crude noise scale for the estimate
struct TailEstimate {
    double value = 0.0;
    double noise = 0.0;
};

inline TailEstimate tail_of(const GridFunction& g) {
    const std::size_t n = g.grid.size();
    const std::size_t k = std::max<std::size_t>(2, n / 10);
    TailEstimate out;
    double acc = 0.0, nacc = 0.0;
    for (std::size_t i = n - k; i < n; ++i) {
        acc += g.values[i];
        if (!g.noise.empty()) nacc += g.noise[i];
    }
    out.value = acc / static_cast<double>(k);
    out.noise = g.noise.empty() ? 0.0 : nacc / static_cast<double>(k);
    return out;
}

}  // namespace detail

enum class PairVerdict { valid_consistent, invalid, inconclusive };

inline const char* to_string(PairVerdict v) {
    switch (v) {
        case PairVerdict::valid_consistent: return "valid-consistent";
        case PairVerdict::invalid: return "invalid";
        default: return "inconclusive";
    }
}

struct ValidateOptions {
    double tail_eps = 1e-4;       // numeric_forward tail criterion
    double limit_tol = 0.05;      // allowance on E+(0+) = 1, E-(0+) = -1
    double s_lo = 1e-2, s_hi = 1e2;
    int s_points = 25;
    int max_order = 6;
};

/// Report of the candidate-pair checks: the boundary limits, the complete
/// monotonicity of the two validity ratios L(E'_+)/(L(E'_-) - 2) and
/// L(E'_-)/(L(E'_+) + 2) (these equal the candidate Psi+-), and the same
/// probe for the monotone-recovery candidates -L(E'_+)/(2 alpha),
/// L(E'_-)/(2 beta). The verdicts for finite noisy curves are three-valued by
/// construction; the probe never upgrades noise to "violated".
struct PairValidation {
    bool limits_ok = false;
    std::string limit_reason;
    double gamma = 0.0;
    CmReport cm_pair_plus, cm_pair_minus;  // Psi+- candidates
    CmReport cm_divisor_x, cm_divisor_y;   // monotone-recovery candidates
    PairVerdict verdict = PairVerdict::inconclusive;
    CmVerdict monotone = CmVerdict::inconclusive;
};

inline PairValidation validate_pair(const GridFunction& E_plus, const GridFunction& E_minus,
                                    ValidateOptions opt = {}) {
    E_plus.validate();
    E_minus.validate();
    PairValidation rep;

    const auto tp = detail::tail_of(E_plus);
    const auto tm = detail::tail_of(E_minus);
    const double tail_tol = 2.0 * opt.tail_eps + 3.0 * (tp.noise + tm.noise);
    rep.gamma = 0.5 * (tp.value + tm.value);
    if (std::abs(E_plus.values.front() - 1.0) > opt.limit_tol) {
        rep.limit_reason = "E_plus(0+) = " + std::to_string(E_plus.values.front()) + " is not 1";
    } else if (std::abs(E_minus.values.front() + 1.0) > opt.limit_tol) {
        rep.limit_reason = "E_minus(0+) = " + std::to_string(E_minus.values.front()) + " is not -1";
    } else if (std::abs(tp.value - tm.value) > tail_tol) {
        rep.limit_reason = "tail limits disagree: " + std::to_string(tp.value) + " vs " +
                           std::to_string(tm.value);
    } else if (!(std::abs(rep.gamma) < 1.0)) {
        rep.limit_reason = "common tail lies outside (-1,1)";
    } else {
        rep.limits_ok = true;
    }
    if (!rep.limits_ok) {
        rep.verdict = PairVerdict::invalid;
        return rep;
    }

    GridFunction ep = E_plus;
    ep.tail = tp.value;
    GridFunction em = E_minus;
    em.tail = tm.value;
    TransformFn led_p, led_m;
    try {
        led_p = derivative_transform(numeric_forward(ep, opt.tail_eps), 1.0);
        led_m = derivative_transform(numeric_forward(em, opt.tail_eps), -1.0);
    } catch (const tail_error& e) {
        rep.limits_ok = false;
        rep.limit_reason = e.what();
        rep.verdict = PairVerdict::invalid;
        return rep;
    }

    const double ratio_s_min = std::max(led_p.s_min, led_m.s_min);
    const double ratio_s_max = std::min(led_p.s_max, led_m.s_max);
    const TransformFn ratio_plus = make_transform_from(
        [led_p, led_m](auto s) { return led_p.call(s) / (led_m.call(s) - decltype(s)(2)); },
        {&led_p, &led_m}, ratio_s_min, ratio_s_max);
    const TransformFn ratio_minus = make_transform_from(
        [led_p, led_m](auto s) { return led_m.call(s) / (led_p.call(s) + decltype(s)(2)); },
        {&led_p, &led_m}, ratio_s_min, ratio_s_max);
    const double alpha = 0.5 * (1.0 - rep.gamma);
    const double beta = 1.0 - alpha;
    const TransformFn cand_x = make_transform_from(
        [led_p, alpha](auto s) { return decltype(s)(-0.5 / alpha) * led_p.call(s); }, {&led_p},
        led_p.s_min, led_p.s_max);
    const TransformFn cand_y = make_transform_from(
        [led_m, beta](auto s) { return decltype(s)(0.5 / beta) * led_m.call(s); }, {&led_m},
        led_m.s_min, led_m.s_max);

    // the probe grid (stencil included) must stay inside the range where the
    // grid-based transforms are accurate, else quadrature bias at large s h
    // masquerades as derivative-sign violations
    const double stencil_span = std::pow(1.35, 0.5 * opt.max_order);
    const double grid_hi =
        std::min(opt.s_hi, 0.9 * std::min(ratio_plus.s_max, ratio_minus.s_max) / stencil_span);
    if (!(grid_hi > opt.s_lo * stencil_span))
        throw resolution_error("expected-value grids too coarse for the monotonicity probe");
    const auto grid = log_spaced(opt.s_lo, grid_hi, opt.s_points);

    // Monte Carlo noise on the curves propagates into the transforms; feed the
    // probe a per-s sigma so that noise downgrades verdicts to inconclusive
    // instead of producing spurious violations
    const auto noise_p = forward_noise(ep);
    const auto noise_m = forward_noise(em);
    std::function<double(double)> sig_ratio_plus, sig_ratio_minus, sig_x, sig_y;
    if (noise_p && noise_m) {
        const double alpha_c = alpha, beta_c = beta;
        sig_ratio_plus = [led_p, led_m, noise_p, noise_m](double s) {
            const double den = led_m.eval(s) - 2.0;
            const double num = led_p.eval(s);
            const double sn = s * noise_p(s), sd = s * noise_m(s);
            return std::sqrt(sn * sn + (num / den) * (num / den) * sd * sd) / std::abs(den);
        };
        sig_ratio_minus = [led_p, led_m, noise_p, noise_m](double s) {
            const double den = led_p.eval(s) + 2.0;
            const double num = led_m.eval(s);
            const double sn = s * noise_m(s), sd = s * noise_p(s);
            return std::sqrt(sn * sn + (num / den) * (num / den) * sd * sd) / std::abs(den);
        };
        sig_x = [noise_p, alpha_c](double s) { return 0.5 / alpha_c * s * noise_p(s); };
        sig_y = [noise_m, beta_c](double s) { return 0.5 / beta_c * s * noise_m(s); };
    }
    rep.cm_pair_plus = complete_monotonicity_probe(ratio_plus, grid, opt.max_order, 1.35, sig_ratio_plus);
    rep.cm_pair_minus = complete_monotonicity_probe(ratio_minus, grid, opt.max_order, 1.35, sig_ratio_minus);
    rep.cm_divisor_x = complete_monotonicity_probe(cand_x, grid, opt.max_order, 1.35, sig_x);
    rep.cm_divisor_y = complete_monotonicity_probe(cand_y, grid, opt.max_order, 1.35, sig_y);

    if (rep.cm_pair_plus.verdict == CmVerdict::violated ||
        rep.cm_pair_minus.verdict == CmVerdict::violated)
        rep.verdict = PairVerdict::invalid;
    else if (rep.cm_pair_plus.verdict == CmVerdict::consistent &&
             rep.cm_pair_minus.verdict == CmVerdict::consistent)
        rep.verdict = PairVerdict::valid_consistent;
    else
        rep.verdict = PairVerdict::inconclusive;

    if (rep.cm_divisor_x.verdict == CmVerdict::violated ||
        rep.cm_divisor_y.verdict == CmVerdict::violated)
        rep.monotone = CmVerdict::violated;
    else if (rep.cm_divisor_x.verdict == CmVerdict::consistent &&
             rep.cm_divisor_y.verdict == CmVerdict::consistent)
        rep.monotone = CmVerdict::consistent;
    else
        rep.monotone = CmVerdict::inconclusive;
    return rep;
}

/// Everything recovered from one (E+, E-) pair with monotone curves.
struct RecoveredPair {
    TransformFn psi_plus, psi_minus;  // recovered switching-time transforms
    TransformFn psi_x, psi_y;         // divisor transforms L(f_X), L(f_Y)
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double alpha_from_integral = 0.0;  // -(1/2) int dE_plus, consistency diagnostic
    GridFunction f_x, f_y;             // normalized divisor densities
    double mass_x = 1.0, mass_y = 1.0; // pre-normalization masses (the recorded renorm factors)
};

struct ExtractOptions {
    double eps_noise = 1e-9;     // monotonicity allowance when the grids carry no noise field
    double alpha_tol = 0.02;     // |alpha_tail - alpha_integral| consistency bound
    double tail_eps = 1e-4;
    double s_min = 1e-3, s_max = 1e3;
};

/// Divisor extraction: gamma from the common tail, alpha = (1-gamma)/2,
/// f_X = -E'_+/(2 alpha), f_Y = E'_-/(2 beta), each renormalized to unit mass
/// with the factor recorded. Derivative grids must be monotone within the
/// noise allowance (3x the propagated pointwise noise when present).
inline RecoveredPair extract_divisors(const GridFunction& E_plus, const GridFunction& E_minus,
                                      const GridFunction& dE_plus, const GridFunction& dE_minus,
                                      ExtractOptions opt = {}) {
    E_plus.validate();
    E_minus.validate();
    dE_plus.validate();
    dE_minus.validate();

    const auto tp = detail::tail_of(E_plus);
    const auto tm = detail::tail_of(E_minus);
    const double tail_tol = 2.0 * opt.tail_eps + 3.0 * (tp.noise + tm.noise);
    if (std::abs(tp.value - tm.value) > tail_tol)
        throw validation_error("expected-value tails disagree: " + std::to_string(tp.value) + " vs " +
                               std::to_string(tm.value));

    RecoveredPair out;
    out.gamma = 0.5 * (tp.value + tm.value);
    if (!(std::abs(out.gamma) < 1.0)) throw validation_error("common tail must lie in (-1,1)");
    out.alpha = 0.5 * (1.0 - out.gamma);
    out.beta = 1.0 - out.alpha;

    const auto check_monotone = [&](const GridFunction& d, bool decreasing, const char* name) {
        for (std::size_t i = 0; i < d.values.size(); ++i) {
            const double eps = d.noise.empty() ? opt.eps_noise : 3.0 * d.noise[i];
            const double v = decreasing ? d.values[i] : -d.values[i];
            if (v > eps)
                throw monotonicity_error(std::string(name) +
                                         " violates monotonicity beyond the noise allowance at t = " +
                                         std::to_string(d.grid[i]) +
                                         "; run validate_pair for diagnostics");
        }
    };
    check_monotone(dE_plus, true, "dE_plus");
    check_monotone(dE_minus, false, "dE_minus");

    out.alpha_from_integral = -0.5 * trapezoid(dE_plus.grid, dE_plus.values);
    if (std::abs(out.alpha_from_integral - out.alpha) > opt.alpha_tol)
        throw validation_error("alpha from the tail (" + std::to_string(out.alpha) +
                               ") and from the integral of dE_plus (" +
                               std::to_string(out.alpha_from_integral) + ") disagree");

    const auto build_density = [](const GridFunction& d, double scale, double& mass_out) {
        GridFunction f;
        f.grid = d.grid;
        f.values.resize(d.values.size());
        for (std::size_t i = 0; i < d.values.size(); ++i) f.values[i] = scale * d.values[i];
        mass_out = trapezoid(f.grid, f.values);
        if (!(mass_out > 0.0)) throw density_error("extracted divisor density has non-positive mass");
        for (auto& v : f.values) v = std::max(0.0, v) / mass_out;
        // renormalize once more after clamping so the stored grid is a density
        const double m2 = trapezoid(f.grid, f.values);
        for (auto& v : f.values) v /= m2;
        f.tail = 0.0;
        if (!d.noise.empty()) {
            f.noise.resize(d.noise.size());
            for (std::size_t i = 0; i < d.noise.size(); ++i)
                f.noise[i] = std::abs(scale) * d.noise[i] / mass_out;
        }
        return f;
    };
    out.f_x = build_density(dE_plus, -0.5 / out.alpha, out.mass_x);
    out.f_y = build_density(dE_minus, 0.5 / out.beta, out.mass_y);

    GridFunction ep = E_plus;
    ep.tail = out.gamma;
    GridFunction em = E_minus;
    em.tail = out.gamma;
    const TransformFn le_p = numeric_forward(ep, opt.tail_eps);
    const TransformFn le_m = numeric_forward(em, opt.tail_eps);
    auto [psi_p, psi_m] = invert_expected_values(le_p, le_m, opt.s_min, opt.s_max);
    out.psi_plus = std::move(psi_p);
    out.psi_minus = std::move(psi_m);
    // the density tail is Monte Carlo noise (amplified at the one-sided
    // smoothing window), so the truncation criterion must track it
    const auto density_tail_eps = [](const GridFunction& f) {
        return std::max(1e-2, f.noise.empty() ? 0.0 : 5.0 * f.noise.back());
    };
    out.psi_x = numeric_forward(out.f_x, density_tail_eps(out.f_x));
    out.psi_y = numeric_forward(out.f_y, density_tail_eps(out.f_y));
    return out;
}

/// Rebuilds samplable switching laws from a recovered pair:
///   T+ = first-attempt law (X, Y, alpha), T- = mirrored (Y, X, beta).
inline std::pair<SwitchingLaw, SwitchingLaw> rebuild_switching_laws(const RecoveredPair& pair) {
    if (!(pair.alpha > 0.0) || !(pair.alpha < 1.0))
        throw parameter_error("recovered alpha must lie strictly inside (0,1)");
    SwitchingLaw law_x = law_from_grid_density(pair.f_x);
    SwitchingLaw law_y = law_from_grid_density(pair.f_y);
    SwitchingLaw plus = make_first_attempt({law_x, law_y, pair.alpha});
    SwitchingLaw minus = make_first_attempt({std::move(law_y), std::move(law_x), pair.beta});
    return {std::move(plus), std::move(minus)};
}

struct CycleCheck {
    double max_rel_error = 0.0;
    double worst_s = 0.0;
};

namespace detail {

template <class PsiX, class PsiY, class PsiProd>
CycleCheck cycle_check_impl(PsiX psi_x, PsiY psi_y, PsiProd truth, double alpha,
                            std::span<const double> s_grid) {
    const double beta = 1.0 - alpha;
    CycleCheck out;
    for (double s : s_grid) {
        const double gx = beta * psi_x(s) / (1.0 - (1.0 - beta) * psi_x(s));
        const double gy = alpha * psi_y(s) / (1.0 - (1.0 - alpha) * psi_y(s));
        const double lhs = truth(s);
        const double rel = std::abs(lhs - gx * gy) / std::max(std::abs(lhs), 1e-300);
        if (rel > out.max_rel_error) {
            out.max_rel_error = rel;
            out.worst_s = s;
        }
    }
    return out;
}

}  // namespace detail

/// Cycle-length identity: Psi+ Psi- against the product of the two
/// geometric-compound transforms built from the recovered divisors,
///   (beta Psi_X / (1 - (1-beta) Psi_X)) (alpha Psi_Y / (1 - (1-alpha) Psi_Y)).
inline CycleCheck cycle_representation_check(const RecoveredPair& pair, const ProcessSpec& spec,
                                             std::span<const double> s_grid) {
    return detail::cycle_check_impl([&](double s) { return pair.psi_x(s); },
                                    [&](double s) { return pair.psi_y(s); },
                                    [&](double s) { return spec.plus.laplace(s) * spec.minus.laplace(s); },
                                    pair.alpha, s_grid);
}

/// Same identity with the divisor transforms derived analytically from the
/// spec's own characteristics (no grids involved); this is the machine-
/// precision form of the check.
inline CycleCheck cycle_representation_check(const ProcessSpec& spec, std::span<const double> s_grid) {
    const CharacteristicSet cs = build_characteristics(spec);
    const double alpha = cs.mu_minus / (cs.mu_plus + cs.mu_minus);
    const double beta = 1.0 - alpha;
    return detail::cycle_check_impl(
        [&](double s) { return -0.5 / alpha * cs.LEd_plus(s); },
        [&](double s) { return 0.5 / beta * cs.LEd_minus(s); },
        [&](double s) { return spec.plus.laplace(s) * spec.minus.laplace(s); }, alpha, s_grid);
}

}  // namespace switchkit
