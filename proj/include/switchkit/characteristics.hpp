#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "switchkit/errors.hpp"
#include "switchkit/laplace.hpp"
#include "switchkit/process.hpp"
#include "switchkit/transform.hpp"

namespace switchkit {

/// All Laplace-domain characteristics of one process spec. Every transform is
/// a lazy closure over (Psi+, Psi-, mu+, mu-); nothing is tabulated.
///   LP+-   : L(P_sign),  P_sign(t) = P(D(t)=1 | sign)
///   LE+-   : L(E_sign),  E_sign(t) = E[D(t) | sign]
///   LEd+-  : L(E'_sign)
///   LPt+-  : L(P~_sign) for the stationary version
///   LR     : L(R), R the stationary autocovariance
struct CharacteristicSet {
    TransformFn LP_plus, LP_minus;
    TransformFn LE_plus, LE_minus;
    TransformFn LEd_plus, LEd_minus;
    TransformFn LPt_plus, LPt_minus;
    TransformFn LR;
    double gamma = 0.0;  // (mu+ - mu-)/(mu+ + mu-), the common limit of E+-
    double mu_plus = 0.0;
    double mu_minus = 0.0;
};

namespace detail {

inline constexpr double kSeriesCutoff = 1e-6;

template <class S>
bool small_real(S s) {
    if constexpr (is_complex_scalar<S>)
        return false;
    else
        return s < S(kSeriesCutoff);
}

// (1 - psi_a)/(1 - psi_p psi_m) with the first-order limit mu_a/(mu_p + mu_m)
// below the cutoff, where numerator and denominator both vanish like s.
template <class S>
S one_minus_ratio(const TransformFn& psi_a, const TransformFn& psi_p, const TransformFn& psi_m,
                  double mu_a, double mu_sum, S s) {
    if (small_real(s)) return S(mu_a / mu_sum);
    const S den = S(1) - psi_p.call(s) * psi_m.call(s);
    if constexpr (!is_complex_scalar<S>) {
        if (den == S(0)) throw precision_error("1 - Psi+ Psi- underflows at this s; use a larger s");
    }
    return (S(1) - psi_a.call(s)) / den;
}

}  // namespace detail

/// Assembles the full characteristic set of a spec:
///   L(P_+) = (1 - Psi+)/(s (1 - Psi+ Psi-)),        L(P_-) = Psi- L(P_+)
///   L(E_sign) = (2 L(P_sign) - 1/s)
///   L(E'_+) = -2 Psi+ (1 - Psi-)/(1 - Psi+ Psi-),   L(E'_-) = 2 Psi- (1 - Psi+)/(1 - Psi+ Psi-)
///   L(P~_+) = (1 - Q/(mu+ s))/s,                    L(P~_-) = Q/(mu- s^2)
///   L(R) = 4/(s (mu+ + mu-)) (mu+ mu-/(mu+ + mu-) - Q/s)
/// with Q = (1 - Psi+)(1 - Psi-)/(1 - Psi+ Psi-). Ratios that degenerate to
/// 0/0 as s -> 0 switch to their first-order expansions below s = 1e-6.
inline CharacteristicSet build_characteristics(const ProcessSpec& spec) {
    const TransformFn pp = spec.plus.laplace;
    const TransformFn pm = spec.minus.laplace;
    const double mu_p = spec.plus.mean;
    const double mu_m = spec.minus.mean;
    const double mu_sum = mu_p + mu_m;

    CharacteristicSet cs;
    cs.mu_plus = mu_p;
    cs.mu_minus = mu_m;
    cs.gamma = (mu_p - mu_m) / mu_sum;
    const double gamma = cs.gamma;

    cs.LP_plus = make_transform_from(
        [pp, pm, mu_p, mu_sum](auto s) {
            return detail::one_minus_ratio(pp, pp, pm, mu_p, mu_sum, s) / s;
        },
        {&pp, &pm});
    cs.LP_minus = make_transform_from(
        [pp, pm, mu_p, mu_sum](auto s) {
            return pm.call(s) * detail::one_minus_ratio(pp, pp, pm, mu_p, mu_sum, s) / s;
        },
        {&pp, &pm});
    cs.LE_plus = make_transform_from(
        [pp, pm, mu_p, mu_m, mu_sum, gamma](auto s) {
            using S = decltype(s);
            if (detail::small_real(s)) return S(gamma) / s + S(mu_p * mu_m / mu_sum);
            return (S(2) * detail::one_minus_ratio(pp, pp, pm, mu_p, mu_sum, s) - S(1)) / s;
        },
        {&pp, &pm});
    cs.LE_minus = make_transform_from(
        [pp, pm, mu_p, mu_m, mu_sum, gamma](auto s) {
            using S = decltype(s);
            if (detail::small_real(s)) return S(gamma) / s - S(mu_p * mu_m / mu_sum);
            return (S(2) * pm.call(s) * detail::one_minus_ratio(pp, pp, pm, mu_p, mu_sum, s) - S(1)) / s;
        },
        {&pp, &pm});
    cs.LEd_plus = make_transform_from(
        [pp, pm, mu_m, mu_sum](auto s) {
            using S = decltype(s);
            return S(-2) * pp.call(s) * detail::one_minus_ratio(pm, pp, pm, mu_m, mu_sum, s);
        },
        {&pp, &pm});
    cs.LEd_minus = make_transform_from(
        [pp, pm, mu_p, mu_sum](auto s) {
            using S = decltype(s);
            return S(2) * pm.call(s) * detail::one_minus_ratio(pp, pp, pm, mu_p, mu_sum, s);
        },
        {&pp, &pm});

    // Q(s)/s, shared by the stationary characteristics
    const auto q_over_s = [pp, pm, mu_p, mu_m, mu_sum](auto s) {
        using S = decltype(s);
        if (detail::small_real(s)) return S(mu_p * mu_m / mu_sum);
        return detail::one_minus_ratio(pp, pp, pm, mu_p, mu_sum, s) * (S(1) - pm.call(s)) / s;
    };
    cs.LPt_plus = make_transform_from(
        [q_over_s, mu_p](auto s) {
            using S = decltype(s);
            return (S(1) - q_over_s(s) / S(mu_p)) / s;
        },
        {&pp, &pm});
    cs.LPt_minus = make_transform_from(
        [q_over_s, mu_m](auto s) {
            using S = decltype(s);
            return q_over_s(s) / (S(mu_m) * s);
        },
        {&pp, &pm});
    cs.LR = make_transform_from(
        [q_over_s, mu_p, mu_m, mu_sum](auto s) {
            using S = decltype(s);
            return S(4) / (s * S(mu_sum)) * (S(mu_p * mu_m / mu_sum) - q_over_s(s));
        },
        {&pp, &pm}, detail::kSeriesCutoff);
    return cs;
}

/// Var D(t) = 1 - (E D(t))^2 for a +-1-valued process.
inline double variance_D(double mean) {
    if (!(std::abs(mean) <= 1.0)) throw parameter_error("mean of a +-1 process must lie in [-1,1]");
    return 1.0 - mean * mean;
}

struct CovarianceOptions {
    int gs_order = kGsDefaultOrder;
    bool use_talbot = false;
    int talbot_terms = 32;
    bool check_both_paths = true;
    double agreement_tol = 1e-4;
};

namespace detail {

inline double invert_by(const TransformFn& F, double t, const CovarianceOptions& opt) {
    return opt.use_talbot ? invert_talbot(F, t, opt.talbot_terms) : invert(F, t, opt.gs_order);
}

}  // namespace detail

/// R(t) by inverting L(R) directly.
inline double covariance_via_lr(const CharacteristicSet& cs, double t, CovarianceOptions opt = {}) {
    if (t == 0.0) return variance_D(cs.gamma);
    return detail::invert_by(cs.LR, t, opt);
}

/// R(t) assembled from the inverted stationary one-dimensional laws:
/// R = 2/(mu+ + mu-) (P~+ mu+ - P~- mu- + mu+ (mu- - mu+)/(mu+ + mu-)).
inline double covariance_via_pt(const CharacteristicSet& cs, double t, CovarianceOptions opt = {}) {
    if (t == 0.0) return variance_D(cs.gamma);
    const double mu_sum = cs.mu_plus + cs.mu_minus;
    const double pt_plus = detail::invert_by(cs.LPt_plus, t, opt);
    const double pt_minus = detail::invert_by(cs.LPt_minus, t, opt);
    return 2.0 / mu_sum *
           (pt_plus * cs.mu_plus - pt_minus * cs.mu_minus + cs.mu_plus * (cs.mu_minus - cs.mu_plus) / mu_sum);
}

/// Stationary autocovariance at lag t >= 0. Both computation paths are
/// evaluated and must agree; disagreement signals an inversion accuracy
/// problem and raises precision_error.
inline double covariance(const ProcessSpec& spec, double t, CovarianceOptions opt = {}) {
    if (t < 0.0) throw parameter_error("covariance lag must be >= 0");
    const CharacteristicSet cs = build_characteristics(spec);
    const double via_lr = covariance_via_lr(cs, t, opt);
    if (!opt.check_both_paths) return via_lr;
    const double via_pt = covariance_via_pt(cs, t, opt);
    const double scale = std::max({1.0, std::abs(via_lr), std::abs(via_pt)});
    if (std::abs(via_lr - via_pt) > opt.agreement_tol * scale)
        throw precision_error("covariance paths disagree: L(R) inversion gave " + std::to_string(via_lr) +
                              ", stationary-law assembly gave " + std::to_string(via_pt));
    return via_lr;
}

/// R'(0+) from the time-domain relation R' = 2(E- - E+)/(mu+ + mu-),
/// evaluated at small t with one Richardson extrapolation step.
inline double r_prime_at_zero(const CharacteristicSet& cs, double t0 = 1e-6, int gs_order = kGsDefaultOrder) {
    const double mu_sum = cs.mu_plus + cs.mu_minus;
    const auto rp = [&](double t) {
        return 2.0 * (invert(cs.LE_minus, t, gs_order) - invert(cs.LE_plus, t, gs_order)) / mu_sum;
    };
    const double r1 = rp(t0);
    const double r2 = rp(2.0 * t0);
    return 2.0 * r1 - r2;
}

/// The divisor-mixture data of a process with monotone expected-value
/// functions: stop probability alpha, divisor densities f_X, f_Y and their
/// transforms, and the two means.
struct DivisorMixture {
    double alpha = 0.0;
    std::function<double(double)> f_x, f_y;
    TransformFn psi_x, psi_y;
    double mu_plus = 0.0, mu_minus = 0.0;
};

/// R''(t) = 4/(mu+ + mu-) (alpha f_X(t) + (1-alpha) f_Y(t)).
inline double r_second_derivative_mixture(const DivisorMixture& mix, double t) {
    if (!(mix.alpha > 0.0) || mix.alpha > 1.0) throw parameter_error("mixture weight must lie in (0,1]");
    return 4.0 / (mix.mu_plus + mix.mu_minus) *
           (mix.alpha * mix.f_x(t) + (1.0 - mix.alpha) * mix.f_y(t));
}

/// Mixture data of the process whose T+ is the given first-attempt law (and
/// whose T- is the mirrored construction); exact by construction.
inline DivisorMixture mixture_from_first_attempt(const FirstAttemptSpec& plus_side) {
    DivisorMixture mix;
    mix.alpha = plus_side.stop_prob;
    mix.f_x = plus_side.first.density;
    mix.f_y = plus_side.between.density;
    mix.psi_x = plus_side.first.laplace;
    mix.psi_y = plus_side.between.laplace;
    mix.mu_plus = plus_side.first.mean + (1.0 / mix.alpha - 1.0) * plus_side.between.mean;
    const double beta = 1.0 - mix.alpha;
    mix.mu_minus = plus_side.between.mean + (1.0 / beta - 1.0) * plus_side.first.mean;
    return mix;
}

/// Derives the mixture data from an arbitrary spec via
/// Psi_X = -L(E'_+)/(2 alpha), Psi_Y = L(E'_-)/(2 beta). Rejects specs whose
/// expected-value functions are not monotone (the candidate transforms fail
/// the complete-monotonicity probe), since the representation only exists in
/// the monotone case.
inline DivisorMixture mixture_from_spec(const ProcessSpec& spec, int probe_order = 6) {
    const CharacteristicSet cs = build_characteristics(spec);
    DivisorMixture mix;
    mix.mu_plus = cs.mu_plus;
    mix.mu_minus = cs.mu_minus;
    mix.alpha = cs.mu_minus / (cs.mu_plus + cs.mu_minus);
    const double alpha = mix.alpha;
    const double beta = 1.0 - alpha;
    const TransformFn led_p = cs.LEd_plus;
    const TransformFn led_m = cs.LEd_minus;
    mix.psi_x = make_transform_from([led_p, alpha](auto s) { using S = decltype(s); return S(-0.5 / alpha) * led_p.call(s); },
                                    {&led_p});
    mix.psi_y = make_transform_from([led_m, beta](auto s) { using S = decltype(s); return S(0.5 / beta) * led_m.call(s); },
                                    {&led_m});

    const auto grid = log_spaced(1e-2, 1e2, 25);
    const CmReport rx = complete_monotonicity_probe(mix.psi_x, grid, probe_order);
    const CmReport ry = complete_monotonicity_probe(mix.psi_y, grid, probe_order);
    if (rx.verdict == CmVerdict::violated || ry.verdict == CmVerdict::violated)
        throw validation_error(
            "expected-value functions are not monotone: the divisor-mixture representation does not "
            "exist for this spec");

    const TransformFn px = mix.psi_x;
    const TransformFn py = mix.psi_y;
    mix.f_x = [px](double t) { return t <= 0.0 ? 0.0 : invert(px, t); };
    mix.f_y = [py](double t) { return t <= 0.0 ? 0.0 : invert(py, t); };
    return mix;
}

/// Pointwise check of the stationary/non-stationary transform relations:
///   L(P~'_+) = (L(P_-) - L(P_+))/mu+,
///   L(P~'_-) = (L(P_+) - L(P_-))/mu-,
///   L(R')    = 4 (L(P_-) - L(P_+))/(mu+ + mu-) = 2 (L(E_-) - L(E_+))/(mu+ + mu-),
/// with the left sides formed through the derivative rule (P~+(0)=1,
/// P~-(0)=0, R(0)=1-gamma^2).
struct RelationReport {
    double max_rel_discrepancy = 0.0;
    double pt_plus = 0.0;
    double pt_minus = 0.0;
    double r_via_p = 0.0;
    double r_via_e = 0.0;
};

inline RelationReport verify_relations(const CharacteristicSet& cs, std::span<const double> s_grid) {
    RelationReport rep;
    const double mu_sum = cs.mu_plus + cs.mu_minus;
    const double r0 = variance_D(cs.gamma);
    const auto rel = [](double lhs, double rhs) {
        const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
        return std::abs(lhs - rhs) / scale;
    };
    for (double s : s_grid) {
        const double lp_p = cs.LP_plus(s);
        const double lp_m = cs.LP_minus(s);
        rep.pt_plus = std::max(rep.pt_plus, rel(s * cs.LPt_plus(s) - 1.0, (lp_m - lp_p) / cs.mu_plus));
        rep.pt_minus = std::max(rep.pt_minus, rel(s * cs.LPt_minus(s), (lp_p - lp_m) / cs.mu_minus));
        const double lr_prime = s * cs.LR(s) - r0;
        rep.r_via_p = std::max(rep.r_via_p, rel(lr_prime, 4.0 * (lp_m - lp_p) / mu_sum));
        rep.r_via_e =
            std::max(rep.r_via_e, rel(lr_prime, 2.0 * (cs.LE_minus(s) - cs.LE_plus(s)) / mu_sum));
    }
    rep.max_rel_discrepancy = std::max({rep.pt_plus, rep.pt_minus, rep.r_via_p, rep.r_via_e});
    return rep;
}

}  // namespace switchkit
