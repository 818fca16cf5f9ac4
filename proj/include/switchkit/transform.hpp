#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <initializer_list>
#include <limits>
#include <type_traits>

#include "switchkit/errors.hpp"

namespace switchkit {

namespace detail {
template <class S>
inline constexpr bool is_complex_scalar = false;
template <class R>
inline constexpr bool is_complex_scalar<std::complex<R>> = true;
}  // namespace detail

/// A Laplace transform as an evaluable function of s > 0.
///
/// `eval` is the required double-precision channel. `eval_ext` (long double)
/// backs Gaver-Stehfest orders above 18, which need extended precision.
/// `eval_cplx` enables deformed-contour (Talbot) inversion. Channels beyond
/// `eval` are present only when every ingredient of the transform supports
/// them. [s_min, s_max] is the advisory well-conditioned range; evaluation
/// outside it is permitted but not guaranteed accurate.
struct TransformFn {
    std::function<double(double)> eval;
    std::function<long double(long double)> eval_ext;
    std::function<std::complex<double>(std::complex<double>)> eval_cplx;
    double s_min = 0.0;
    double s_max = std::numeric_limits<double>::infinity();

    bool has_ext() const { return static_cast<bool>(eval_ext); }
    bool has_complex() const { return static_cast<bool>(eval_cplx); }

    double operator()(double s) const {
        if (!(s > 0.0)) throw domain_error("transform evaluation requires s > 0");
        return eval(s);
    }

    // channel dispatch for generic code; the caller checks availability
    template <class S>
    S call(S s) const {
        if constexpr (std::is_same_v<S, double>) {
            return eval(s);
        } else if constexpr (std::is_same_v<S, long double>) {
            return eval_ext(s);
        } else {
            return eval_cplx(s);
        }
    }
};

/// Builds a TransformFn from one generic callable, instantiated for all
/// three scalar channels.
template <class F>
TransformFn make_transform(F f, double s_min = 0.0,
                           double s_max = std::numeric_limits<double>::infinity()) {
    TransformFn tf;
    tf.eval = [f](double s) { return f(s); };
    tf.eval_ext = [f](long double s) { return f(s); };
    tf.eval_cplx = [f](std::complex<double> s) { return f(s); };
    tf.s_min = s_min;
    tf.s_max = s_max;
    return tf;
}

/// Same, but extended/complex channels are kept only when every dependency
/// provides them. The callable must access dependencies via `.call<S>(s)`.
template <class F>
TransformFn make_transform_from(F f, std::initializer_list<const TransformFn*> deps,
                                double s_min = 0.0,
                                double s_max = std::numeric_limits<double>::infinity()) {
    bool ext = true, cplx = true;
    for (const TransformFn* d : deps) {
        ext = ext && d->has_ext();
        cplx = cplx && d->has_complex();
    }
    TransformFn tf;
    tf.eval = [f](double s) { return f(s); };
    if (ext) tf.eval_ext = [f](long double s) { return f(s); };
    if (cplx) tf.eval_cplx = [f](std::complex<double> s) { return f(s); };
    tf.s_min = s_min;
    tf.s_max = s_max;
    return tf;
}

}  // namespace switchkit
