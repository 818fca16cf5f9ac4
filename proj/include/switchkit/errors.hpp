#pragma once

#include <stdexcept>

namespace switchkit {

// Error taxonomy. The CLI maps these onto stable exit codes:
// parameter/usage -> 2, numeric/precision -> 3, validation -> 4.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad argument values (non-positive mean, p outside (0,1), odd order, ...)
struct parameter_error : error {
    using error::error;
};

// evaluation outside a function's domain (s <= 0, t <= 0, ...)
struct domain_error : error {
    using error::error;
};

// query outside a trajectory's span
struct range_error : error {
    using error::error;
};

// trajectory query lacking an epoch on one side of t
struct boundary_error : error {
    using error::error;
};

// grid does not reach its tail limit within tolerance
struct tail_error : error {
    using error::error;
};

// accuracy not achievable at the requested precision/order
struct precision_error : error {
    using error::error;
};

// transform denominator too close to zero at the requested point
struct singularity_error : error {
    using error::error;
};

// grid too coarse for the requested operation
struct resolution_error : error {
    using error::error;
};

// monotonicity precondition violated beyond the noise allowance
struct monotonicity_error : error {
    using error::error;
};

// grid density not usable as a probability density
struct density_error : error {
    using error::error;
};

// consistency condition violated (tail mismatch, alpha mismatch, ...)
struct validation_error : error {
    using error::error;
};

}  // namespace switchkit
