#pragma once

// Error types thrown by the library.  Each one corresponds to a distinct
// failure mode a caller may want to handle separately; all derive from
// qbd::Error so catch-all handling stays easy.

#include <stdexcept>
#include <string>

namespace qbd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Quadratic form is not normalizable (Re Q not positive definite).
struct NonNormalizableError : Error {
    using Error::Error;
};

/// Determinant (or another pivotal quantity) vanished to working precision.
struct SingularFormError : Error {
    using Error::Error;
};

/// ODE integration failed to reach the requested tolerance.
struct IntegrationFailureError : Error {
    using Error::Error;
};

/// Bath has gamma = 0 or D = 0 where a finite decoherence time is required.
struct DegenerateBathError : Error {
    using Error::Error;
};

/// Not enough usable data points in a fitting window.
struct InsufficientRangeError : Error {
    using Error::Error;
};

/// A fit converged but its residuals exceed the acceptance threshold.
struct BadFitError : Error {
    using Error::Error;
};

/// Grid step produced an unphysical norm jump.
struct UnstableStepError : Error {
    using Error::Error;
};

/// Significant probability mass reached the grid boundary.
struct BoundaryLeakError : Error {
    using Error::Error;
};

/// Configuration or input validation failure (CLI layer).
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace qbd
