#pragma once

// One-dimensional adaptive quadrature built on Gauss-Legendre panels.
//
// Nodes and weights are generated at runtime by Newton iteration on the
// Legendre polynomials (no hard-coded tables), cached per order.  The
// adaptive driver bisects panels until the difference between an n-point and
// a 2n-point estimate meets the requested tolerance; that difference is also
// the error estimate.

#include <functional>
#include <vector>

#include "qbd/types.hpp"

namespace qbd {

struct QuadratureRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1]; cached, thread-safe.
const QuadratureRule& gauss_legendre_rule(int n);

struct QuadratureOptions {
    double absTol = 1e-12;
    double relTol = 1e-12;
    int order = 12;     // points per panel for the low estimate
    int maxDepth = 42;  // recursion depth before giving up
};

struct QuadratureResult {
    double value = 0.0;
    double errorEstimate = 0.0;
    bool converged = true;
};

/// Adaptive integral of f over [a, b].
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opt = {});

/// Convenience wrapper returning just the value; throws
/// IntegrationFailureError when the tolerance cannot be met.
double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& opt = {});

/// Fixed-order tensor-product Gauss-Legendre integral of a complex-valued
/// function over the rectangle [ax, bx] x [ay, by].  Used by oracle-style
/// cross-checks where an implementation-independent reference is needed.
Complex integrate_2d_fixed(const std::function<Complex(double, double)>& f,
                           double ax, double bx, double ay, double by,
                           int order);

}  // namespace qbd
