#pragma once

// Decomposition of the decay law through the projector P0 A = (tr[rho0 A] /
// tr[rho0^2]) rho0 and its complement Q0 = 1 - P0:
//
//   S(t) = S(t - t') S(t') + M(t, t'),
//
// where the memory term M measures how much of the decayed component flows
// back into the initial state between t' and t.  M vanishes at t' = 0 and
// t' = t, and for a purely exponential law it would vanish identically, so
// its size is a direct witness of non-exponential decay.
//
// Also here: a fit-based check that a survival window is subexponential,
// via the stretching exponent of -log S = c t^q + d and the monotonicity of
// the effective rate -log S / t.

#include <vector>

#include "qbd/bath.hpp"
#include "qbd/gaussian.hpp"
#include "qbd/propagator.hpp"

namespace qbd {

/// M(t, t') = S(t) - S(t - t') S(t') evaluated through the projector
/// algebra: the complement component Q0 rho(t') is propagated for the
/// remaining t - t' and projected back onto rho0.  Both routes agree
/// identically for the exact propagator; this one exercises the mixture
/// algebra (the complement is a Gaussian mixture even for one kernel).
double ersak_memory_term(const GaussianMixtureState& state,
                         const BathParams& bath, double t, double tPrime);

/// Survival component of a state relative to rho0 (tr[rho0 rho]/tr[rho0^2]).
double projection_coefficient(const GaussianMixtureState& rho0,
                              const GaussianMixtureState& rho);

/// rho - (projection coefficient) rho0, as a mixture.
GaussianMixtureState complement_component(const GaussianMixtureState& rho0,
                                          const GaussianMixtureState& rho);

struct SubexponentialReport {
    double q = 0.0;            // stretching exponent of -log S ~ c t^q + d
    double coefficient = 0.0;  // c
    double offset = 0.0;       // d
    double rms = 0.0;          // fit residual in -log S
    bool rateEventuallyDecreasing = false;  // -log S / t falls monotonically
};

/// Fits the stretched-exponential model over the given window and checks
/// whether the effective rate decreases monotonically over the last half of
/// the window (true subexponential decay; an exponential gives a constant).
SubexponentialReport subexponential_check(const std::vector<double>& t,
                                          const std::vector<double>& S);

/// Largest time in [tMin, tMax] up to which a kernel propagated from an
/// (a, c) start can be propagated a *second* time meaningfully.  The stored
/// entries of a spread kernel carry absolute rounding of order
/// eps * (entry scale), while its diagonal residue q = 2 (a - c) / b(t)^2
/// keeps shrinking; once the ratio passes ~1e-3 a second stage (as in the
/// memory-term complement path) consumes unrepresentable information.
double two_stage_support_horizon(double a, double c, const BathParams& bath,
                                 double tMin, double tMax);

}  // namespace qbd
