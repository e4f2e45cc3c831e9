#pragma once

// Recovery of bath parameters from a survival curve.
//
// The intermediate window falls off as S ~ sqrt(3) m / (hbar D t^2) and the
// late window as S ~ P(gamma) / sqrt(gamma t), so the two log-log plateau
// intercepts determine D and gamma (and through them kT).  Plateaus are
// located with moving-window local slopes and then shrunk to the tightest
// slope tolerance available, which pushes the late fit towards the deepest
// part of the curve where the asymptote has converged.

#include <cstddef>

#include "qbd/fitting.hpp"
#include "qbd/survival.hpp"

namespace qbd {

struct FitWindowReport {
    double tLo = 0.0;
    double tHi = 0.0;
    std::size_t points = 0;
    double freeSlope = 0.0;   // unconstrained straight-line slope
    double intercept = 0.0;   // fixed-slope intercept (log S at log t = 0)
    double rms = 0.0;         // residual about the fixed-slope line
};

struct RegimeEstimate {
    double dHat = 0.0;
    double gammaHat = 0.0;
    double temperatureHat = 0.0;  // k_B T
    double tauRelaxationHat = 0.0;
    double tauThermalHat = 0.0;
    FitWindowReport mid;   // slope -2 window
    FitWindowReport late;  // slope -1/2 window
};

/// Estimate (D, gamma, kT) from a free-expansion survival curve of a state
/// with known a + c (the canonical pure packet has a + c = 1 / sigma^2) and
/// known purity prefactor sqrt((a+c)/(a-c)) (1 for a pure packet).
///
/// Throws InsufficientRangeError when either plateau is missing and
/// BadFitError when the fixed-slope residuals exceed ~10%.
RegimeEstimate estimate_bath_parameters(const SurvivalCurve& curve,
                                        double hbar, double mass,
                                        double aPlusC = 1.0,
                                        double purityFactor = 1.0);

}  // namespace qbd
