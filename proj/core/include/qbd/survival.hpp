#pragma once

// Survival probability S(t) = tr[rho(0) rho(t)] / tr[rho(0)^2] and the
// quantities hanging off it: decoherence times, regime boundaries, and the
// closed-form asymptotes of the free-expansion curve.
//
// For a single (a, c) Gaussian the overlap collapses to
//
//   S(t) = 2 m sqrt(a^2 - c^2) / ( hbar G2 sqrt(det Q) sqrt(det Mtot) ),
//
// with Q the input-side form of the propagator and Mtot = M0 + M'(t) the
// combined output form; the generic path simply propagates the state and
// evaluates the trace overlap.  Both are exposed and asserted equal in the
// tests.

#include <vector>

#include "qbd/bath.hpp"
#include "qbd/gaussian.hpp"
#include "qbd/propagator.hpp"

namespace qbd {

/// Closed form for a single (a, c) Gaussian.
double survival_probability_closed(double a, double c, const BathParams& bath,
                                   const PropagatorCoefficients& pc);

/// Generic path: propagate and take the normalized trace overlap.
double survival_probability(const GaussianMixtureState& state,
                            const BathParams& bath,
                            const PropagatorCoefficients& pc);

/// Decoherence time  tau_D = 1 / (2 D V~x)  with V~x the coherence-weighted
/// position spread (modified_position_variance).  Equals (a + c)/D for an
/// (a, c) Gaussian.  Throws DegenerateBathError when D == 0.
double decoherence_time(const GaussianMixtureState& state,
                        const BathParams& bath);
double decoherence_time_ac(double a, double c, const BathParams& bath);

/// Initial decay rate including the dissipative (Lindblad) corrections:
///   rate = 2 gamma V~x / lambda^2 + gamma lambda^2 V~p / (2 hbar^2) + gamma,
/// lambda the thermal length.  The first term is 1/tau_D.
double decoherence_rate_lindblad_corrected(const GaussianMixtureState& state,
                                           const BathParams& bath);

/// Linear-response law S ~ 1 - t / tau_D for t << tau_D.
double short_time_prediction(double t, double tauD);

/// Intermediate power-law window (tau_D << t << tau_R):
///   S ~ sqrt(3) m / (hbar D t^2).
double asymptote_intermediate(double t, const BathParams& bath);

/// Late diffusive window (t >> tau_R) for an (a, c) Gaussian:
///   S ~ sqrt((a+c)/(a-c)) sqrt(4 m^2 g^4 / (hbar^2 D (D + (a+c) g)))
///       / sqrt(g t),   g = gamma.
double asymptote_overdamped(double t, double a, double c,
                            const BathParams& bath);

enum class Regime {
    ZenoLinear,    // t < tau_D / 10
    Intermediate,  // 10 tau_D < t < tau_R / 10
    Overdamped,    // t > 10 tau_R
    Crossover,     // everything between the windows above
};
Regime regime_classify(double t, double tauD, double tauR);
const char* regime_name(Regime r);

struct SurvivalCurve {
    std::vector<double> t;
    std::vector<double> S;
};

/// Logarithmic sweep of the closed form for an (a, c) Gaussian.
SurvivalCurve survival_sweep_closed(double a, double c, const BathParams& bath,
                                    double tMin, double tMax, int points);

}  // namespace qbd
