#pragma once

// Factories for the initial states used throughout: minimal-uncertainty
// packets, displaced/kicked packets, general mixed Gaussians parametrized by
// the (a, c) form, symmetric two-packet superpositions (cats), and thermal
// oscillator states via the Mehler kernel.  All factories return unit-trace
// states.

#include "qbd/gaussian.hpp"

namespace qbd {

/// Pure packet psi(x) ~ exp(-(x - x0)^2 / (2 sigma^2) + i p0 x / hbar).
GaussianMixtureState make_gaussian_packet(double sigma, double x0 = 0.0,
                                          double p0 = 0.0, double hbar = 1.0);

/// Mixed Gaussian rho(x,y) ~ exp(-a (x^2 + y^2)/2 + c x y), a > |c| >= 0,
/// optionally displaced to x0.  Pure iff c == 0; purity sqrt((a-c)/(a+c)).
GaussianMixtureState make_gaussian_ac(double a, double c, double x0 = 0.0);

/// Even superposition of two sigma-packets at +/- separation/2 (four
/// kernels, exact normalization including the overlap term).
GaussianMixtureState make_cat(double sigma, double separation);

/// Harmonic-oscillator thermal state from the Mehler kernel with ground
/// width xi0 = sqrt(hbar / m omega) and Boltzmann weight u = exp(-hbar
/// omega / kT), 0 <= u < 1.  u = 0 gives the ground state.
GaussianMixtureState make_thermal_oscillator(double xi0, double u);

/// (a, c) of a single-kernel state with quadForm [[a, -c], [-c, a]];
/// throws ValidationError for states that are not of that shape.
struct AcForm {
    double a;
    double c;
};
AcForm ac_form(const GaussianMixtureState& s);

}  // namespace qbd
