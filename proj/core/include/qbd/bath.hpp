#pragma once

// Environment (bath) parameters for the high-temperature master equation
//
//   d rho/dt = (i hbar / 2m)(dxx - dyy) rho - (i m w^2 / 2 hbar)(x^2-y^2) rho
//              - gamma (x - y)(dx - dy) rho - D (x - y)^2 rho ,
//
// with D = 2 m gamma kT / hbar^2.  gamma and D are the primary fields; the
// temperature and the thermal length / time scales are derived.

#include <cmath>

#include "qbd/errors.hpp"

namespace qbd {

struct BathParams {
    double gamma = 0.0;  // momentum damping rate (1/time)
    double D = 0.0;      // decoherence coefficient (1/(length^2 time))
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const {
        if (!(gamma >= 0.0) || !(D >= 0.0))
            throw ValidationError("BathParams: gamma and D must be >= 0");
        if (!(hbar > 0.0) || !(mass > 0.0))
            throw ValidationError("BathParams: hbar and mass must be > 0");
        if (gamma > 0.0 && D == 0.0)
            throw DegenerateBathError(
                "BathParams: gamma > 0 with D == 0 has no temperature");
    }

    bool unitary() const { return gamma == 0.0 && D == 0.0; }

    /// k_B T = hbar^2 D / (2 m gamma); requires gamma > 0.
    double temperature() const {
        if (gamma <= 0.0)
            throw DegenerateBathError(
                "temperature undefined for gamma == 0");
        return hbar * hbar * D / (2.0 * mass * gamma);
    }

    /// Thermal de Broglie length lambda = hbar / sqrt(2 m kT) = sqrt(gamma/D).
    double thermalLength() const {
        if (D <= 0.0 || gamma <= 0.0)
            throw DegenerateBathError(
                "thermal length undefined without gamma > 0 and D > 0");
        return std::sqrt(gamma / D);
    }

    /// Thermal time tau_beta = hbar / kT.
    double thermalTime() const { return hbar / temperature(); }

    /// Relaxation time tau_R = 1 / gamma.
    double relaxationTime() const {
        if (gamma <= 0.0)
            throw DegenerateBathError("relaxation time undefined for gamma == 0");
        return 1.0 / gamma;
    }

    static BathParams from_temperature(double gamma, double kT,
                                       double hbar = 1.0, double mass = 1.0) {
        BathParams b;
        b.gamma = gamma;
        b.hbar = hbar;
        b.mass = mass;
        b.D = 2.0 * mass * gamma * kT / (hbar * hbar);
        b.validate();
        return b;
    }
};

}  // namespace qbd
