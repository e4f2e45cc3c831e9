#include "qbd/survival.hpp"

#include <cmath>

#include "qbd/errors.hpp"

namespace qbd {

double survival_probability_closed(double a, double c, const BathParams& bath,
                                   const PropagatorCoefficients& pc) {
    if (!(a > std::abs(c)))
        throw ValidationError("survival_probability_closed: need a > |c|");
    if (pc.t == 0.0) return 1.0;

    const PropagatorForms f = propagator_forms(bath, pc);
    const ComplexSym2 M0{Complex(a), Complex(-c), Complex(a)};
    const ComplexSym2 Q = f.inputForm + M0;
    const Complex detQ = Q.det();
    if (std::abs(detQ) < 1e-300)
        throw SingularFormError("survival_probability_closed: det Q underflow");
    const ComplexSym2 Mout =
        f.outputForm - congruence_transposed(f.crossForm, Q.inverse());
    const ComplexSym2 Mtot = M0 + Mout;
    const Complex detM = Mtot.det();
    if (std::abs(detM) < 1e-300)
        throw SingularFormError(
            "survival_probability_closed: det Mtot underflow");

    const Complex s = 2.0 * bath.mass * std::sqrt(a * a - c * c) /
                      (bath.hbar * pc.G2 * std::sqrt(detQ) * std::sqrt(detM));
    if (!(std::abs(s.imag()) <= 1e-9 * std::max(1.0, std::abs(s.real()))))
        throw ValidationError(
            "survival_probability_closed: imaginary residue too large");
    if (!(s.real() > 0.0))
        throw ValidationError("survival_probability_closed: S <= 0");
    return s.real();
}

double survival_probability(const GaussianMixtureState& state,
                            const BathParams& bath,
                            const PropagatorCoefficients& pc) {
    if (pc.t == 0.0) return 1.0;
    const GaussianMixtureState evolved = propagate_state(state, bath, pc);
    return hs_overlap(state, evolved) / purity(state);
}

double decoherence_time(const GaussianMixtureState& state,
                        const BathParams& bath) {
    if (!(bath.D > 0.0))
        throw DegenerateBathError("decoherence_time: D must be > 0");
    return 1.0 / (2.0 * bath.D * modified_position_variance(state));
}

double decoherence_time_ac(double a, double c, const BathParams& bath) {
    if (!(bath.D > 0.0))
        throw DegenerateBathError("decoherence_time_ac: D must be > 0");
    if (!(a > std::abs(c)))
        throw ValidationError("decoherence_time_ac: need a > |c|");
    return (a + c) / bath.D;
}

double decoherence_rate_lindblad_corrected(const GaussianMixtureState& state,
                                           const BathParams& bath) {
    if (!(bath.gamma > 0.0) || !(bath.D > 0.0))
        throw DegenerateBathError(
            "decoherence_rate_lindblad_corrected: needs gamma > 0, D > 0");
    const double lambda2 = bath.gamma / bath.D;  // thermal length squared
    const double vx = modified_position_variance(state);
    const double vp = modified_momentum_variance(state, bath.hbar);
    return 2.0 * bath.gamma * vx / lambda2 +
           bath.gamma * lambda2 * vp / (2.0 * bath.hbar * bath.hbar) +
           bath.gamma;
}

double short_time_prediction(double t, double tauD) { return 1.0 - t / tauD; }

double asymptote_intermediate(double t, const BathParams& bath) {
    return std::sqrt(3.0) * bath.mass / (bath.hbar * bath.D * t * t);
}

double asymptote_overdamped(double t, double a, double c,
                            const BathParams& bath) {
    const double g = bath.gamma;
    const double pref =
        std::sqrt((a + c) / (a - c)) *
        std::sqrt(4.0 * bath.mass * bath.mass * g * g * g * g /
                  (bath.hbar * bath.hbar * bath.D *
                   (bath.D + (a + c) * g)));
    return pref / std::sqrt(g * t);
}

Regime regime_classify(double t, double tauD, double tauR) {
    if (t < 0.1 * tauD) return Regime::ZenoLinear;
    if (t > 10.0 * tauR) return Regime::Overdamped;
    if (t > 10.0 * tauD && t < 0.1 * tauR) return Regime::Intermediate;
    return Regime::Crossover;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::ZenoLinear: return "zeno-linear";
        case Regime::Crossover: return "crossover";
        case Regime::Intermediate: return "intermediate";
        case Regime::Overdamped: return "overdamped";
    }
    return "unknown";
}

SurvivalCurve survival_sweep_closed(double a, double c, const BathParams& bath,
                                    double tMin, double tMax, int points) {
    if (!(tMin > 0.0) || !(tMax > tMin) || points < 2)
        throw ValidationError(
            "survival_sweep_closed: need 0 < tMin < tMax and points >= 2");
    SurvivalCurve curve;
    curve.t.reserve(points);
    curve.S.reserve(points);
    const double logLo = std::log(tMin), logHi = std::log(tMax);
    for (int i = 0; i < points; ++i) {
        const double t =
            std::exp(logLo + (logHi - logLo) * i / double(points - 1));
        const PropagatorCoefficients pc = free_expansion_coefficients(bath, t);
        curve.t.push_back(t);
        curve.S.push_back(survival_probability_closed(a, c, bath, pc));
    }
    return curve;
}

}  // namespace qbd
