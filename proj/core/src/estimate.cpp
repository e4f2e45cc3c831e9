#include "qbd/estimate.hpp"

#include <cmath>

#include "qbd/errors.hpp"

namespace qbd {

namespace {

FitWindowReport window_report(const std::vector<double>& logT,
                              const std::vector<double>& logS,
                              const SurvivalCurve& curve, double slope,
                              const IndexWindow& w) {
    FitWindowReport r;
    r.tLo = curve.t[w.begin];
    r.tHi = curve.t[w.end - 1];
    r.points = w.size();
    r.freeSlope = fit_line(logT, logS, w.begin, w.end).slope;
    const InterceptFit f = fixed_slope_intercept(logT, logS, slope, w);
    r.intercept = f.intercept;
    r.rms = f.rms;
    return r;
}

}  // namespace

RegimeEstimate estimate_bath_parameters(const SurvivalCurve& curve,
                                        double hbar, double mass,
                                        double aPlusC, double purityFactor) {
    const std::size_t n = curve.t.size();
    if (n < 32 || curve.S.size() != n)
        throw InsufficientRangeError(
            "estimate_bath_parameters: need at least 32 samples");
    std::vector<double> logT(n), logS(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(curve.t[i] > 0.0) || !(curve.S[i] > 0.0))
            throw ValidationError(
                "estimate_bath_parameters: nonpositive t or S sample");
        if (i > 0 && !(curve.t[i] > curve.t[i - 1]))
            throw ValidationError(
                "estimate_bath_parameters: times must be increasing");
        logT[i] = std::log(curve.t[i]);
        logS[i] = std::log(curve.S[i]);
    }

    const std::vector<double> slopes = local_slopes(logT, logS, 3);
    const std::size_t minPoints = 8;

    const auto midCoarse =
        find_plateau(slopes, -2.0, 0.1, minPoints, 0, n);
    if (!midCoarse)
        throw InsufficientRangeError(
            "estimate_bath_parameters: no slope -2 plateau in the curve");
    const IndexWindow mid = refine_plateau(slopes, -2.0, *midCoarse,
                                           {0.02, 0.03, 0.05, 0.1}, minPoints);

    const auto lateCoarse =
        find_plateau(slopes, -0.5, 0.1, minPoints, mid.end, n);
    if (!lateCoarse)
        throw InsufficientRangeError(
            "estimate_bath_parameters: no slope -1/2 plateau after the "
            "intermediate window");
    const IndexWindow late =
        refine_plateau(slopes, -0.5, *lateCoarse,
                       {0.005, 0.01, 0.02, 0.05, 0.1}, minPoints);

    RegimeEstimate est;
    est.mid = window_report(logT, logS, curve, -2.0, mid);
    est.late = window_report(logT, logS, curve, -0.5, late);
    if (est.mid.rms > 0.1 || est.late.rms > 0.1)
        throw BadFitError("estimate_bath_parameters: plateau residuals > 0.1");

    // Intermediate window:  log S = log(sqrt(3) m / (hbar D)) - 2 log t.
    est.dHat = std::sqrt(3.0) * mass / (hbar * std::exp(est.mid.intercept));

    // Late window:  log S = log(P(gamma)/sqrt(gamma)) - (1/2) log t  with
    // P = purityFactor * sqrt(4 m^2 g^4 / (hbar^2 D (D + aPlusC g))).
    // h(gamma) below is strictly increasing, so bisect on log gamma.
    const double D = est.dHat;
    auto h = [&](double logGamma) {
        const double g = std::exp(logGamma);
        const double p2 = 4.0 * mass * mass * g * g * g * g /
                          (hbar * hbar * D * (D + aPlusC * g));
        return std::log(purityFactor) + 0.5 * std::log(p2) -
               0.5 * std::log(g) - est.late.intercept;
    };
    double lo = -60.0, hi = 60.0;
    if (h(lo) > 0.0 || h(hi) < 0.0)
        throw BadFitError(
            "estimate_bath_parameters: late intercept outside solvable range");
    for (int iter = 0; iter < 200; ++iter) {
        const double midPt = 0.5 * (lo + hi);
        (h(midPt) < 0.0 ? lo : hi) = midPt;
    }
    est.gammaHat = std::exp(0.5 * (lo + hi));
    est.temperatureHat =
        hbar * hbar * est.dHat / (2.0 * mass * est.gammaHat);
    est.tauRelaxationHat = 1.0 / est.gammaHat;
    est.tauThermalHat = hbar / est.temperatureHat;
    return est;
}

}  // namespace qbd
