#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbd/bath.hpp"
#include "qbd/errors.hpp"
#include "qbd/fitting.hpp"
#include "qbd/gaussian.hpp"
#include "qbd/propagator.hpp"
#include "qbd/quadrature.hpp"
#include "qbd/states.hpp"
#include "qbd/survival.hpp"
#include "test_util.hpp"

using namespace qbd;
using qbd::test::rel_err;

namespace {

const BathParams kCanonical{1e-3, 100.0};

double closed_S(double t, const BathParams& bath = kCanonical, double a = 2.0,
                double c = 1.0) {
    return survival_probability_closed(a, c, bath,
                                       free_expansion_coefficients(bath, t));
}

}  // namespace

TEST_CASE("survival at t = 0 is exactly 1 on both evaluation paths") {
    const PropagatorCoefficients id =
        free_expansion_coefficients(kCanonical, 0.0);
    CHECK(survival_probability_closed(2.0, 1.0, kCanonical, id) == 1.0);
    CHECK(survival_probability(make_gaussian_ac(2.0, 1.0), kCanonical, id) ==
          1.0);
    CHECK_THROWS_AS(survival_probability_closed(1.0, 1.5, kCanonical, id),
                    ValidationError);
}

TEST_CASE("reference values of the closed-form curve are stable") {
    // Values frozen from this implementation after cross-checking against
    // direct quadrature of Tr[rho0 rho(t)] and the grid propagator.
    CHECK(rel_err(closed_S(0.05), 3.011189307245e-01) < 1e-9);
    CHECK(rel_err(closed_S(0.1), 2.161778409276e-01) < 1e-9);
    CHECK(rel_err(closed_S(1.0), 1.668044357604e-02) < 1e-9);
    CHECK(rel_err(closed_S(10.0), 1.747635037423e-04) < 1e-9);
}

TEST_CASE("closed form agrees with direct overlap quadrature") {
    // Independent route: propagate the kernel, then integrate
    // Tr[rho0 rho(t)] / Tr[rho0^2] with a fixed-order tensor rule.
    const GaussianMixtureState rho0 = make_gaussian_ac(2.0, 1.0);
    const GaussianMixtureState rhoT = propagate_state(
        rho0, kCanonical, free_expansion_coefficients(kCanonical, 1.0));
    const Complex overlap = integrate_2d_fixed(
        [&](double x, double y) {
            return evaluate_state(rho0, x, y) * evaluate_state(rhoT, y, x);
        },
        -6.0, 6.0, -6.0, 6.0, 600);
    const double byQuad = overlap.real() / purity(rho0);
    CHECK(rel_err(byQuad, closed_S(1.0)) < 1e-6);
}

TEST_CASE("generic kernel-pair path matches the closed form") {
    const GaussianMixtureState rho0 = make_gaussian_ac(2.0, 1.0);
    for (double t : {0.01, 0.05, 0.5, 5.0, 50.0, 5000.0}) {
        const PropagatorCoefficients pc =
            free_expansion_coefficients(kCanonical, t);
        CHECK(rel_err(survival_probability(rho0, kCanonical, pc),
                      survival_probability_closed(2.0, 1.0, kCanonical, pc)) <
              1e-10);
    }
}

TEST_CASE("decoherence time formulas") {
    CHECK(rel_err(decoherence_time(make_gaussian_packet(1.0), kCanonical),
                  0.01) < 1e-12);
    CHECK(rel_err(decoherence_time(make_gaussian_packet(2.0), kCanonical),
                  0.0025) < 1e-12);
    CHECK(rel_err(decoherence_time_ac(2.0, 1.0, kCanonical), 0.03) < 1e-12);
    CHECK(rel_err(decoherence_time(make_gaussian_ac(2.0, 1.0), kCanonical),
                  decoherence_time_ac(2.0, 1.0, kCanonical)) < 1e-12);

    // superposition of packets r = 10 sigma apart from the center:
    // tau_D approaches lambda^2 / (2 gamma r^2) = 1 / (2 D r^2)
    const double r = 10.0;
    const double tauCat =
        decoherence_time(make_cat(1.0, 2.0 * r), kCanonical);
    const double zurek = 1.0 / (2.0 * kCanonical.D * r * r);
    CHECK(tauCat / zurek > 0.98);
    CHECK(tauCat / zurek < 1.02);

    CHECK_THROWS_AS(decoherence_time_ac(2.0, 1.0, BathParams{0.0, 0.0}),
                    DegenerateBathError);
}

TEST_CASE("corrected initial decay rate is 1/tau_D plus small terms") {
    const GaussianMixtureState s = make_gaussian_ac(2.0, 1.0);
    const double rate = decoherence_rate_lindblad_corrected(s, kCanonical);
    const double tauD = decoherence_time(s, kCanonical);
    CHECK(rate * tauD > 0.99);
    CHECK(rate * tauD < 1.02);
    CHECK_THROWS_AS(
        decoherence_rate_lindblad_corrected(s, BathParams{0.0, 100.0}),
        DegenerateBathError);
}

TEST_CASE("short-time window follows 1 - t / tau_D") {
    const double tauD = 0.03;  // (a + c) / D for (2, 1)
    CHECK(short_time_prediction(0.0, tauD) == 1.0);
    for (double f : {1e-6, 1e-5, 1e-4}) {
        const double t = f * tauD;
        CHECK(std::abs(closed_S(t) - short_time_prediction(t, tauD)) < 2e-8);
    }
    // finite-difference initial slope vs -1 / tau_D
    const double h = 1e-4 * tauD;
    const double slope = (closed_S(h) - 1.0) / h;
    CHECK(rel_err(slope, -1.0 / tauD) < 0.01);
}

TEST_CASE("intermediate-window asymptote") {
    // sqrt(3) m / (hbar D t^2), so doubling t quarters the value
    CHECK(rel_err(asymptote_intermediate(10.0, kCanonical),
                  std::sqrt(3.0) * 1e-4) < 1e-13);
    CHECK(rel_err(asymptote_intermediate(20.0, kCanonical),
                  0.25 * asymptote_intermediate(10.0, kCanonical)) < 1e-13);
    CHECK(rel_err(asymptote_intermediate(10.0, kCanonical), closed_S(10.0)) <
          0.05);
}

TEST_CASE("overdamped-window asymptote") {
    // scales as 1 / sqrt(t)
    CHECK(rel_err(asymptote_overdamped(2e6, 2.0, 1.0, kCanonical),
                  asymptote_overdamped(1e6, 2.0, 1.0, kCanonical) /
                      std::sqrt(2.0)) < 1e-13);
    CHECK(rel_err(asymptote_overdamped(1e6, 2.0, 1.0, kCanonical),
                  closed_S(1e6)) < 0.10);

    // prefactor reduces to sqrt((a+c)/(a-c)) (hbar gamma / kT) / sqrt(g t)
    // up to the 1 + (a+c) gamma / D correction
    const double kT = kCanonical.temperature();
    const double g = kCanonical.gamma;
    const double simple = std::sqrt(3.0) * (g / kT) / std::sqrt(g * 1e6);
    CHECK(rel_err(asymptote_overdamped(1e6, 2.0, 1.0, kCanonical), simple) <
          1e-4);
}

TEST_CASE("regime classification bands") {
    const double tauD = 0.01, tauR = 1000.0;
    CHECK(regime_classify(1e-4, tauD, tauR) == Regime::ZenoLinear);
    CHECK(regime_classify(1.0, tauD, tauR) == Regime::Intermediate);
    CHECK(regime_classify(1e5, tauD, tauR) == Regime::Overdamped);
    // between the windows everything is crossover
    CHECK(regime_classify(0.5 * tauD, tauD, tauR) == Regime::Crossover);
    CHECK(regime_classify(5.0 * tauD, tauD, tauR) == Regime::Crossover);
    CHECK(regime_classify(tauR, tauD, tauR) == Regime::Crossover);
    CHECK(regime_classify(50.0 * tauD, tauD, tauR) == Regime::Intermediate);

    CHECK(std::string(regime_name(Regime::ZenoLinear)) == "zeno-linear");
    CHECK(std::string(regime_name(Regime::Intermediate)) == "intermediate");
    CHECK(std::string(regime_name(Regime::Overdamped)) == "overdamped");
    CHECK(std::string(regime_name(Regime::Crossover)) == "crossover");
}

TEST_CASE("log-log slope structure of the canonical curve") {
    const SurvivalCurve curve =
        survival_sweep_closed(2.0, 1.0, kCanonical, 1e-3, 1e7, 400);
    std::vector<double> lt(curve.t.size()), lS(curve.t.size());
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
        lt[i] = std::log(curve.t[i]);
        lS[i] = std::log(curve.S[i]);
        CHECK(curve.S[i] > 0.0);
        CHECK(curve.S[i] <= 1.0);
    }
    const std::vector<double> slopes = local_slopes(lt, lS);

    // A slope -2 plateau develops inside the intermediate window (it is not
    // yet formed at 10 tau_D, where the slope is still near -0.5) and spans
    // at least a decade before drifting toward the overdamped branch.
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
        if (curve.t[i] < 0.1) lo = i + 1;
        if (curve.t[i] <= 100.0) hi = i + 1;
    }
    const auto mid = find_plateau(slopes, -2.0, 0.1, 8, lo, hi);
    REQUIRE(mid.has_value());
    CHECK(curve.t[mid->end - 1] / curve.t[mid->begin] > 10.0);
    for (std::size_t i = mid->begin; i < mid->end; ++i) {
        CHECK(slopes[i] > -2.2);
        CHECK(slopes[i] < -1.8);
    }
    const LinearFit midFit = fit_line(lt, lS, mid->begin, mid->end);
    CHECK(midFit.slope > -2.05);
    CHECK(midFit.slope < -1.9);

    // The -1/2 long-time branch holds pointwise across [10 tau_R, 1e4 tau_R].
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
        if (curve.t[i] < 1e4 || curve.t[i] > 1e7) continue;
        CHECK(slopes[i] > -0.6);
        CHECK(slopes[i] < -0.4);
    }

    // sweep rows reproduce the pointwise closed form
    CHECK(rel_err(curve.t.front(), 1e-3) < 1e-12);
    CHECK(rel_err(curve.t.back(), 1e7) < 1e-12);
    CHECK(rel_err(curve.S[100], closed_S(curve.t[100])) < 1e-12);
    CHECK_THROWS_AS(survival_sweep_closed(2.0, 1.0, kCanonical, 0.0, 1.0, 10),
                    ValidationError);
}

TEST_CASE("unitary survival is flat at t = 0 with curvature Var(H)/hbar^2") {
    const BathParams free{0.0, 0.0};
    const double sigma = 2.0;
    const double a = 1.0 / (sigma * sigma);
    const double h = 2.5e-4 * (2.0 * sigma * sigma);
    double S0 = 1.0, S1, S2;
    S1 = survival_probability_closed(a, 0.0, free,
                                     free_expansion_coefficients(free, h));
    S2 = survival_probability_closed(
        a, 0.0, free, free_expansion_coefficients(free, 2.0 * h));
    // power-basis solve of S = c0 + c1 t + c2 t^2 through the three samples
    const double c1 = (4.0 * S1 - 3.0 * S0 - S2) / (2.0 * h);
    const double c2 = (S2 - 2.0 * S1 + S0) / (2.0 * h * h);
    CHECK(std::abs(c1) < 1e-9);
    // free packet: Var(H) / hbar^2 = 1 / (8 sigma^4)
    CHECK(rel_err(-c2, 1.0 / (8.0 * sigma * sigma * sigma * sigma)) < 0.01);
}
