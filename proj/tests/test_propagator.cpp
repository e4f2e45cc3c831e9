#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qbd/bath.hpp"
#include "qbd/errors.hpp"
#include "qbd/gaussian.hpp"
#include "qbd/propagator.hpp"
#include "qbd/states.hpp"
#include "test_util.hpp"

using namespace qbd;
using qbd::test::Rng;
using qbd::test::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

const BathParams kCanonical{1e-3, 100.0};

}  // namespace

TEST_CASE("free-expansion coefficients at t = 0 are the identity") {
    const PropagatorCoefficients pc =
        free_expansion_coefficients(kCanonical, 0.0);
    CHECK(pc.G1 == 1.0);
    CHECK(pc.dotG1 == 0.0);
    CHECK(pc.G2 == 0.0);
    CHECK(pc.dotG2 == 1.0);
    CHECK(pc.alpha == 0.0);
    CHECK(pc.beta == 0.0);
    CHECK(pc.eta == 0.0);
    CHECK(pc.dissipation == 1.0);
    CHECK_THROWS_AS(free_expansion_coefficients(kCanonical, -1.0),
                    ValidationError);
}

TEST_CASE("gamma = 0 bridge integrals have elementary values") {
    // B = s/t, A = 1 - s/t:  alpha = beta = t/3, eta = t/6
    const BathParams pure{0.0, 50.0};
    for (double t : {0.2, 1.0, 7.0}) {
        const PropagatorCoefficients pc = free_expansion_coefficients(pure, t);
        CHECK(rel_err(pc.G2, t) < 1e-14);
        CHECK(rel_err(pc.dotG2, 1.0) < 1e-14);
        CHECK(rel_err(pc.alpha, t / 3.0) < 1e-12);
        CHECK(rel_err(pc.beta, t / 3.0) < 1e-12);
        CHECK(rel_err(pc.eta, t / 6.0) < 1e-12);
        CHECK(pc.dissipation == 1.0);
    }
}

TEST_CASE("small-gamma branch joins the gamma = 0 limit") {
    const BathParams tiny{1e-9, 50.0};
    const PropagatorCoefficients pc = free_expansion_coefficients(tiny, 2.0);
    CHECK(rel_err(pc.alpha, 2.0 / 3.0) < 1e-6);
    CHECK(rel_err(pc.beta, 2.0 / 3.0) < 1e-6);
    CHECK(rel_err(pc.eta, 2.0 / 6.0) < 1e-6);
    CHECK(rel_err(pc.G2, 2.0) < 1e-8);
}

TEST_CASE("strong-damping limits of the coefficients") {
    // G2 -> 1/(2 gamma), beta, eta -> 1/(4 gamma); alpha -> t - 3/(4 gamma)
    const BathParams strong{1.0, 100.0};

    const PropagatorCoefficients at5 = free_expansion_coefficients(strong, 5.0);
    CHECK(rel_err(at5.G2, 0.5) < 1e-4);
    CHECK(rel_err(at5.beta, 0.25) < 0.02);
    CHECK(rel_err(at5.eta, 0.25) < 0.02);
    // alpha approaches the *offset* line t - 3/(4 gamma) long before it is
    // within a few percent of t itself
    CHECK(std::abs(at5.alpha - (5.0 - 0.75)) < 1e-3);
    CHECK(rel_err(at5.alpha, 5.0) > 0.10);  // plain t is still 15% off here

    const PropagatorCoefficients at40 =
        free_expansion_coefficients(strong, 40.0);
    CHECK(rel_err(at40.alpha, 40.0) < 0.02);
    CHECK(rel_err(at40.beta, 0.25) < 1e-10);
    CHECK(rel_err(at40.eta, 0.25) < 1e-10);
    CHECK(rel_err(at40.dissipation, std::exp(-80.0)) < 1e-12);
}

TEST_CASE("closed coefficients match the dense-ODE path across branches") {
    // gamma t spans the series/closed-form switchover region
    const double gamma = 1e-3;
    const BathParams bath{gamma, 100.0};
    const FundamentalSolution fs = classical_fundamental_solutions(
        [](double) { return 0.0; }, gamma, 1500.0);
    for (double t : {1.0, 10.0, 100.0, 250.0, 400.0, 1000.0}) {
        const PropagatorCoefficients closed =
            free_expansion_coefficients(bath, t);
        const PropagatorCoefficients ode = coefficients_from_fundamental(fs, t);
        CHECK(rel_err(ode.G1, closed.G1) < 1e-8);
        CHECK(rel_err(ode.G2, closed.G2) < 1e-8);
        CHECK(rel_err(ode.dotG2, closed.dotG2) < 1e-7);
        CHECK(rel_err(ode.alpha, closed.alpha) < 1e-8);
        CHECK(rel_err(ode.beta, closed.beta) < 1e-8);
        CHECK(rel_err(ode.eta, closed.eta) < 1e-8);
        CHECK(fs.wronskianDefect(t) < 1e-11);
    }
}

TEST_CASE("fundamental solutions of the damped oscillator") {
    const double gamma = 0.3, w = 2.0;
    const double Om = std::sqrt(w * w - gamma * gamma);
    const FundamentalSolution fs = classical_fundamental_solutions(
        [w](double) { return w * w; }, gamma, 12.0);
    for (double t : {0.5, 3.0, 11.0}) {
        const FundamentalSolution::Sample s = fs.eval(t);
        const double e = std::exp(-gamma * t);
        CHECK(rel_err(s.G1,
                      e * (std::cos(Om * t) + gamma / Om * std::sin(Om * t))) <
              1e-8);
        CHECK(rel_err(s.G2, e * std::sin(Om * t) / Om) < 1e-8);
        CHECK(fs.wronskianDefect(t) < 1e-10);
    }
    CHECK_THROWS_AS(coefficients_from_fundamental(fs, 20.0), ValidationError);
}

TEST_CASE("caustics (G2 = 0 at t > 0) are rejected") {
    PropagatorCoefficients pc;
    pc.t = 1.0;
    pc.G2 = 0.0;
    CHECK_THROWS_AS(propagator_forms(kCanonical, pc), SingularFormError);
    CHECK_THROWS_AS(propagate_state(make_gaussian_packet(1.0), kCanonical, pc),
                    SingularFormError);
}

TEST_CASE("time-dependent stiffness keeps the Wronskian identity") {
    const FundamentalSolution fs = classical_fundamental_solutions(
        [](double t) { return 1.0 + 0.5 * std::sin(t); }, 0.2, 20.0);
    for (double t : {1.0, 5.0, 19.0}) CHECK(fs.wronskianDefect(t) < 1e-9);
}

TEST_CASE("propagation at t = 0 is the identity") {
    const GaussianMixtureState s = make_gaussian_ac(2.0, 1.0);
    const GaussianMixtureState out = propagate_state(
        s, kCanonical, free_expansion_coefficients(kCanonical, 0.0));
    CHECK(out.kernels.size() == 1);
    CHECK(std::abs(evaluate_state(out, 0.3, -0.2) -
                   evaluate_state(s, 0.3, -0.2)) < 1e-15);
}

TEST_CASE("unitary bath reproduces textbook packet spreading") {
    const BathParams free = BathParams{0.0, 0.0};
    const GaussianMixtureState s = make_gaussian_packet(1.0);
    const double t = 2.0;
    const GaussianMixtureState out =
        propagate_state(s, free, free_expansion_coefficients(free, t));
    const double b2 = 1.0 + t * t;
    for (double x : {-1.2, 0.0, 0.8})
        for (double y : {-0.5, 0.9}) {
            const Complex want =
                std::exp(Complex(-(x * x + y * y) / (2.0 * b2),
                                 t * (x * x - y * y) / (2.0 * b2))) /
                (std::sqrt(kPi * b2));
            CHECK(std::abs(evaluate_state(out, x, y) - want) < 1e-12);
        }
    CHECK(rel_err(position_variance(out), 0.5 * b2) < 1e-12);
    CHECK(rel_err(purity(out), 1.0) < 1e-11);
}

TEST_CASE("propagator is a semigroup in elapsed time") {
    const GaussianMixtureState s = make_gaussian_ac(2.0, 1.0);
    const GaussianMixtureState oneShot = propagate_state(
        s, kCanonical, free_expansion_coefficients(kCanonical, 1.0));
    const GaussianMixtureState firstLeg = propagate_state(
        s, kCanonical, free_expansion_coefficients(kCanonical, 0.4));
    const GaussianMixtureState twoShot = propagate_state(
        firstLeg, kCanonical, free_expansion_coefficients(kCanonical, 0.6));
    for (double x : {-0.7, 0.0, 1.1})
        for (double y : {-0.4, 0.6}) {
            const Complex a = evaluate_state(oneShot, x, y);
            const Complex b = evaluate_state(twoShot, x, y);
            CHECK(std::abs(a - b) < 1e-10);
        }
    CHECK(rel_err(position_variance(twoShot), position_variance(oneShot)) <
          1e-10);
}

TEST_CASE("property: propagation preserves trace, Hermiticity, purity bound") {
    Rng rng(0x5eed0007u);
    for (int cs = 0; cs < 100; ++cs) {
        const BathParams bath{rng.log_uniform(1e-4, 1.0),
                              rng.log_uniform(0.1, 1e3)};
        GaussianMixtureState s;
        switch (cs % 3) {
            case 0:
                s = make_gaussian_packet(rng.uniform(0.4, 2.0),
                                         rng.uniform(-1.0, 1.0),
                                         rng.uniform(-1.0, 1.0));
                break;
            case 1: {
                const double c = rng.uniform(0.0, 0.8);
                s = make_gaussian_ac(c + rng.uniform(0.2, 2.0), c);
                break;
            }
            default:
                s = make_cat(rng.uniform(0.6, 1.4), rng.uniform(0.0, 5.0));
        }
        const double t = rng.log_uniform(1e-3, 10.0);
        const GaussianMixtureState out =
            propagate_state(s, bath, free_expansion_coefficients(bath, t));
        CHECK(rel_err(trace_norm(out), 1.0) < 1e-8);
        CHECK(is_hermitian(out, 1e-8));
        CHECK(purity(out) <= 1.0 + 1e-8);
        CHECK(purity(out) > 0.0);
    }
}

TEST_CASE("scaling factor: identities and variance chain") {
    // t = 0: no spreading
    CHECK(scaling_factor(2.0, 1.0, kCanonical,
                         free_expansion_coefficients(kCanonical, 0.0)) == 1.0);

    // unitary: b^2 = 1 + t^2 (a - c)(a + c)
    const BathParams free{0.0, 0.0};
    const double bu = scaling_factor(1.0, 0.0, free,
                                     free_expansion_coefficients(free, 3.0));
    CHECK(rel_err(bu, std::sqrt(1.0 + 9.0)) < 1e-13);

    // gamma = 0 with noise: alpha = t/3 exactly
    const BathParams pure{0.0, 10.0};
    const double t = 0.7;
    const double b0 = scaling_factor(2.0, 1.0, pure,
                                     free_expansion_coefficients(pure, t));
    const double want =
        std::sqrt(1.0 + t * t * (2.0 - 1.0) * ((2.0 + 1.0) + 40.0 * t / 3.0));
    CHECK(rel_err(b0, want) < 1e-12);

    // evolved variance equals b^2 / (2 (a - c)) wherever both routes work
    for (double tt : {0.5, 2.0, 5.0}) {
        const PropagatorCoefficients pc =
            free_expansion_coefficients(kCanonical, tt);
        const double b = scaling_factor(2.0, 1.0, kCanonical, pc);
        const GaussianMixtureState out =
            propagate_state(make_gaussian_ac(2.0, 1.0), kCanonical, pc);
        CHECK(rel_err(position_variance(out), b * b / 2.0) < 1e-9);
    }
}

TEST_CASE("variance growth laws of the integrated dynamics") {
    // Intermediate window: Var(t) -> (2/3) hbar^2 D t^3 / m^2.  The grid
    // propagator reproduces the same curve, so the constant is pinned by two
    // independent routes.
    const double t = 5.0;
    const PropagatorCoefficients pc = free_expansion_coefficients(kCanonical, t);
    const double b = scaling_factor(2.0, 1.0, kCanonical, pc);
    const double varMid = b * b / (2.0 * (2.0 - 1.0));
    CHECK(rel_err(varMid, (2.0 / 3.0) * 100.0 * t * t * t) < 0.02);

    // Long-time window: Var(t) -> k_B T t / (m gamma) once t >> 1/gamma.
    // position_variance cannot represent the state this late (the diagonal
    // residue underflows the entry rounding), so go through b(t).
    const double kT = kCanonical.temperature();
    const double tLate = 8.9e6;
    const double bLate = scaling_factor(
        2.0, 1.0, kCanonical, free_expansion_coefficients(kCanonical, tLate));
    const double varLate = bLate * bLate / 2.0;
    CHECK(rel_err(varLate, kT * tLate / 1e-3) < 0.02);
}

TEST_CASE("coherence width settles at the thermal length") {
    // Once <p^2> has relaxed to m k_B T, the Fourier relation
    // rho(d, -d) ~ exp(-2 <p^2> d^2 / hbar^2) pins the decay constant in
    // d^2 at 2 m k_B T / hbar^2 = D / gamma = 1 / lambda^2.
    const double lambda2 = kCanonical.gamma / kCanonical.D;
    const GaussianMixtureState out = propagate_state(
        make_gaussian_ac(2.0, 1.0), kCanonical,
        free_expansion_coefficients(kCanonical, 1e5));
    const double d = 0.5 * std::sqrt(lambda2);
    const double K =
        -(std::log(std::abs(evaluate_state(out, d, -d))) -
          std::log(std::abs(evaluate_state(out, 0.0, 0.0)))) /
        (d * d);
    CHECK(rel_err(K * lambda2, 1.0) < 0.05);
}
