#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbd/errors.hpp"
#include "qbd/ode.hpp"
#include "test_util.hpp"

using namespace qbd;
using qbd::test::Rng;

TEST_CASE("rk45 integrates componentwise linear decay") {
    OdeRhs f = [](double, const OdeState& y, OdeState& dy) {
        for (int i = 0; i < 4; ++i) dy[i] = -y[i];
    };
    const OdeState y0{1.0, 2.0, -1.0, 0.5};
    DenseOdeSolution sol = integrate_rk45(f, y0, 0.0, 10.0);
    CHECK(sol.tBegin() == 0.0);
    CHECK(sol.tEnd() == 10.0);
    const OdeState yEnd = sol.eval(10.0);
    for (int i = 0; i < 4; ++i)
        CHECK(test::rel_err(yEnd[i], y0[i] * std::exp(-10.0)) < 1e-9);
    // dense output between accepted steps
    for (double t : {0.37, 1.9, 3.7, 7.31}) {
        const OdeState y = sol.eval(t);
        for (int i = 0; i < 4; ++i)
            CHECK(test::rel_err(y[i], y0[i] * std::exp(-t)) < 1e-9);
    }
    // eval clamps outside the integrated range
    CHECK(sol.eval(-5.0)[0] == sol.eval(0.0)[0]);
    CHECK(sol.eval(50.0)[0] == sol.eval(10.0)[0]);
}

TEST_CASE("rk45 reproduces the undamped oscillator fundamental pair") {
    const double w = 2.0;
    OdeRhs f = [w](double, const OdeState& y, OdeState& dy) {
        dy[0] = y[1];
        dy[1] = -w * w * y[0];
        dy[2] = y[3];
        dy[3] = -w * w * y[2];
    };
    DenseOdeSolution sol = integrate_rk45(f, {1.0, 0.0, 0.0, 1.0}, 0.0, 20.0);
    for (double t : {0.3, 1.7, 5.5, 12.9, 19.99}) {
        const OdeState y = sol.eval(t);
        CHECK(std::abs(y[0] - std::cos(w * t)) < 1e-8);
        CHECK(std::abs(y[1] + w * std::sin(w * t)) < 1e-8);
        CHECK(std::abs(y[2] - std::sin(w * t) / w) < 1e-8);
        CHECK(std::abs(y[3] - std::cos(w * t)) < 1e-8);
    }
}

TEST_CASE("rk45 honors the step budget") {
    const double w = 100.0;
    OdeRhs f = [w](double, const OdeState& y, OdeState& dy) {
        dy[0] = y[1];
        dy[1] = -w * w * y[0];
        dy[2] = y[3];
        dy[3] = -w * w * y[2];
    };
    OdeOptions opt;
    opt.maxSteps = 10;
    CHECK_THROWS_AS(integrate_rk45(f, {1.0, 0.0, 0.0, 1.0}, 0.0, 1000.0, opt),
                    IntegrationFailureError);
}

TEST_CASE("property: random stable linear systems match the matrix exponential") {
    // diagonal systems y_i' = -k_i y_i with random rates; exact solution known
    Rng rng(0x5eed0002u);
    for (int cs = 0; cs < 100; ++cs) {
        double k[4];
        for (double& ki : k) ki = rng.log_uniform(1e-2, 10.0);
        OdeRhs f = [&k](double, const OdeState& y, OdeState& dy) {
            for (int i = 0; i < 4; ++i) dy[i] = -k[i] * y[i];
        };
        const double t1 = rng.uniform(0.5, 4.0);
        DenseOdeSolution sol = integrate_rk45(f, {1.0, -2.0, 0.3, 4.0}, 0.0, t1);
        const OdeState y = sol.eval(t1);
        const double ref[4] = {1.0, -2.0, 0.3, 4.0};
        for (int i = 0; i < 4; ++i)
            CHECK(test::rel_err(y[i], ref[i] * std::exp(-k[i] * t1)) < 1e-8);
    }
}
