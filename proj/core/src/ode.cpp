#include "qbd/ode.hpp"

#include <algorithm>
#include <cmath>

#include "qbd/errors.hpp"

namespace qbd {

namespace {

// Dormand-Prince 5(4) tableau.  b5 is the FSAL row (equal to the last stage
// coefficients), b4 the embedded fourth-order weights.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4w = 125.0 / 192,
                 b5w = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

OdeState axpy(const OdeState& y, double h, const OdeState& k) {
    OdeState out;
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + h * k[i];
    return out;
}

}  // namespace

DenseOdeSolution::DenseOdeSolution(std::vector<double> times,
                                   std::vector<OdeState> values,
                                   std::vector<OdeState> derivatives)
    : times_(std::move(times)),
      values_(std::move(values)),
      derivatives_(std::move(derivatives)) {}

OdeState DenseOdeSolution::eval(double t) const {
    t = std::clamp(t, times_.front(), times_.back());
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hiIdx = std::min<std::size_t>(
        std::max<std::ptrdiff_t>(it - times_.begin(), 1), times_.size() - 1);
    const std::size_t lo = hiIdx - 1;
    const double h = times_[hiIdx] - times_[lo];
    if (h <= 0.0) return values_[lo];
    const double s = (t - times_[lo]) / h;
    // Cubic Hermite basis.
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    OdeState out;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = h00 * values_[lo][i] + h10 * h * derivatives_[lo][i] +
                 h01 * values_[hiIdx][i] + h11 * h * derivatives_[hiIdx][i];
    return out;
}

DenseOdeSolution integrate_rk45(const OdeRhs& f, const OdeState& y0, double t0,
                                double t1, const OdeOptions& opt) {
    if (!(t1 > t0))
        throw IntegrationFailureError("integrate_rk45 requires t1 > t0");

    std::vector<double> times{t0};
    std::vector<OdeState> values{y0};
    std::vector<OdeState> derivs;

    OdeState y = y0;
    OdeState k1;
    f(t0, y, k1);
    derivs.push_back(k1);

    double t = t0;
    double h = opt.initialStep > 0 ? opt.initialStep : (t1 - t0) * 1e-4;
    h = std::min(h, t1 - t0);

    OdeState k2, k3, k4, k5, k6, k7, yTmp, y5;
    for (std::size_t step = 0; step < opt.maxSteps;) {
        if (t + h > t1) h = t1 - t;

        yTmp = axpy(y, h * a21, k1);
        f(t + c2 * h, yTmp, k2);
        for (std::size_t i = 0; i < y.size(); ++i)
            yTmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, yTmp, k3);
        for (std::size_t i = 0; i < y.size(); ++i)
            yTmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, yTmp, k4);
        for (std::size_t i = 0; i < y.size(); ++i)
            yTmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                  a54 * k4[i]);
        f(t + c5 * h, yTmp, k5);
        for (std::size_t i = 0; i < y.size(); ++i)
            yTmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                  a64 * k4[i] + a65 * k5[i]);
        f(t + h, yTmp, k6);
        for (std::size_t i = 0; i < y.size(); ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4w * k4[i] +
                                b5w * k5[i] + b6 * k6[i]);
        f(t + h, y5, k7);  // FSAL

        double errNorm = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double y4i = y[i] + h * (e1 * k1[i] + e3 * k3[i] +
                                           e4 * k4[i] + e5 * k5[i] +
                                           e6 * k6[i] + e7 * k7[i]);
            const double scale =
                opt.absTol +
                opt.relTol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double d = (y5[i] - y4i) / scale;
            errNorm += d * d;
        }
        errNorm = std::sqrt(errNorm / y.size());

        if (errNorm <= 1.0 || !std::isfinite(errNorm)) {
            if (!std::isfinite(errNorm))
                throw IntegrationFailureError(
                    "integrate_rk45 produced a non-finite state");
            t += h;
            y = y5;
            k1 = k7;
            times.push_back(t);
            values.push_back(y);
            derivs.push_back(k1);
            if (t >= t1)
                return DenseOdeSolution(std::move(times), std::move(values),
                                        std::move(derivs));
        }
        const double factor = std::clamp(
            0.9 * std::pow(std::max(errNorm, 1e-12), -0.2), 0.2, 5.0);
        h *= factor;
        if (h < 1e-14 * (t1 - t0))
            throw IntegrationFailureError("integrate_rk45 step underflow");
        ++step;  // attempted steps also count toward the budget
    }
    throw IntegrationFailureError("integrate_rk45 exceeded the step budget");
}

}  // namespace qbd
