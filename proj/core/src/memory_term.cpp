#include "qbd/memory_term.hpp"

#include <cmath>

#include "qbd/errors.hpp"

namespace qbd {

double projection_coefficient(const GaussianMixtureState& rho0,
                              const GaussianMixtureState& rho) {
    return hs_overlap(rho0, rho) / purity(rho0);
}

GaussianMixtureState complement_component(const GaussianMixtureState& rho0,
                                          const GaussianMixtureState& rho) {
    const double c = projection_coefficient(rho0, rho);
    GaussianMixtureState out = rho;
    for (const GaussianKernel& k : rho0.kernels) {
        GaussianKernel scaled = k;
        scaled.logPrefactor += std::log(Complex(-c));
        out.kernels.push_back(scaled);
    }
    return out;
}

double ersak_memory_term(const GaussianMixtureState& state,
                         const BathParams& bath, double t, double tPrime) {
    if (!(t >= 0.0) || !(tPrime >= 0.0) || tPrime > t)
        throw ValidationError("ersak_memory_term: need 0 <= t' <= t");
    const PropagatorCoefficients first =
        free_expansion_coefficients(bath, tPrime);
    const GaussianMixtureState rho1 = propagate_state(state, bath, first);
    const GaussianMixtureState comp = complement_component(state, rho1);
    const PropagatorCoefficients second =
        free_expansion_coefficients(bath, t - tPrime);
    const GaussianMixtureState comp2 = propagate_state(comp, bath, second);
    return projection_coefficient(state, comp2);
}

SubexponentialReport subexponential_check(const std::vector<double>& t,
                                          const std::vector<double>& S) {
    const std::size_t n = t.size();
    if (n < 8 || S.size() != n)
        throw ValidationError("subexponential_check: need >= 8 samples");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(t[i] > 0.0) || !(S[i] > 0.0))
            throw ValidationError(
                "subexponential_check: nonpositive t or S sample");
        y[i] = -std::log(S[i]);
    }

    // Least squares of y = c t^q + d for fixed q (2x2 normal equations).
    auto sse = [&](double q, double* cOut, double* dOut) {
        double sbb = 0, sb = 0, sby = 0, sy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double b = std::pow(t[i], q);
            sbb += b * b;
            sb += b;
            sby += b * y[i];
            sy += y[i];
        }
        const double det = sbb * n - sb * sb;
        const double c = (sby * n - sb * sy) / det;
        const double d = (sbb * sy - sb * sby) / det;
        double acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (c * std::pow(t[i], q) + d);
            acc += r * r;
        }
        if (cOut) *cOut = c;
        if (dOut) *dOut = d;
        return acc;
    };

    // Golden-section minimization of sse(q) on [0.05, 1.5].
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.05, hi = 1.5;
    double q1 = hi - gr * (hi - lo), q2 = lo + gr * (hi - lo);
    double f1 = sse(q1, nullptr, nullptr), f2 = sse(q2, nullptr, nullptr);
    for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
        if (f1 < f2) {
            hi = q2;
            q2 = q1;
            f2 = f1;
            q1 = hi - gr * (hi - lo);
            f1 = sse(q1, nullptr, nullptr);
        } else {
            lo = q1;
            q1 = q2;
            f1 = f2;
            q2 = lo + gr * (hi - lo);
            f2 = sse(q2, nullptr, nullptr);
        }
    }

    SubexponentialReport rep;
    rep.q = 0.5 * (lo + hi);
    rep.rms = std::sqrt(sse(rep.q, &rep.coefficient, &rep.offset) / n);

    // Effective rate -log S / t must fall monotonically from some index in
    // the first half of the window onwards.
    std::size_t start = n;  // first index of a decreasing tail
    for (std::size_t i = n - 1; i > 0; --i) {
        const double hPrev = y[i - 1] / t[i - 1];
        const double hCur = y[i] / t[i];
        if (hCur <= hPrev * (1.0 - 1e-9))
            start = i - 1;
        else
            break;
    }
    rep.rateEventuallyDecreasing = start <= n / 2;
    return rep;
}

double two_stage_support_horizon(double a, double c, const BathParams& bath,
                                 double tMin, double tMax) {
    if (!(a > std::abs(c)))
        throw ValidationError("two_stage_support_horizon: need a > |c|");
    if (!(tMax >= tMin) || !(tMin > 0.0))
        throw ValidationError(
            "two_stage_support_horizon: need 0 < tMin <= tMax");
    const auto margin = [&](double t) {
        const PropagatorCoefficients pc = free_expansion_coefficients(bath, t);
        const double b = scaling_factor(a, c, bath, pc);
        const double q = 2.0 * (a - c) / (b * b);
        const double k = bath.mass / (2.0 * bath.hbar * pc.G2);
        const double entries =
            4.0 * (2.0 * bath.D * pc.alpha + k * (1.0 + std::abs(pc.G1)) + a +
                   std::abs(c));
        return entries * (64.0 * 2.2e-16) / q;
    };
    if (margin(tMax) <= 1e-3) return tMax;
    if (margin(tMin) > 1e-3) return tMin;
    double lo = tMin, hi = tMax;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = std::sqrt(lo * hi);
        (margin(mid) <= 1e-3 ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace qbd
