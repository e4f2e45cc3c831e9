#include "qbd/states.hpp"

#include <cmath>
#include <numbers>

#include "qbd/errors.hpp"
#include "qbd/types.hpp"

namespace qbd {

namespace {

GaussianKernel ac_kernel(double a, double c) {
    GaussianKernel k;
    k.quadForm = {Complex(a), Complex(-c), Complex(a)};
    // Unit trace: diagonal form has q = 2(a - c).
    k.logPrefactor = 0.5 * std::log((a - c) / std::numbers::pi);
    return k;
}

}  // namespace

GaussianMixtureState make_gaussian_packet(double sigma, double x0, double p0,
                                          double hbar) {
    if (!(sigma > 0.0))
        throw ValidationError("make_gaussian_packet: sigma must be > 0");
    const double a = 1.0 / (sigma * sigma);
    GaussianKernel k = ac_kernel(a, 0.0);
    // Shift to x0 and apply the momentum phase exp(i p0 (x - y) / hbar).
    k.linear = {Complex(a * x0, p0 / hbar), Complex(a * x0, -p0 / hbar)};
    k.logPrefactor -= a * x0 * x0;
    return {{k}};
}

GaussianMixtureState make_gaussian_ac(double a, double c, double x0) {
    if (!(a > 0.0) || !(a > std::abs(c)))
        throw ValidationError("make_gaussian_ac: need a > |c| >= 0");
    GaussianKernel k = ac_kernel(a, c);
    if (x0 != 0.0) {
        k.linear = {Complex((a - c) * x0), Complex((a - c) * x0)};
        k.logPrefactor -= (a - c) * x0 * x0;
    }
    return {{k}};
}

GaussianMixtureState make_cat(double sigma, double separation) {
    if (!(sigma > 0.0) || !(separation >= 0.0))
        throw ValidationError("make_cat: need sigma > 0, separation >= 0");
    const double a = 1.0 / (sigma * sigma);
    const double r = 0.5 * separation;
    // |psi> = N (g_+ + g_-);  N^-2 = 2 sqrt(pi sigma^2) (1 + exp(-r^2/s^2)).
    const double logN2 =
        -std::log(2.0 * std::sqrt(std::numbers::pi) * sigma *
                  (1.0 + std::exp(-r * r * a)));
    GaussianMixtureState s;
    for (const double s1 : {+1.0, -1.0})
        for (const double s2 : {+1.0, -1.0}) {
            GaussianKernel k;
            k.quadForm = {Complex(a), Complex(0.0), Complex(a)};
            k.linear = {Complex(s1 * r * a), Complex(s2 * r * a)};
            k.logPrefactor = logN2 - r * r * a;
            bool absorbed = false;
            for (GaussianKernel& m : s.kernels) {
                const double tol = 1e-12 * (1.0 + std::abs(m.quadForm.m11));
                if (std::abs(m.quadForm.m11 - k.quadForm.m11) > tol ||
                    std::abs(m.quadForm.m12 - k.quadForm.m12) > tol ||
                    std::abs(m.quadForm.m22 - k.quadForm.m22) > tol ||
                    std::abs(m.linear.v1 - k.linear.v1) > tol ||
                    std::abs(m.linear.v2 - k.linear.v2) > tol)
                    continue;
                // Coincident kernel: add amplitudes instead of keeping a
                // duplicate (all four coincide at separation = 0).
                m.logPrefactor +=
                    std::log(1.0 + std::exp(k.logPrefactor - m.logPrefactor));
                absorbed = true;
                break;
            }
            if (!absorbed) s.kernels.push_back(k);
        }
    return s;
}

GaussianMixtureState make_thermal_oscillator(double xi0, double u) {
    if (!(xi0 > 0.0) || !(u >= 0.0) || !(u < 1.0))
        throw ValidationError(
            "make_thermal_oscillator: need xi0 > 0 and 0 <= u < 1");
    const double inv = 1.0 / (xi0 * xi0 * (1.0 - u * u));
    const double a = (1.0 + u * u) * inv;
    const double c = 2.0 * u * inv;
    return {{ac_kernel(a, c)}};
}

AcForm ac_form(const GaussianMixtureState& s) {
    if (s.kernels.size() != 1)
        throw ValidationError("ac_form: state is not a single kernel");
    const GaussianKernel& k = s.kernels.front();
    const ComplexSym2& m = k.quadForm;
    const double tol = 1e-12 * (std::abs(m.m11) + std::abs(m.m22));
    if (std::abs(m.m11 - m.m22) > tol || std::abs(m.m11.imag()) > tol ||
        std::abs(m.m12.imag()) > tol)
        throw ValidationError("ac_form: kernel is not in (a, c) shape");
    return {m.m11.real(), -m.m12.real()};
}

}  // namespace qbd
