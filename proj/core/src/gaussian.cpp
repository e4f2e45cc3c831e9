#include "qbd/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "qbd/errors.hpp"

namespace qbd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_re_positive_definite(const ComplexSym2& Q) {
    const double scale = std::abs(Q.m11.real()) + std::abs(Q.m22.real());
    if (!(Q.real_min_eigenvalue() > 1e-12 * std::max(scale, 1e-300)))
        throw NonNormalizableError(
            "Gaussian form is not normalizable: Re(Q) is not positive "
            "definite");
}

Complex checked_det(const ComplexSym2& Q) {
    const Complex det = Q.det();
    if (std::abs(det) < 1e-300)
        throw SingularFormError("Gaussian form is singular: |det Q| underflow");
    return det;
}

// Diagonal restriction K(x, x) = exp(p - q x^2 / 2 + l x) of a kernel.
struct DiagonalForm {
    Complex q;
    Complex l;
    Complex p;
};

DiagonalForm diagonal_form(const GaussianKernel& k) {
    return {k.quadForm.m11 + 2.0 * k.quadForm.m12 + k.quadForm.m22,
            k.linear.v1 + k.linear.v2, k.logPrefactor};
}

// Integrals of x^0, x^1, x^2 against the diagonal restriction.
struct DiagonalMoments {
    Complex i0, i1, i2;
};

DiagonalMoments diagonal_moments(const GaussianKernel& k) {
    const DiagonalForm d = diagonal_form(k);
    if (!(d.q.real() > 0.0))
        throw NonNormalizableError(
            "kernel diagonal is not integrable (Re q <= 0)");
    const Complex mu = d.l / d.q;
    const Complex i0 =
        std::sqrt(kTwoPi / d.q) * std::exp(d.p + 0.5 * d.l * d.l / d.q);
    return {i0, i0 * mu, i0 * (mu * mu + 1.0 / d.q)};
}

// Combined Gaussian weight of the product A(x,y) * B(y,x).
struct PairForm {
    ComplexSym2 Q;
    Vec2c V;
    Complex logP;
};

PairForm pair_form(const GaussianKernel& a, const GaussianKernel& b) {
    return {a.quadForm + b.quadForm.swapped(), a.linear + b.linear.swapped(),
            a.logPrefactor + b.logPrefactor};
}

// E[x], E[y], and second moments of the normalized combined weight.
struct PairMoments {
    Complex norm;  // exp(logP) * integral
    Complex ex, ey, exx, exy, eyy;
};

PairMoments pair_moments(const GaussianKernel& a, const GaussianKernel& b) {
    const PairForm pf = pair_form(a, b);
    const GaussianMoments m = gaussian_moments_2d(pf.Q, pf.V);
    PairMoments out;
    out.norm = std::exp(pf.logP + gaussian_log_integral_2d(pf.Q, pf.V));
    out.ex = m.mean.v1;
    out.ey = m.mean.v2;
    out.exx = m.mean.v1 * m.mean.v1 + m.covariance.m11;
    out.exy = m.mean.v1 * m.mean.v2 + m.covariance.m12;
    out.eyy = m.mean.v2 * m.mean.v2 + m.covariance.m22;
    return out;
}

double real_checked(Complex z, double tol, const char* what) {
    if (std::abs(z.imag()) > tol * std::max(1.0, std::abs(z.real())))
        throw ValidationError(std::string(what) +
                              ": imaginary residue exceeds tolerance");
    return z.real();
}

}  // namespace

Complex GaussianKernel::evaluate(double x, double y) const {
    const Complex quad = quadForm.m11 * x * x + 2.0 * quadForm.m12 * x * y +
                         quadForm.m22 * y * y;
    return std::exp(logPrefactor - 0.5 * quad + linear.v1 * x + linear.v2 * y);
}

GaussianKernel GaussianKernel::hermitianConjugate() const {
    GaussianKernel out;
    out.logPrefactor = std::conj(logPrefactor);
    out.quadForm = quadForm.swapped().conj();
    out.linear = {std::conj(linear.v2), std::conj(linear.v1)};
    return out;
}

Complex gaussian_integral_2d(const ComplexSym2& Q, const Vec2c& V) {
    require_re_positive_definite(Q);
    const Complex det = checked_det(Q);
    const Vec2c w = Q.inverse().apply(V);
    return kTwoPi / std::sqrt(det) * std::exp(0.5 * dot_sym(V, w));
}

Complex gaussian_log_integral_2d(const ComplexSym2& Q, const Vec2c& V) {
    require_re_positive_definite(Q);
    const Complex det = checked_det(Q);
    const Vec2c w = Q.inverse().apply(V);
    return std::log(kTwoPi) - 0.5 * std::log(det) + 0.5 * dot_sym(V, w);
}

GaussianMoments gaussian_moments_2d(const ComplexSym2& Q, const Vec2c& V) {
    require_re_positive_definite(Q);
    checked_det(Q);
    const ComplexSym2 inv = Q.inverse();
    return {gaussian_integral_2d(Q, V), inv.apply(V), inv};
}

Complex kernel_trace(const GaussianKernel& k) {
    const DiagonalForm d = diagonal_form(k);
    if (!(d.q.real() > 0.0))
        throw NonNormalizableError(
            "kernel diagonal is not integrable (Re q <= 0)");
    return std::sqrt(kTwoPi / d.q) * std::exp(d.p + 0.5 * d.l * d.l / d.q);
}

double trace_norm(const GaussianMixtureState& s) {
    Complex acc = 0.0;
    for (const GaussianKernel& k : s.kernels) acc += kernel_trace(k);
    return acc.real();
}

GaussianMixtureState normalized(const GaussianMixtureState& s) {
    const double t = trace_norm(s);
    if (!(t > 0.0))
        throw NonNormalizableError("state trace is not positive");
    GaussianMixtureState out = s;
    const double shift = std::log(t);
    for (GaussianKernel& k : out.kernels) k.logPrefactor -= shift;
    return out;
}

Complex hs_overlap_complex(const GaussianMixtureState& a,
                           const GaussianMixtureState& b) {
    Complex acc = 0.0;
    for (const GaussianKernel& ka : a.kernels)
        for (const GaussianKernel& kb : b.kernels) {
            const PairForm pf = pair_form(ka, kb);
            acc += std::exp(pf.logP + gaussian_log_integral_2d(pf.Q, pf.V));
        }
    return acc;
}

double hs_overlap(const GaussianMixtureState& a, const GaussianMixtureState& b,
                  double imagTol) {
    return real_checked(hs_overlap_complex(a, b), imagTol, "hs_overlap");
}

double purity(const GaussianMixtureState& s) { return hs_overlap(s, s); }

double position_mean(const GaussianMixtureState& s) {
    Complex i0 = 0.0, i1 = 0.0;
    for (const GaussianKernel& k : s.kernels) {
        const DiagonalMoments m = diagonal_moments(k);
        i0 += m.i0;
        i1 += m.i1;
    }
    return real_checked(i1 / i0, 1e-8, "position_mean");
}

double position_variance(const GaussianMixtureState& s) {
    Complex i0 = 0.0, i1 = 0.0, i2 = 0.0;
    for (const GaussianKernel& k : s.kernels) {
        const DiagonalMoments m = diagonal_moments(k);
        i0 += m.i0;
        i1 += m.i1;
        i2 += m.i2;
    }
    const Complex mean = i1 / i0;
    return real_checked(i2 / i0 - mean * mean, 1e-8, "position_variance");
}

double modified_position_variance(const GaussianMixtureState& s) {
    Complex num = 0.0, den = 0.0;
    for (const GaussianKernel& ka : s.kernels)
        for (const GaussianKernel& kb : s.kernels) {
            const PairMoments m = pair_moments(ka, kb);
            num += m.norm * (m.exx - m.exy);
            den += m.norm;
        }
    return real_checked(num / den, 1e-8, "modified_position_variance");
}

double modified_momentum_variance(const GaussianMixtureState& s, double hbar) {
    Complex num = 0.0, den = 0.0;
    for (const GaussianKernel& ka : s.kernels)
        for (const GaussianKernel& kb : s.kernels) {
            const PairMoments m = pair_moments(ka, kb);
            // L_A(x,y) = vA1 - a11 x - a12 y acting on the first slot of A;
            // L_B(y,x) = vB1 - b11 y - b12 x for the first slot of B.
            const Complex a0 = ka.linear.v1, a1 = -ka.quadForm.m11,
                          a2 = -ka.quadForm.m12;
            const Complex b0 = kb.linear.v1, b1 = -kb.quadForm.m12,
                          b2 = -kb.quadForm.m11;
            const Complex eLaLa =
                a0 * a0 + 2.0 * a0 * (a1 * m.ex + a2 * m.ey) +
                a1 * a1 * m.exx + 2.0 * a1 * a2 * m.exy + a2 * a2 * m.eyy;
            const Complex eLaLb =
                a0 * b0 + a0 * (b1 * m.ex + b2 * m.ey) +
                b0 * (a1 * m.ex + a2 * m.ey) + a1 * b1 * m.exx +
                (a1 * b2 + a2 * b1) * m.exy + a2 * b2 * m.eyy;
            // tr[p^2 rho^2] - tr[(p rho)^2] accumulated pairwise.
            num += -hbar * hbar * m.norm *
                   (eLaLa - ka.quadForm.m11 - eLaLb);
            den += m.norm;
        }
    return real_checked(num / den, 1e-8, "modified_momentum_variance");
}

Complex evaluate_state(const GaussianMixtureState& s, double x, double y) {
    Complex acc = 0.0;
    for (const GaussianKernel& k : s.kernels) acc += k.evaluate(x, y);
    return acc;
}

namespace {

bool kernels_close(const GaussianKernel& a, const GaussianKernel& b,
                   double tol) {
    auto close = [tol](Complex u, Complex v) {
        return std::abs(u - v) <= tol * std::max(1.0, std::abs(u));
    };
    return close(a.quadForm.m11, b.quadForm.m11) &&
           close(a.quadForm.m12, b.quadForm.m12) &&
           close(a.quadForm.m22, b.quadForm.m22) &&
           close(a.linear.v1, b.linear.v1) &&
           close(a.linear.v2, b.linear.v2) &&
           close(std::exp(a.logPrefactor), std::exp(b.logPrefactor));
}

}  // namespace

bool is_hermitian(const GaussianMixtureState& s, double tol) {
    std::vector<bool> used(s.kernels.size(), false);
    for (const GaussianKernel& k : s.kernels) {
        const GaussianKernel target = k.hermitianConjugate();
        bool found = false;
        for (std::size_t j = 0; j < s.kernels.size(); ++j) {
            if (used[j]) continue;
            if (kernels_close(target, s.kernels[j], tol)) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

void require_normalizable(const GaussianMixtureState& s) {
    for (const GaussianKernel& k : s.kernels)
        require_re_positive_definite(k.quadForm);
}

}  // namespace qbd
