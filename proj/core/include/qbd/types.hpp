#pragma once

// Small complex linear-algebra value types used throughout the library.
//
// Everything here acts on the two-dimensional coordinate pair X = (x, y) of a
// density-matrix kernel rho(x, y).  All bilinear forms use the *symmetric*
// product <u, v> = u^T v (no complex conjugation); that convention is what
// makes the analytic continuation of the Gaussian integral formulas valid for
// complex symmetric matrices.

#include <cmath>
#include <complex>

namespace qbd {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

/// Two-component complex vector (coefficients of x and y).
struct Vec2c {
    Complex v1{0.0, 0.0};
    Complex v2{0.0, 0.0};

    Vec2c operator+(const Vec2c& o) const { return {v1 + o.v1, v2 + o.v2}; }
    Vec2c operator-(const Vec2c& o) const { return {v1 - o.v1, v2 - o.v2}; }
    Vec2c operator*(Complex s) const { return {s * v1, s * v2}; }
    /// Components exchanged: the linear part of a kernel with x and y swapped.
    Vec2c swapped() const { return {v2, v1}; }
};

/// Symmetric product <u, v> = u1 v1 + u2 v2 (no conjugation).
inline Complex dot_sym(const Vec2c& u, const Vec2c& v) {
    return u.v1 * v.v1 + u.v2 * v.v2;
}

/// Complex symmetric 2x2 matrix [[m11, m12], [m12, m22]].
struct ComplexSym2 {
    Complex m11{0.0, 0.0};
    Complex m12{0.0, 0.0};
    Complex m22{0.0, 0.0};

    ComplexSym2 operator+(const ComplexSym2& o) const {
        return {m11 + o.m11, m12 + o.m12, m22 + o.m22};
    }
    ComplexSym2 operator-(const ComplexSym2& o) const {
        return {m11 - o.m11, m12 - o.m12, m22 - o.m22};
    }
    ComplexSym2 operator*(Complex s) const { return {s * m11, s * m12, s * m22}; }

    Complex det() const { return m11 * m22 - m12 * m12; }
    Complex trace() const { return m11 + m22; }

    /// Inverse; caller is responsible for checking det() away from zero.
    ComplexSym2 inverse() const {
        const Complex d = det();
        return {m22 / d, -m12 / d, m11 / d};
    }

    /// M X for X = (x, y).
    Vec2c apply(const Vec2c& x) const {
        return {m11 * x.v1 + m12 * x.v2, m12 * x.v1 + m22 * x.v2};
    }

    /// <X, M X>.
    Complex quad(const Vec2c& x) const { return dot_sym(x, apply(x)); }

    /// Index swap x <-> y: [[m22, m12], [m12, m11]].
    ComplexSym2 swapped() const { return {m22, m12, m11}; }

    /// Entrywise complex conjugate.
    ComplexSym2 conj() const {
        return {std::conj(m11), std::conj(m12), std::conj(m22)};
    }

    /// Smaller eigenvalue of the real part (a real symmetric 2x2 matrix).
    double real_min_eigenvalue() const {
        const double a = m11.real(), b = m12.real(), c = m22.real();
        const double tr = a + c;
        const double disc = std::sqrt((a - c) * (a - c) + 4.0 * b * b);
        return 0.5 * (tr - disc);
    }
};

/// General (not necessarily symmetric) complex 2x2 matrix.  Used for the
/// boundary-coupling block of the propagator, which is only
/// conjugate-symmetric, not symmetric.
struct Mat2c {
    Complex a11{0.0, 0.0}, a12{0.0, 0.0};
    Complex a21{0.0, 0.0}, a22{0.0, 0.0};

    Vec2c apply(const Vec2c& x) const {
        return {a11 * x.v1 + a12 * x.v2, a21 * x.v1 + a22 * x.v2};
    }
    Vec2c apply_transposed(const Vec2c& x) const {
        return {a11 * x.v1 + a21 * x.v2, a12 * x.v1 + a22 * x.v2};
    }
};

/// A^T S A for symmetric S; the result is symmetric again.
inline ComplexSym2 congruence_transposed(const Mat2c& a, const ComplexSym2& s) {
    // columns of A
    const Vec2c c1{a.a11, a.a21}, c2{a.a12, a.a22};
    const Vec2c s1 = s.apply(c1), s2 = s.apply(c2);
    return {dot_sym(c1, s1), dot_sym(c1, s2), dot_sym(c2, s2)};
}

}  // namespace qbd
