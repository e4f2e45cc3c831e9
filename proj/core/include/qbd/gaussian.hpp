#pragma once

// Gaussian kernel algebra for position-representation density matrices.
//
// A kernel is K(x, y) = exp( p - (1/2) <X, M X> + <v, X> ),  X = (x, y),
// with complex symmetric 2x2 form M, complex vector v and complex log-
// prefactor p.  States are finite sums of kernels (mixtures); Hermiticity
// means the set is closed under K(x,y) -> conj(K(y,x)).
//
// Every functional here reduces to the closed-form Gaussian integral
//   I(Q, V) = (2 pi / sqrt(det Q)) exp( (1/2) <V, Q^{-1} V> ),
// valid when Re Q is positive definite; principal branches are safe there
// because every eigenvalue of Q has positive real part.

#include <vector>

#include "qbd/types.hpp"

namespace qbd {

struct GaussianKernel {
    Complex logPrefactor{0.0, 0.0};
    ComplexSym2 quadForm{};  // M
    Vec2c linear{};          // v

    Complex evaluate(double x, double y) const;

    /// K*(y, x): swap arguments and conjugate everything.
    GaussianKernel hermitianConjugate() const;
};

struct GaussianMixtureState {
    std::vector<GaussianKernel> kernels;
};

/// Closed-form integral of exp(-(1/2)<X,QX> + <V,X>) over the plane.
/// Throws NonNormalizableError when Re Q is not positive definite and
/// SingularFormError when det Q underflows.
Complex gaussian_integral_2d(const ComplexSym2& Q, const Vec2c& V);

/// log of the integral above (principal branch), useful when the value
/// itself would overflow or underflow.
Complex gaussian_log_integral_2d(const ComplexSym2& Q, const Vec2c& V);

/// First and second moments of the (complex) Gaussian weight
/// exp(-(1/2)<X,QX> + <V,X>), normalized by its integral:
/// mean = Q^{-1} V, covariance = Q^{-1}.
struct GaussianMoments {
    Complex norm;  // the integral itself
    Vec2c mean;
    ComplexSym2 covariance;
};
GaussianMoments gaussian_moments_2d(const ComplexSym2& Q, const Vec2c& V);

/// tr rho = Integral of the diagonal K(x, x).
Complex kernel_trace(const GaussianKernel& k);
double trace_norm(const GaussianMixtureState& s);

/// Scales all kernels so that trace_norm becomes one.
GaussianMixtureState normalized(const GaussianMixtureState& s);

/// tr[A B] for Hermitian A, B written as double integrals of kernel
/// products.  The imaginary residue is checked against `imagTol`.
double hs_overlap(const GaussianMixtureState& a, const GaussianMixtureState& b,
                  double imagTol = 1e-9);
Complex hs_overlap_complex(const GaussianMixtureState& a,
                           const GaussianMixtureState& b);

/// tr[rho^2].
double purity(const GaussianMixtureState& s);

/// <x> and <x^2> - <x>^2 along the diagonal, assuming unit trace is NOT
/// required (they are ratios of diagonal integrals).
double position_mean(const GaussianMixtureState& s);
double position_variance(const GaussianMixtureState& s);

/// Coherence-weighted spread   0.5 tr[ [x,[x,rho]] rho ] / tr[rho^2]
/// = ( tr[x^2 rho^2] - tr[(x rho)^2] ) / tr[rho^2]   (the (1/2)(x-y)^2
/// moment of |rho|^2).  Drives the decoherence rate.
double modified_position_variance(const GaussianMixtureState& s);

/// Same construction in momentum:  ( tr[p^2 rho^2] - tr[(p rho)^2] ) / tr[rho^2].
double modified_momentum_variance(const GaussianMixtureState& s, double hbar);

Complex evaluate_state(const GaussianMixtureState& s, double x, double y);

/// True when conjugate-swapping every kernel reproduces the same state up to
/// reordering (matched greedily within `tol`).
bool is_hermitian(const GaussianMixtureState& s, double tol = 1e-10);

/// Validates Re(quadForm) positive definiteness for every kernel; throws
/// NonNormalizableError otherwise.
void require_normalizable(const GaussianMixtureState& s);

}  // namespace qbd
