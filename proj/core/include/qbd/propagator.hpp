#pragma once

// Exact propagation of Gaussian kernels under the master equation.
//
// The two-point propagator is Gaussian in (x0, y0; x, y), built from the
// classical fundamental solutions G1, G2 of  G'' + 2 gamma G' + w^2(t) G = 0
// (G1(0)=1, G1'(0)=0; G2(0)=0, G2'(0)=1) and three decoherence integrals
// over the bridge polynomials
//
//   B(s) = G2(s)/G2(t),   A(s) = G1(s) - G2(s) G1(t)/G2(t),
//   alpha = Int B^2 ds,    beta = Int A^2 ds,    eta = Int A B ds .
//
// Propagating exp(p - <X,M X>/2 + <v,X>) closes on the same family:
//
//   Q   = M + [[-2ik G1 + 2Da, -2Da], [-2Da, 2ik G1 + 2Da]]   (a = alpha)
//   Q0  =     [[-2ik G2' + 2Db, -2Db], [-2Db, 2ik G2' + 2Db]] (b = beta)
//   P   = [[-ik(1+g) - 2De, -ik(1-g) + 2De],
//          [ ik(1-g) + 2De,  ik(1+g) - 2De]]                  (e = eta)
//   M'  = Q0 - P^T Q^{-1} P,     v' = P^T Q^{-1} v,
//   p'  = p + log(m / (hbar G2)) - log(det Q)/2 + <v, Q^{-1} v>/2,
//
// with k = m / (2 hbar G2) and g(t) = exp(-2 gamma t) (minus the Wronskian
// of G1, G2).  For free expansion G1 = 1 and alpha/beta admit closed forms;
// they are used once the cancellation in those expressions is harmless and
// replaced by direct quadrature of the defining integrals otherwise.

#include <functional>

#include "qbd/bath.hpp"
#include "qbd/gaussian.hpp"
#include "qbd/ode.hpp"
#include "qbd/quadrature.hpp"

namespace qbd {

struct PropagatorCoefficients {
    double t = 0.0;
    double G1 = 1.0;
    double dotG1 = 0.0;
    double G2 = 0.0;
    double dotG2 = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    double eta = 0.0;
    double dissipation = 1.0;  // exp(-2 gamma t)
};

/// Coefficients for w = 0 (free expansion in the bath).  Closed forms where
/// they are numerically safe, defining-integral quadrature elsewhere.
PropagatorCoefficients free_expansion_coefficients(const BathParams& bath,
                                                   double t);

/// Dense classical fundamental solutions for a time-dependent stiffness
/// w^2(t), integrated once up to tMax and evaluated anywhere in [0, tMax].
class FundamentalSolution {
  public:
    FundamentalSolution(DenseOdeSolution solution, double gamma);

    struct Sample {
        double G1, dotG1, G2, dotG2;
    };
    Sample eval(double t) const;

    double gamma() const { return gamma_; }
    double tMax() const { return solution_.tEnd(); }

    /// | G1 G2' - G1' G2 - exp(-2 gamma t) | at t, a propagation-quality
    /// diagnostic (zero for the exact solution).
    double wronskianDefect(double t) const;

  private:
    DenseOdeSolution solution_;
    double gamma_;
};

FundamentalSolution classical_fundamental_solutions(
    const std::function<double(double)>& omegaSquared, double gamma,
    double tMax, const OdeOptions& opt = {});

/// Coefficients at time t from a dense fundamental solution (quadrature of
/// the defining integrals; works for any w(t) away from caustics G2 = 0).
/// The integrals are geometric, so no bath parameters enter here.
PropagatorCoefficients coefficients_from_fundamental(
    const FundamentalSolution& fs, double t);

/// Raw quadratic forms of the two-point propagator at time t (the Q, Q0, P
/// of the map above).  Exposed for the closed-form survival evaluation and
/// for cross-checks; requires G2 != 0.
struct PropagatorForms {
    ComplexSym2 inputForm;    // added to M_in to give Q
    ComplexSym2 outputForm;   // Q0
    Mat2c crossForm;          // P
    Complex logPrefactor;     // log(m / (hbar G2))
};
PropagatorForms propagator_forms(const BathParams& bath,
                                 const PropagatorCoefficients& pc);

/// Apply the exact propagator to every kernel of the state.  Throws
/// SingularFormError at caustics (G2 = 0 with t > 0) and NonNormalizableError
/// if an intermediate form loses positivity.  Trace preservation is checked
/// to 1e-9 relative.
GaussianMixtureState propagate_state(const GaussianMixtureState& state,
                                     const BathParams& bath,
                                     const PropagatorCoefficients& pc);

/// Spreading factor b(t) of an (a, c) Gaussian:  the evolved position
/// variance is  Var(t) = b(t)^2 / (2 (a - c))  with
/// b^2 = G1^2 + (hbar G2 / m)^2 (a - c) ((a + c) + 4 D alpha).
double scaling_factor(double a, double c, const BathParams& bath,
                      const PropagatorCoefficients& pc);

}  // namespace qbd
