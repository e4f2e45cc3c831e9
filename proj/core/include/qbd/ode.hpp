#pragma once

// Adaptive Dormand-Prince 5(4) integrator with dense output.
//
// Deliberately small: the only client is the classical fundamental-solution
// system (G1, G1', G2, G2'), which is a linear 4-dimensional ODE, so the
// state type is a fixed array.  Dense output is cubic Hermite on accepted
// steps; with the default tolerances the interpolation error is well below
// 1e-10 relative, which is what the coefficient quadratures need.

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace qbd {

using OdeState = std::array<double, 4>;
using OdeRhs = std::function<void(double, const OdeState&, OdeState&)>;

struct OdeOptions {
    double relTol = 1e-11;
    double absTol = 1e-13;
    double initialStep = 0.0;  // 0 = choose automatically
    std::size_t maxSteps = 2'000'000;
};

class DenseOdeSolution {
  public:
    DenseOdeSolution(std::vector<double> times, std::vector<OdeState> values,
                     std::vector<OdeState> derivatives);

    /// Cubic Hermite evaluation; t is clamped to the integrated range.
    OdeState eval(double t) const;

    double tBegin() const { return times_.front(); }
    double tEnd() const { return times_.back(); }
    std::size_t steps() const { return times_.size() - 1; }

  private:
    std::vector<double> times_;
    std::vector<OdeState> values_;
    std::vector<OdeState> derivatives_;
};

/// Integrate y' = f(t, y) from t0 to t1 (t1 > t0).  Throws
/// IntegrationFailureError if the step count budget is exhausted or the step
/// size underflows.
DenseOdeSolution integrate_rk45(const OdeRhs& f, const OdeState& y0, double t0,
                                double t1, const OdeOptions& opt = {});

}  // namespace qbd
