#pragma once

// Independent grid integrator for the master equation, used to cross-check
// the closed-form propagator.  Works on the sampled density matrix
// rho(x_i, x_j) on a square box [-L, L)^2 and advances it with Strang
// splitting:
//
//   kinetic half-step   exact in Fourier space (spectral),
//   potential/decoherence half-step   exact pointwise multipliers,
//   damping full step   exact dilation of the difference coordinate,
//   then the mirror half-steps.
//
// Every substep is exact for its own generator, so the only errors are the
// splitting commutators, spatial discretization, and box truncation -- all
// independent of the closed-form algebra being verified.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qbd/bath.hpp"
#include "qbd/gaussian.hpp"

namespace qbd {

struct GridState {
    int n = 0;        // points per axis
    double L = 0.0;   // box half-width
    double t = 0.0;   // evolution time reached
    std::vector<Complex> rho;  // row-major, rho[i * n + j] = rho(x_i, x_j)

    double h() const { return 2.0 * L / n; }
    double x(int i) const { return -L + h() * i; }
};

/// Sample a kernel state on the grid.
GridState discretize(const GaussianMixtureState& state, double L, int n);

/// Box heuristic for free expansion of an (a, c) Gaussian up to tMax:
/// generous multiple of the initial width, and enough room for the
/// predicted spread so the Fourier representation stays contained.
double suggest_box_half_width(double a, double c, const BathParams& bath,
                              double tMax);

struct GridEvolutionOptions {
    double dtMax = 0.0;    // 0 = derive from the grid and bath
    int threads = 1;       // row-parallel pointwise work
    double boundaryTol = 1e-6;  // max boundary |rho| / max |rho|
    double traceTol = 0.01;     // allowed |trace - trace(0)| drift
    int checkInterval = 64;     // steps between health checks
    std::function<double(double)> omegaSquared;  // optional potential
};

/// Advance the state in place to tTarget.  The step size ramps as t/30
/// between dtMax/64 and dtMax, which keeps the splitting error below the
/// discretization floor for the validation regimes.  Throws
/// UnstableStepError on non-finite data or trace drift, and
/// BoundaryLeakError when the box stops containing the state.
void evolve_grid(GridState& gs, const BathParams& bath, double tTarget,
                 const GridEvolutionOptions& opt = {});

/// Discrete trace  h * sum_i rho(x_i, x_i)  (real part).
double grid_trace(const GridState& gs);

/// Discrete tr[A B] = h^2 sum_ij A(x_i, x_j) B(x_j, x_i)  (real part).
double grid_overlap(const GridState& a, const GridState& b);

/// max |rho| on the outermost ring divided by max |rho| overall.
double boundary_ratio(const GridState& gs);

/// Largest pointwise deviation from the sampled kernel state, relative to
/// the largest magnitude of the reference.
double max_relative_deviation(const GridState& gs,
                              const GaussianMixtureState& reference);

/// Binary snapshot I/O (magic "QBDG", version, n, L, t, row-major complex
/// doubles, little-endian).
void write_snapshot(const std::string& path, const GridState& gs);
GridState read_snapshot(const std::string& path);

}  // namespace qbd
