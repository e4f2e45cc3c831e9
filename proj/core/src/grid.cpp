#include "qbd/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <numbers>
#include <thread>

#include "qbd/errors.hpp"
#include "qbd/propagator.hpp"

namespace qbd {

namespace {

// FFTW planning is not thread-safe; execution of independent plans is.
std::mutex g_fftwPlanMutex;

void run_rows(int n, int threads, const std::function<void(int, int)>& work) {
    if (threads <= 1) {
        work(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(work, lo, hi);
    }
    for (std::thread& th : pool) th.join();
}

// Interpolation stencil for one anti-diagonal shift distance.
struct ShiftStencil {
    int k = 0;  // integer part of the displacement
    double w[4] = {0, 1, 0, 0};
};

ShiftStencil make_stencil(double d) {
    ShiftStencil s;
    s.k = static_cast<int>(std::floor(d));
    const double th = d - s.k;
    s.w[0] = -th * (th - 1.0) * (th - 2.0) / 6.0;
    s.w[1] = (th * th - 1.0) * (th - 2.0) / 2.0;
    s.w[2] = -th * (th + 1.0) * (th - 2.0) / 2.0;
    s.w[3] = th * (th * th - 1.0) / 6.0;
    return s;
}

class StrangStepper {
  public:
    StrangStepper(GridState& gs, const BathParams& bath,
                  const GridEvolutionOptions& opt)
        : gs_(gs), bath_(bath), opt_(opt), n_(gs.n) {
        scratch_.resize(static_cast<std::size_t>(n_) * n_);
        auto* data = reinterpret_cast<fftw_complex*>(gs_.rho.data());
        std::lock_guard<std::mutex> lock(g_fftwPlanMutex);
        // FFTW_ESTIMATE keeps planning deterministic and leaves the array
        // contents untouched.
        fwd_ = fftw_plan_dft_2d(n_, n_, data, data, FFTW_FORWARD,
                                FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(n_, n_, data, data, FFTW_BACKWARD,
                                FFTW_ESTIMATE);
        if (!fwd_ || !bwd_)
            throw UnstableStepError("grid: FFTW plan creation failed");
    }

    ~StrangStepper() {
        std::lock_guard<std::mutex> lock(g_fftwPlanMutex);
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    StrangStepper(const StrangStepper&) = delete;
    StrangStepper& operator=(const StrangStepper&) = delete;

    void step(double dt) {
        // A time-dependent potential invalidates the phase tables every step.
        if (dt != cachedDt_ || opt_.omegaSquared) {
            build_tables(dt);
            cachedDt_ = dt;
        }
        kinetic_half();
        pointwise_half();
        dilate(dt);
        pointwise_half();
        kinetic_half();
        gs_.t += dt;
    }

  private:
    void build_tables(double dt) {
        const double h = gs_.h();
        // Kinetic phases: exp(-i hbar dt kx^2 / (4 m)) per axis for a half
        // step (the x and y factors are conjugate).
        kinPhase_.resize(n_);
        const double kFund = std::numbers::pi / gs_.L;
        const double cK = bath_.hbar * dt / (4.0 * bath_.mass);
        for (int i = 0; i < n_; ++i) {
            const int m = i <= n_ / 2 ? i : i - n_;
            const double k = kFund * m;
            kinPhase_[i] = std::exp(Complex(0.0, -cK * k * k));
        }
        // Decoherence damping per u = x - y offset, for a half step.
        decoFactor_.resize(2 * n_ - 1);
        for (int u = -(n_ - 1); u <= n_ - 1; ++u) {
            const double du = u * h;
            decoFactor_[u + n_ - 1] = std::exp(-bath_.D * du * du * 0.5 * dt);
        }
        // Optional harmonic phase exp(-i m w^2 (x^2 - y^2) dt / (2 hbar))
        // as conjugate per-axis tables, half step.
        potPhase_.assign(n_, Complex(1.0, 0.0));
        if (opt_.omegaSquared) {
            const double w2 = opt_.omegaSquared(gs_.t + 0.5 * dt);
            const double cV = bath_.mass * w2 * 0.5 * dt / (2.0 * bath_.hbar);
            for (int i = 0; i < n_; ++i) {
                const double x = gs_.x(i);
                potPhase_[i] = std::exp(Complex(0.0, -cV * x * x));
            }
        }
        // Anti-diagonal dilation stencils per u offset for the full step.
        const double s = std::exp(-2.0 * bath_.gamma * dt);
        stencils_.resize(2 * n_ - 1);
        for (int u = -(n_ - 1); u <= n_ - 1; ++u)
            stencils_[u + n_ - 1] = make_stencil(u * (1.0 - s) / 2.0);
    }

    void kinetic_half() {
        fftw_execute(fwd_);
        const double norm = 1.0 / (static_cast<double>(n_) * n_);
        run_rows(n_, opt_.threads, [this, norm](int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                const Complex px = kinPhase_[i];
                Complex* row = gs_.rho.data() + static_cast<std::size_t>(i) * n_;
                for (int j = 0; j < n_; ++j)
                    row[j] *= px * std::conj(kinPhase_[j]) * norm;
            }
        });
        fftw_execute(bwd_);
    }

    void pointwise_half() {
        run_rows(n_, opt_.threads, [this](int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                Complex* row = gs_.rho.data() + static_cast<std::size_t>(i) * n_;
                const Complex px = potPhase_[i];
                for (int j = 0; j < n_; ++j)
                    row[j] *= decoFactor_[i - j + n_ - 1] * px *
                              std::conj(potPhase_[j]);
            }
        });
    }

    void dilate(double) {
        if (bath_.gamma == 0.0) return;
        const Complex* src = gs_.rho.data();
        Complex* dst = scratch_.data();
        run_rows(n_, opt_.threads, [this, src, dst](int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                Complex* out = dst + static_cast<std::size_t>(i) * n_;
                for (int j = 0; j < n_; ++j) {
                    const ShiftStencil& st = stencils_[i - j + n_ - 1];
                    Complex acc(0.0, 0.0);
                    for (int m = 0; m < 4; ++m) {
                        const int off = st.k + m - 1;
                        const int si = i - off;
                        const int sj = j + off;
                        if (si < 0 || si >= n_ || sj < 0 || sj >= n_) continue;
                        acc += st.w[m] *
                               src[static_cast<std::size_t>(si) * n_ + sj];
                    }
                    out[j] = acc;
                }
            }
        });
        // Copy back rather than swap: the FFTW plans are bound to the
        // original rho buffer.
        std::copy(scratch_.begin(), scratch_.end(), gs_.rho.begin());
    }

    GridState& gs_;
    const BathParams& bath_;
    const GridEvolutionOptions& opt_;
    int n_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
    double cachedDt_ = -1.0;
    std::vector<Complex> kinPhase_;
    std::vector<Complex> potPhase_;
    std::vector<double> decoFactor_;
    std::vector<ShiftStencil> stencils_;
    std::vector<Complex> scratch_;
};

void health_check(const GridState& gs, double traceRef, double traceTol,
                  double boundaryTol) {
    const double tr = grid_trace(gs);
    if (!std::isfinite(tr) ||
        std::abs(tr - traceRef) >
            traceTol * std::max(std::abs(traceRef), 1e-300))
        throw UnstableStepError(
            "grid: trace drifted or became non-finite at t = " +
            std::to_string(gs.t));
    if (boundary_ratio(gs) > boundaryTol)
        throw BoundaryLeakError(
            "grid: state reached the box boundary at t = " +
            std::to_string(gs.t));
}

}  // namespace

GridState discretize(const GaussianMixtureState& state, double L, int n) {
    if (!(L > 0.0) || n < 8)
        throw ValidationError("discretize: need L > 0 and n >= 8");
    GridState gs;
    gs.n = n;
    gs.L = L;
    gs.t = 0.0;
    gs.rho.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            gs.rho[static_cast<std::size_t>(i) * n + j] =
                evaluate_state(state, gs.x(i), gs.x(j));
    return gs;
}

double suggest_box_half_width(double a, double c, const BathParams& bath,
                              double tMax) {
    const double sigma0 = std::sqrt(1.0 / (2.0 * (a - c)));
    const PropagatorCoefficients pc =
        free_expansion_coefficients(bath, tMax);
    const double sigmaT = scaling_factor(a, c, bath, pc) * sigma0;
    return std::max(10.0 * sigma0, 4.5 * sigmaT);
}

void evolve_grid(GridState& gs, const BathParams& bath, double tTarget,
                 const GridEvolutionOptions& opt) {
    bath.validate();
    if (!(tTarget >= gs.t))
        throw ValidationError("evolve_grid: target time is in the past");
    if (tTarget == gs.t) return;

    double dtMax = opt.dtMax;
    if (dtMax <= 0.0) {
        // Kinetic-phase resolution bound plus damping resolution bound.
        dtMax = 0.1 * bath.mass * gs.h() * gs.h() / bath.hbar;
        if (bath.gamma > 0.0) dtMax = std::min(dtMax, 0.01 / bath.gamma);
    }
    const double dtMin = dtMax / 64.0;

    const double traceRef = grid_trace(gs);
    StrangStepper stepper(gs, bath, opt);
    int sinceCheck = 0;
    while (gs.t < tTarget) {
        double dt = std::clamp(gs.t / 30.0, dtMin, dtMax);
        dt = std::min(dt, tTarget - gs.t);
        stepper.step(dt);
        if (++sinceCheck >= opt.checkInterval) {
            health_check(gs, traceRef, opt.traceTol, opt.boundaryTol);
            sinceCheck = 0;
        }
    }
    health_check(gs, traceRef, opt.traceTol, opt.boundaryTol);
}

double grid_trace(const GridState& gs) {
    Complex acc(0.0, 0.0);
    for (int i = 0; i < gs.n; ++i)
        acc += gs.rho[static_cast<std::size_t>(i) * gs.n + i];
    return (acc * gs.h()).real();
}

double grid_overlap(const GridState& a, const GridState& b) {
    if (a.n != b.n || a.L != b.L)
        throw ValidationError("grid_overlap: incompatible grids");
    Complex acc(0.0, 0.0);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j)
            acc += a.rho[static_cast<std::size_t>(i) * a.n + j] *
                   b.rho[static_cast<std::size_t>(j) * b.n + i];
    return (acc * a.h() * a.h()).real();
}

double boundary_ratio(const GridState& gs) {
    double peak = 0.0, edge = 0.0;
    const int n = gs.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double m =
                std::abs(gs.rho[static_cast<std::size_t>(i) * n + j]);
            peak = std::max(peak, m);
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                edge = std::max(edge, m);
        }
    return peak > 0.0 ? edge / peak : 0.0;
}

double max_relative_deviation(const GridState& gs,
                              const GaussianMixtureState& reference) {
    double peak = 0.0;
    for (const Complex& z : gs.rho) peak = std::max(peak, std::abs(z));
    double worst = 0.0;
    for (int i = 0; i < gs.n; ++i)
        for (int j = 0; j < gs.n; ++j) {
            const Complex ref = evaluate_state(reference, gs.x(i), gs.x(j));
            const Complex got = gs.rho[static_cast<std::size_t>(i) * gs.n + j];
            worst = std::max(worst, std::abs(got - ref));
            peak = std::max(peak, std::abs(ref));
        }
    return peak > 0.0 ? worst / peak : 0.0;
}

namespace {

constexpr char kSnapshotMagic[4] = {'Q', 'B', 'D', 'G'};
constexpr std::uint32_t kSnapshotVersion = 1;

}  // namespace

void write_snapshot(const std::string& path, const GridState& gs) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ValidationError("write_snapshot: cannot open " + path);
    const std::uint32_t n = static_cast<std::uint32_t>(gs.n);
    bool ok = std::fwrite(kSnapshotMagic, 1, 4, f) == 4 &&
              std::fwrite(&kSnapshotVersion, sizeof kSnapshotVersion, 1, f) == 1 &&
              std::fwrite(&n, sizeof n, 1, f) == 1 &&
              std::fwrite(&gs.L, sizeof gs.L, 1, f) == 1 &&
              std::fwrite(&gs.t, sizeof gs.t, 1, f) == 1 &&
              std::fwrite(gs.rho.data(), sizeof(Complex), gs.rho.size(), f) ==
                  gs.rho.size();
    ok = std::fclose(f) == 0 && ok;
    if (!ok) throw ValidationError("write_snapshot: short write to " + path);
}

GridState read_snapshot(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw ValidationError("read_snapshot: cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, n = 0;
    GridState gs;
    bool ok = std::fread(magic, 1, 4, f) == 4 &&
              std::memcmp(magic, kSnapshotMagic, 4) == 0 &&
              std::fread(&version, sizeof version, 1, f) == 1 &&
              version == kSnapshotVersion &&
              std::fread(&n, sizeof n, 1, f) == 1 && n >= 8 && n <= 1 << 15 &&
              std::fread(&gs.L, sizeof gs.L, 1, f) == 1 &&
              std::fread(&gs.t, sizeof gs.t, 1, f) == 1;
    if (ok) {
        gs.n = static_cast<int>(n);
        gs.rho.resize(static_cast<std::size_t>(n) * n);
        ok = std::fread(gs.rho.data(), sizeof(Complex), gs.rho.size(), f) ==
             gs.rho.size();
    }
    std::fclose(f);
    if (!ok) throw ValidationError("read_snapshot: bad snapshot " + path);
    return gs;
}

}  // namespace qbd
