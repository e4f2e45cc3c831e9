#include "qbd/fitting.hpp"

#include <algorithm>
#include <cmath>

#include "qbd/errors.hpp"

namespace qbd {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                   std::size_t begin, std::size_t end) {
    if (end > x.size() || end > y.size() || end - begin < 2)
        throw ValidationError("fit_line: bad window");
    const std::size_t n = end - begin;
    double sx = 0, sy = 0;
    for (std::size_t i = begin; i < end; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = begin; i < end; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw ValidationError("fit_line: degenerate abscissas");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = begin; i < end; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

std::vector<double> local_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y, int halfWidth) {
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo =
            i >= static_cast<std::size_t>(halfWidth) ? i - halfWidth : 0;
        const std::size_t hi = std::min(n, i + halfWidth + 1);
        out[i] = fit_line(x, y, lo, hi).slope;
    }
    return out;
}

std::optional<IndexWindow> find_plateau(const std::vector<double>& slopes,
                                        double target, double tol,
                                        std::size_t minPoints,
                                        std::size_t searchBegin,
                                        std::size_t searchEnd) {
    searchEnd = std::min(searchEnd, slopes.size());
    IndexWindow best{0, 0};
    std::size_t runBegin = searchBegin;
    bool inRun = false;
    for (std::size_t i = searchBegin; i <= searchEnd; ++i) {
        const bool ok =
            i < searchEnd && std::abs(slopes[i] - target) <= tol;
        if (ok && !inRun) {
            runBegin = i;
            inRun = true;
        } else if (!ok && inRun) {
            if (i - runBegin > best.size()) best = {runBegin, i};
            inRun = false;
        }
    }
    if (best.size() < minPoints) return std::nullopt;
    return best;
}

IndexWindow refine_plateau(const std::vector<double>& slopes, double target,
                           const IndexWindow& window,
                           const std::vector<double>& tols,
                           std::size_t minPoints) {
    for (const double tol : tols) {
        const auto sub =
            find_plateau(slopes, target, tol, minPoints, window.begin,
                         window.end);
        if (sub) return *sub;
    }
    return window;
}

InterceptFit fixed_slope_intercept(const std::vector<double>& x,
                                   const std::vector<double>& y, double slope,
                                   const IndexWindow& window) {
    if (window.end > x.size() || window.size() < 1)
        throw ValidationError("fixed_slope_intercept: bad window");
    double acc = 0.0;
    for (std::size_t i = window.begin; i < window.end; ++i)
        acc += y[i] - slope * x[i];
    InterceptFit f;
    f.intercept = acc / window.size();
    double ss = 0.0;
    for (std::size_t i = window.begin; i < window.end; ++i) {
        const double r = y[i] - slope * x[i] - f.intercept;
        ss += r * r;
    }
    f.rms = std::sqrt(ss / window.size());
    return f;
}

}  // namespace qbd
