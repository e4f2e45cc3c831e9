#pragma once

// Small least-squares helpers for reading power laws off log-log curves:
// straight-line fits, moving-window local slopes, plateau detection against
// a target slope, and fixed-slope intercepts.  All windows are index ranges
// [begin, end) into the input arrays.

#include <cstddef>
#include <optional>
#include <vector>

namespace qbd {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;  // root-mean-square residual
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                   std::size_t begin, std::size_t end);

/// Least-squares slope in a window of +-halfWidth points around each index
/// (shrunk near the edges).
std::vector<double> local_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y,
                                 int halfWidth = 3);

struct IndexWindow {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    std::size_t size() const { return end - begin; }
};

/// Longest contiguous run of indices in [searchBegin, searchEnd) whose local
/// slope lies within tol of target.
std::optional<IndexWindow> find_plateau(const std::vector<double>& slopes,
                                        double target, double tol,
                                        std::size_t minPoints,
                                        std::size_t searchBegin,
                                        std::size_t searchEnd);

/// Shrinks a plateau to the tightest slope tolerance (from `tols`, tried in
/// order) that still keeps minPoints; returns the original window if none do.
IndexWindow refine_plateau(const std::vector<double>& slopes, double target,
                           const IndexWindow& window,
                           const std::vector<double>& tols,
                           std::size_t minPoints);

/// Mean of (y - slope * x) over the window plus the rms residual about it.
struct InterceptFit {
    double intercept = 0.0;
    double rms = 0.0;
};
InterceptFit fixed_slope_intercept(const std::vector<double>& x,
                                   const std::vector<double>& y, double slope,
                                   const IndexWindow& window);

}  // namespace qbd
