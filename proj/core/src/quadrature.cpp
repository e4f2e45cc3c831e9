#include "qbd/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "qbd/errors.hpp"

namespace qbd {

namespace {

// Value and derivative of the Legendre polynomial P_n at x, by upward
// recurrence:  (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
struct LegendreEval {
    double p;
    double dp;
};

LegendreEval legendre(int n, double x) {
    double pPrev = 1.0;  // P_0
    double pCur = x;     // P_1
    if (n == 0) return {1.0, 0.0};
    for (int k = 1; k < n; ++k) {
        const double pNext = ((2 * k + 1) * x * pCur - k * pPrev) / (k + 1);
        pPrev = pCur;
        pCur = pNext;
    }
    // P_n' from the standard identity (1 - x^2) P_n' = n (P_{n-1} - x P_n).
    const double dp = n * (pPrev - x * pCur) / (1.0 - x * x);
    return {pCur, dp};
}

QuadratureRule build_rule(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev-based initial guess for the i-th root, then Newton.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        LegendreEval e{};
        for (int iter = 0; iter < 100; ++iter) {
            e = legendre(n, x);
            const double dx = e.p / e.dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                e = legendre(n, x);
                break;
            }
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * e.dp * e.dp);
    }
    return rule;
}

double panel_estimate(const std::function<double(double)>& f, double a,
                      double b, const QuadratureRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * acc;
}

struct PanelOutcome {
    double value;
    double error;
    bool converged;
};

PanelOutcome integrate_panel(const std::function<double(double)>& f, double a,
                             double b, const QuadratureRule& lo,
                             const QuadratureRule& hi,
                             const QuadratureOptions& opt, double scaleHint,
                             int depth) {
    const double coarse = panel_estimate(f, a, b, lo);
    const double fine = panel_estimate(f, a, b, hi);
    const double err = std::abs(fine - coarse);
    const double tol =
        std::max(opt.absTol, opt.relTol * std::max(std::abs(fine), scaleHint));
    if (err <= tol || !std::isfinite(err)) return {fine, err, std::isfinite(err)};
    if (depth >= opt.maxDepth) return {fine, err, false};
    const double mid = 0.5 * (a + b);
    const PanelOutcome left =
        integrate_panel(f, a, mid, lo, hi, opt, scaleHint, depth + 1);
    const PanelOutcome right =
        integrate_panel(f, mid, b, lo, hi, opt, scaleHint, depth + 1);
    return {left.value + right.value, left.error + right.error,
            left.converged && right.converged};
}

}  // namespace

const QuadratureRule& gauss_legendre_rule(int n) {
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opt) {
    if (a == b) return {0.0, 0.0, true};
    const QuadratureRule& lo = gauss_legendre_rule(opt.order);
    const QuadratureRule& hi = gauss_legendre_rule(2 * opt.order);
    // First pass at the whole interval to get a magnitude for relative
    // control, then the real adaptive pass anchored to that scale.
    const double rough = std::abs(panel_estimate(f, a, b, hi));
    const PanelOutcome out = integrate_panel(f, a, b, lo, hi, opt, rough, 0);
    return {out.value, out.error, out.converged};
}

double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& opt) {
    const QuadratureResult r = integrate_adaptive(f, a, b, opt);
    if (!r.converged)
        throw IntegrationFailureError(
            "adaptive quadrature failed to converge (error estimate " +
            std::to_string(r.errorEstimate) + ")");
    return r.value;
}

Complex integrate_2d_fixed(const std::function<Complex(double, double)>& f,
                           double ax, double bx, double ay, double by,
                           int order) {
    const QuadratureRule& rule = gauss_legendre_rule(order);
    const double midX = 0.5 * (ax + bx), halfX = 0.5 * (bx - ax);
    const double midY = 0.5 * (ay + by), halfY = 0.5 * (by - ay);
    Complex acc = 0.0;
    for (int i = 0; i < order; ++i) {
        const double x = midX + halfX * rule.nodes[i];
        Complex row = 0.0;
        for (int j = 0; j < order; ++j) {
            const double y = midY + halfY * rule.nodes[j];
            row += rule.weights[j] * f(x, y);
        }
        acc += rule.weights[i] * row;
    }
    return acc * (halfX * halfY);
}

}  // namespace qbd
