#pragma once

// Bracketed scalar root finding: safeguarded Halley iteration with a
// bisection fallback, the certified brackets for the four inverse problems
// the interval engine needs, and the inverses themselves.

#include <functional>
#include <optional>

namespace fmci::solvers {

struct Bracket {
    double lo;
    double hi;
};

enum class SolveMethod { halley, bisection, halley_then_bisection };

struct SolveReport {
    double root = 0.0;
    int iterations = 0;
    SolveMethod method = SolveMethod::halley;
    double residual = 0.0;
};

// Value, first and second derivative of the target function at a point.
struct Derivatives {
    double f;
    double d1;
    double d2;
};

using TripleEvaluator = std::function<Derivatives(double)>;

struct SolveOptions {
    double tol = 1e-12;
    int max_iter = 100;
    std::optional<double> start;  // default: bracket midpoint
};

/// Halley's iteration x <- x - 2 f f' / (2 f'^2 - f f''), safeguarded by the
/// sign-change bracket: any step that is non-finite or leaves the current
/// bracket is replaced by a bisection step. Stops when |f| <= tol or the
/// step is below tol * max(1, |x|). Throws ConvergenceError after max_iter.
SolveReport halley_solve(const TripleEvaluator& f, Bracket bracket, const SolveOptions& opts = {});

/// Plain bisection on a sign-change bracket, run until the bracket stops
/// shrinking in floating point.
SolveReport bisection_solve(const std::function<double(double)>& f, Bracket bracket,
                            int max_iter = 2000);

// Certified enclosures of each inverse problem's root.
Bracket digamma_bracket(double y);
Bracket harmonic_p_bracket(double p, double y);
Bracket alpha_minus_bracket(double y);
Bracket alpha_plus_bracket(double y);

// psi^{-1}(y).
double inv_digamma(double y);
SolveReport solve_inv_digamma(double y, const SolveOptions& opts = {});

// H_p^{-1}(y), p in (0,1], y >= 0.
double inv_harmonic_p(double p, double y);
SolveReport solve_inv_harmonic_p(double p, double y, const SolveOptions& opts = {});

// t_-(x) = psi^{-1}(x - gamma) - 1 and g_-(x) = (x - gamma) t_- - ln Gamma(1 + t_-),
// the maximum over t > 0 of (x - gamma) t - ln Gamma(1 + t).
double t_minus(double x);
double g_minus(double x);
// t_+(x) = 1 - psi^{-1}(-x - gamma) and g_+(x) = (x + gamma) t_+ - ln Gamma(1 - t_+),
// the maximum over t in (0,1) of (x + gamma) t - ln Gamma(1 - t).
double t_plus(double x);
double g_plus(double x);

// Solve g_-(x) = y and g_+(x) = y for x > 0, y > 0.
double inv_alpha_minus(double y);
SolveReport solve_inv_alpha_minus(double y, const SolveOptions& opts = {});
double inv_alpha_plus(double y);
SolveReport solve_inv_alpha_plus(double y, const SolveOptions& opts = {});

}  // namespace fmci::solvers
