#include "fmci/solvers.hpp"

#include "fmci/bounds.hpp"
#include "fmci/errors.hpp"
#include "fmci/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fmci::solvers {
namespace {

using specfun::euler_gamma;

constexpr double kTiny = 1e-300;
// psi(1/2) and psi(3/2).
constexpr double kPsiHalf = -euler_gamma - 2.0 * std::numbers::ln2;
constexpr double kPsiThreeHalves = 2.0 - euler_gamma - 2.0 * std::numbers::ln2;

bool same_sign(double a, double b) { return (a < 0.0) == (b < 0.0); }

// Widen a closed-form enclosure so that rounding cannot push the root
// outside it. Besides a few ulps for the formulas themselves, a function of
// size ~ |y| carries an absolute error ~ |y| eps; for psi and H_p, whose
// slope is ~ 1/x, that is a relative error ~ |y| eps in the root.
Bracket pad(double lo, double hi, double floor, double y = 0.0) {
    const double rel = (8.0 + 4.0 * std::abs(y)) * std::numeric_limits<double>::epsilon();
    lo = lo - std::abs(lo) * rel;
    hi = hi + std::abs(hi) * rel + std::numeric_limits<double>::denorm_min();
    return {std::max(lo, floor), hi};
}

void require_finite(double y, const char* fn) {
    if (!std::isfinite(y)) {
        throw DomainError(std::string(fn) + ": argument must be finite");
    }
}

void require_positive(double y, const char* fn) {
    if (!(y > 0.0) || !std::isfinite(y)) {
        throw DomainError(std::string(fn) + ": argument must be finite and > 0, got " +
                          std::to_string(y));
    }
}

double geometric_mean(Bracket b) { return std::sqrt(b.lo * b.hi); }

}  // namespace

SolveReport halley_solve(const TripleEvaluator& f, Bracket bracket, const SolveOptions& opts) {
    double lo = bracket.lo;
    double hi = bracket.hi;
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("halley_solve: invalid bracket [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    }
    double f_lo = f(lo).f;
    const double f_hi = f(hi).f;
    if (f_lo == 0.0) return {lo, 0, SolveMethod::bisection, 0.0};
    if (f_hi == 0.0) return {hi, 0, SolveMethod::bisection, 0.0};
    const bool sign_change = !same_sign(f_lo, f_hi);

    double x = opts.start.value_or(0.5 * (lo + hi));
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

    bool used_halley = false;
    bool used_bisection = false;
    auto method = [&] {
        if (used_halley && used_bisection) return SolveMethod::halley_then_bisection;
        return used_bisection ? SolveMethod::bisection : SolveMethod::halley;
    };

    double best = x;
    double best_residual = std::numeric_limits<double>::infinity();
    double prev_abs_f = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iter; ++it) {
        const Derivatives d = f(x);
        if (!std::isfinite(d.f)) {
            throw ConvergenceError("halley_solve: non-finite function value", best);
        }
        if (std::abs(d.f) < best_residual) {
            best_residual = std::abs(d.f);
            best = x;
        }
        if (std::abs(d.f) <= opts.tol) return {x, it - 1, method(), d.f};

        if (sign_change) {
            if (same_sign(d.f, f_lo)) {
                lo = x;
                f_lo = d.f;
            } else {
                hi = x;
            }
        }

        const double denom = 2.0 * d.d1 * d.d1 - d.f * d.d2;
        double next = x - 2.0 * d.f * d.d1 / denom;
        // Halley steps that fail to halve the residual are replaced by
        // bisection, which bounds the damage of a poor f''.
        const bool stalled = sign_change && std::abs(d.f) > 0.5 * prev_abs_f;
        prev_abs_f = std::abs(d.f);
        if (stalled || !std::isfinite(next) || !(next > lo && next < hi)) {
            if (!sign_change) {
                // Without a sign change there is nothing to bisect; stay inside.
                next = std::isfinite(next) ? std::clamp(next, lo, hi) : 0.5 * (lo + hi);
            } else {
                next = 0.5 * (lo + hi);
            }
            used_bisection = true;
        } else {
            used_halley = true;
        }

        const double scale = std::max(1.0, std::abs(x));
        const bool tiny_step = std::abs(next - x) <= opts.tol * scale;
        const bool tiny_bracket = sign_change && (hi - lo) <= opts.tol * scale;
        if (tiny_step || tiny_bracket || next == x) {
            return {next, it, method(), f(next).f};
        }
        x = next;
    }
    throw ConvergenceError("halley_solve: no convergence after " + std::to_string(opts.max_iter) +
                               " iterations",
                           best);
}

SolveReport bisection_solve(const std::function<double(double)>& f, Bracket bracket,
                            int max_iter) {
    double lo = bracket.lo;
    double hi = bracket.hi;
    double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo == 0.0) return {lo, 0, SolveMethod::bisection, 0.0};
    if (f_hi == 0.0) return {hi, 0, SolveMethod::bisection, 0.0};
    if (same_sign(f_lo, f_hi)) {
        throw DomainError("bisection_solve: bracket has no sign change");
    }
    int it = 0;
    while (it < max_iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ++it;
        const double fm = f(mid);
        if (fm == 0.0) return {mid, it, SolveMethod::bisection, 0.0};
        if (same_sign(fm, f_lo)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    return {root, it, SolveMethod::bisection, f(root)};
}

Bracket digamma_bracket(double y) {
    require_finite(y, "digamma_bracket");
    if (y < kPsiHalf) {
        // Root below 1/2: 1/x = psi(x+1) - y with psi(x+1) in (-gamma, psi(3/2)).
        return pad(1.0 / (kPsiThreeHalves - y), std::min(0.5, 1.0 / (-euler_gamma - y)), kTiny, y);
    }
    const auto e = bounds::digamma_root(y);
    if (y <= std::log(0.5)) return pad(kTiny, e.hi, kTiny, y);
    return pad(e.lo, e.hi, kTiny, y);
}

Bracket harmonic_p_bracket(double p, double y) {
    const auto e = bounds::harmonic_p_root(p, y);
    if (!std::isfinite(e.hi)) {
        throw DomainError("harmonic_p_bracket: H_p^{-1}(" + std::to_string(y) +
                          ") is not representable");
    }
    return pad(std::max(e.lo, 0.0), e.hi, 0.0, y);
}

Bracket alpha_minus_bracket(double y) {
    require_positive(y, "alpha_minus_bracket");
    const auto e = bounds::alpha_minus_root(y);
    return pad(e.lo, e.hi, kTiny);
}

Bracket alpha_plus_bracket(double y) {
    require_positive(y, "alpha_plus_bracket");
    const auto e = bounds::alpha_plus_root(y);
    return pad(e.lo, e.hi, kTiny);
}

SolveReport solve_inv_digamma(double y, const SolveOptions& opts) {
    require_finite(y, "inv_digamma");
    const Bracket b = digamma_bracket(y);
    auto eval = [y](double x) -> Derivatives {
        return {specfun::digamma(x) - y, specfun::trigamma(x), specfun::tetragamma(x)};
    };
    return halley_solve(eval, b, opts);
}

double inv_digamma(double y) { return solve_inv_digamma(y).root; }

SolveReport solve_inv_harmonic_p(double p, double y, const SolveOptions& opts) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw DomainError("inv_harmonic_p: p must lie in (0,1], got " + std::to_string(p));
    }
    if (!(y >= 0.0) || !std::isfinite(y)) {
        throw DomainError("inv_harmonic_p: y must be finite and >= 0, got " + std::to_string(y));
    }
    if (y == 0.0) return {0.0, 0, SolveMethod::halley, 0.0};
    const Bracket b = harmonic_p_bracket(p, y);
    auto eval = [p, y](double x) -> Derivatives {
        const auto h = specfun::harmonic_p_with_derivatives(p, x);
        return {h.value - y, h.d1, h.d2};
    };
    return halley_solve(eval, b, opts);
}

double inv_harmonic_p(double p, double y) { return solve_inv_harmonic_p(p, y).root; }

double t_minus(double x) { return inv_digamma(x - euler_gamma) - 1.0; }

double g_minus(double x) {
    const double v = inv_digamma(x - euler_gamma);  // 1 + t_-
    return (x - euler_gamma) * (v - 1.0) - specfun::ln_gamma(v);
}

double t_plus(double x) { return 1.0 - inv_digamma(-x - euler_gamma); }

double g_plus(double x) {
    const double u = inv_digamma(-x - euler_gamma);  // 1 - t_+
    return (x + euler_gamma) * (1.0 - u) - specfun::ln_gamma(u);
}

SolveReport solve_inv_alpha_minus(double y, const SolveOptions& opts) {
    require_positive(y, "inv_alpha_minus");
    const Bracket b = alpha_minus_bracket(y);
    auto eval = [y](double x) -> Derivatives {
        const double v = inv_digamma(x - euler_gamma);
        const double t = v - 1.0;
        const double g = (x - euler_gamma) * t - specfun::ln_gamma(v);
        return {g - y, t, 1.0 / specfun::trigamma(v)};
    };
    SolveOptions o = opts;
    if (!o.start) o.start = geometric_mean(b);
    return halley_solve(eval, b, o);
}

double inv_alpha_minus(double y) { return solve_inv_alpha_minus(y).root; }

SolveReport solve_inv_alpha_plus(double y, const SolveOptions& opts) {
    require_positive(y, "inv_alpha_plus");
    const Bracket b = alpha_plus_bracket(y);
    auto eval = [y](double x) -> Derivatives {
        const double u = inv_digamma(-x - euler_gamma);
        const double t = 1.0 - u;
        const double g = (x + euler_gamma) * t - specfun::ln_gamma(u);
        return {g - y, t, 1.0 / specfun::trigamma(u)};
    };
    SolveOptions o = opts;
    if (!o.start) o.start = geometric_mean(b);
    return halley_solve(eval, b, o);
}

double inv_alpha_plus(double y) { return solve_inv_alpha_plus(y).root; }

}  // namespace fmci::solvers
