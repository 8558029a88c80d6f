#include "fmci/ci.hpp"

#include "fmci/errors.hpp"
#include "fmci/specfun.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fmci::ci {
namespace {

using specfun::euler_gamma;
using specfun::ln2;

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("ci: alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

void require_a0(double a0) {
    if (!(a0 >= 1.0) || !std::isfinite(a0)) {
        throw DomainError("ci: a0 must be >= 1, got " + std::to_string(a0));
    }
}

void require_tail(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("ci: tail probability must lie in (0,1), got " + std::to_string(p));
    }
}

// t_+ at half-width h via u = 1 - t_+, and d t_+/dh = 1/psi_1(u).
struct TPlus {
    double t;
    double u;
};
TPlus t_plus_at(double h) {
    const double u = solvers::inv_digamma(-h - euler_gamma);
    return {1.0 - u, u};
}

}  // namespace

double spec_alpha(const IntervalSpec& spec) {
    return std::visit([](const auto& s) { return s.alpha; }, spec);
}

double tail_from_halfwidth(double h, double a0, Side side) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw DomainError("tail_from_halfwidth: h must be finite and > 0, got " +
                          std::to_string(h));
    }
    require_a0(a0);
    const double g = side == Side::plus ? solvers::g_plus(h) : solvers::g_minus(h);
    return std::exp(-a0 * g);
}

double halfwidth_from_tail(double p, double a0, Side side) {
    require_tail(p);
    require_a0(a0);
    const double y = -std::log(p) / a0;
    return side == Side::plus ? solvers::inv_alpha_plus(y) : solvers::inv_alpha_minus(y);
}

solvers::Derivatives min_log_length_stationarity(double x, double p, double a0) {
    const double h_d = halfwidth_from_tail(x, a0, Side::plus);
    const double h_u = halfwidth_from_tail(p - x, a0, Side::minus);
    const auto [tp, u] = t_plus_at(h_d);
    const double v = solvers::inv_digamma(h_u - euler_gamma);
    const double tm = v - 1.0;

    const double psi1_u = specfun::trigamma(u);
    const double psi1_v = specfun::trigamma(v);
    const double f = x * tp - (p - x) * tm;
    const double f1 = tp - 1.0 / (a0 * tp * psi1_u) + tm - 1.0 / (a0 * tm * psi1_v);

    // dt_+/dx and dt_-/dx through h_d(x) and h_u(p - x).
    const double dtp = -1.0 / (a0 * x * tp * psi1_u);
    const double dtm = 1.0 / (a0 * (p - x) * tm * psi1_v);
    // d/dt of 1/(a0 t psi_1(1 -+ t)).
    const double dq_plus =
        -(psi1_u - tp * specfun::tetragamma(u)) / (a0 * tp * tp * psi1_u * psi1_u);
    const double dq_minus =
        -(psi1_v + tm * specfun::tetragamma(v)) / (a0 * tm * tm * psi1_v * psi1_v);
    const double f2 = dtp * (1.0 - dq_plus) + dtm * (1.0 - dq_minus);
    return {f, f1, f2};
}

MinLogLength min_log_length(double p, double a0) {
    require_tail(p);
    require_a0(a0);
    const double eps = 1e-14 * p;
    solvers::SolveOptions opts;
    opts.start = 0.5 * p;
    auto eval = [p, a0](double x) { return min_log_length_stationarity(x, p, a0); };
    const auto report = solvers::halley_solve(eval, {eps, p - eps}, opts);
    const double x = report.root;
    return {x, halfwidth_from_tail(x, a0, Side::plus),
            halfwidth_from_tail(p - x, a0, Side::minus), report};
}

Plan plan_interval(const IntervalSpec& spec, double a0) {
    require_a0(a0);
    const double alpha = spec_alpha(spec);
    require_alpha(alpha);
    const double q = 1.0 - alpha;
    Plan plan;
    if (std::holds_alternative<OneSidedUpper>(spec)) {
        plan.p.p_minus = q;
        plan.h.h_u = halfwidth_from_tail(q, a0, Side::minus);
    } else if (std::holds_alternative<OneSidedLower>(spec)) {
        plan.p.p_plus = q;
        plan.h.h_d = halfwidth_from_tail(q, a0, Side::plus);
    } else if (const auto* two = std::get_if<TwoSided>(&spec)) {
        if (!(two->split > 0.0 && two->split < 1.0)) {
            throw DomainError("ci: split must lie in (0,1), got " + std::to_string(two->split));
        }
        plan.p.p_plus = two->split * q;
        plan.p.p_minus = q - plan.p.p_plus;
        plan.h.h_d = halfwidth_from_tail(plan.p.p_plus, a0, Side::plus);
        plan.h.h_u = halfwidth_from_tail(plan.p.p_minus, a0, Side::minus);
    } else {
        const auto m = min_log_length(q, a0);
        plan.p.p_plus = m.x;
        plan.p.p_minus = q - m.x;
        plan.h = {m.h_d, m.h_u};
    }
    return plan;
}

Interval interval_from_plan(double mean_y, const sketch::SketchParams& params, const Plan& plan,
                            double alpha) {
    const double p0 = std::ldexp(1.0, -static_cast<int>(params.r0));
    const double center = ln2 * mean_y;
    Interval out{0.0, std::numeric_limits<double>::infinity(), alpha};
    if (plan.p.p_plus > 0.0) {
        const double y = center - plan.h.h_d;
        out.lower = y > 0.0 ? solvers::inv_harmonic_p(p0, y) : 0.0;
    }
    if (plan.p.p_minus > 0.0) {
        const double y = center + plan.h.h_u + std::ldexp(1.0, -static_cast<int>(params.z0));
        try {
            out.upper = solvers::inv_harmonic_p(p0, y);
        } catch (const DomainError&) {
            // H_p0^{-1}(y) exceeds the double range; the bound is vacuous.
            out.upper = std::numeric_limits<double>::infinity();
        }
    }
    return out;
}

IntervalResult interval(const sketch::QueryResult& q, const sketch::SketchParams& params,
                        const IntervalSpec& spec) {
    sketch::validate(params);
    IntervalResult r;
    r.a0 = static_cast<double>(params.registers());
    r.p0 = std::ldexp(1.0, -static_cast<int>(params.r0));
    r.mean_y = q.mean;
    r.plan = plan_interval(spec, r.a0);
    r.interval = interval_from_plan(q.mean, params, r.plan, spec_alpha(spec));
    return r;
}

}  // namespace fmci::ci
