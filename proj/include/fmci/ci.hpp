#pragma once

// Confidence intervals for the distinct count F0 from a sketch query.
//
// With a0 = 2^r0 c0 registers, p0 = 2^-r0 and lambda0 = ln 2, the interval
//   H_p0^{-1}(lambda0 Y - h_d) < F0 < H_p0^{-1}(lambda0 Y + h_u + 2^-z0)
// fails on the low side with probability at most
//   p_plus  = exp(-a0 [(h_d + gamma) t_+ - ln Gamma(1 - t_+)])
// and on the high side with probability at most
//   p_minus = exp(-a0 [(h_u - gamma) t_- - ln Gamma(1 + t_-)]).

#include "fmci/sketch.hpp"
#include "fmci/solvers.hpp"

#include <cstdint>
#include <variant>

namespace fmci::ci {

enum class Side { plus, minus };

struct HalfWidths {
    double h_d = 0.0;
    double h_u = 0.0;
};

struct TailProbs {
    double p_plus = 0.0;
    double p_minus = 0.0;
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;  // may be +inf
    double confidence = 0.0;
};

struct OneSidedUpper {
    double alpha;
};
struct OneSidedLower {
    double alpha;
};
// p_plus = split (1 - alpha), p_minus = (1 - split)(1 - alpha).
struct TwoSided {
    double alpha;
    double split = 0.5;
};
struct TwoSidedMinLen {
    double alpha;
};
using IntervalSpec = std::variant<OneSidedUpper, OneSidedLower, TwoSided, TwoSidedMinLen>;

double spec_alpha(const IntervalSpec& spec);

// Tail bound for half-width h > 0. Throws DomainError for h <= 0.
double tail_from_halfwidth(double h, double a0, Side side);

// Inverse of tail_from_halfwidth for p in (0,1).
double halfwidth_from_tail(double p, double a0, Side side);

// Half-widths and tails for a spec. The side an interval does not bound has
// h = 0 and tail 0.
struct Plan {
    HalfWidths h;
    TailProbs p;
};
Plan plan_interval(const IntervalSpec& spec, double a0);

struct MinLogLength {
    double x;    // p_plus at the optimum
    double h_d;
    double h_u;
    solvers::SolveReport report;
};

// Split p = p_plus + p_minus minimizing h_d + h_u, found as the root in
// (0, p) of f(x) = x t_+(h_d(x)) - (p - x) t_-(h_u(p - x)).
MinLogLength min_log_length(double p, double a0);

// f, f' and f'' of the stationarity condition above.
solvers::Derivatives min_log_length_stationarity(double x, double p, double a0);

struct IntervalResult {
    Interval interval;
    Plan plan;
    double mean_y = 0.0;
    double p0 = 0.0;
    double a0 = 0.0;
};

// Interval from a query. An upper endpoint whose H_p0 preimage overflows a
// double is reported as +inf.
IntervalResult interval(const sketch::QueryResult& q, const sketch::SketchParams& params,
                        const IntervalSpec& spec);

// Endpoints from a precomputed plan; used when many queries share one plan.
Interval interval_from_plan(double mean_y, const sketch::SketchParams& params, const Plan& plan,
                            double alpha);

}  // namespace fmci::ci
