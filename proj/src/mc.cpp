#include "fmci/mc.hpp"

#include "fmci/errors.hpp"
#include "fmci/hashing.hpp"
#include "fmci/specfun.hpp"
#include "summation.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace fmci::mc {
namespace {

using ci::Side;
using specfun::euler_gamma;
using specfun::ln2;

// Up to this occupancy the product is evaluated term by term.
constexpr std::uint32_t kDirectMax = 16;
// Relative slack allowed when checking exact minima against the Gamma form;
// covers rounding in both evaluations.
constexpr double kDominationSlack = 1e-10;

struct Group {
    std::uint32_t m;
    double count;
};

std::vector<Group> group_occupancy(std::span<const std::uint32_t> m) {
    std::vector<std::uint32_t> sorted(m.begin(), m.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<Group> groups;
    for (auto v : sorted) {
        if (v == 0) continue;  // empty products contribute nothing
        if (!groups.empty() && groups.back().m == v) {
            groups.back().count += 1.0;
        } else {
            groups.push_back({v, 1.0});
        }
    }
    return groups;
}

double harmonic_number(std::uint32_t m) {
    return m <= kDirectMax ? specfun::harmonic(m)
                           : specfun::digamma(static_cast<double>(m) + 1.0) + euler_gamma;
}

// ln prod_{j=1}^m e^{-st/j} / (1 - st/j) with s = +1 (plus) or -1 (minus),
// and its first three t-derivatives.
struct Term {
    double v, d1, d2, d3;
};

Term log_term(std::uint32_t m, double t, Side side) {
    Term out{0.0, 0.0, 0.0, 0.0};
    if (m <= kDirectMax) {
        for (std::uint32_t j = 1; j <= m; ++j) {
            const double jd = j;
            if (side == Side::plus) {
                const double w = 1.0 / (jd - t);
                out.v += -t / jd - std::log1p(-t / jd);
                out.d1 += w - 1.0 / jd;
                out.d2 += w * w;
                out.d3 += 2.0 * w * w * w;
            } else {
                const double w = 1.0 / (jd + t);
                out.v += t / jd - std::log1p(t / jd);
                out.d1 += 1.0 / jd - w;
                out.d2 += w * w;
                out.d3 -= 2.0 * w * w * w;
            }
        }
        return out;
    }
    const double md = m;
    const double h = harmonic_number(m);
    if (side == Side::plus) {
        // -t H(m) + ln[Gamma(m+1) / Gamma(m+1-t)] + ln Gamma(1-t)
        const double ratio = boost::math::tgamma_delta_ratio(md + 1.0, -t);
        const double a = 1.0 - t;
        const double b = md + 1.0 - t;
        out.v = -t * h + std::log(ratio) + specfun::ln_gamma(a);
        out.d1 = -h + specfun::digamma(b) - specfun::digamma(a);
        out.d2 = specfun::trigamma(a) - specfun::trigamma(b);
        out.d3 = specfun::tetragamma(b) - specfun::tetragamma(a);
    } else {
        // t H(m) + ln[Gamma(m+1) / Gamma(m+1+t)] + ln Gamma(1+t)
        const double ratio = boost::math::tgamma_delta_ratio(md + 1.0, t);
        const double a = 1.0 + t;
        const double b = md + 1.0 + t;
        out.v = t * h + std::log(ratio) + specfun::ln_gamma(a);
        out.d1 = h - specfun::digamma(b) + specfun::digamma(a);
        out.d2 = specfun::trigamma(a) - specfun::trigamma(b);
        out.d3 = specfun::tetragamma(a) - specfun::tetragamma(b);
    }
    return out;
}

Term objective(const std::vector<Group>& groups, double a0, double x, double t, Side side) {
    Term total{-t * x * a0, -x * a0, 0.0, 0.0};
    for (const auto& g : groups) {
        const Term term = log_term(g.m, t, side);
        total.v += g.count * term.v;
        total.d1 += g.count * term.d1;
        total.d2 += g.count * term.d2;
        total.d3 += g.count * term.d3;
    }
    return total;
}

ChernoffMin minimize(std::span<const std::uint32_t> m, double x, Side side,
                     std::optional<double> start) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("exact_chernoff_min: x must be finite and > 0, got " + std::to_string(x));
    }
    if (m.empty()) throw DomainError("exact_chernoff_min: empty occupancy matrix");
    const auto groups = group_occupancy(m);
    const double a0 = static_cast<double>(m.size());
    const double lo = kTMin;
    const double hi = side == Side::plus ? kTMaxPlus : kTMaxMinus;

    // The log-objective is convex in t, so its derivative is increasing.
    const Term at_lo = objective(groups, a0, x, lo, side);
    if (at_lo.d1 >= 0.0) return {std::exp(at_lo.v), at_lo.v, lo, true};
    const Term at_hi = objective(groups, a0, x, hi, side);
    if (at_hi.d1 <= 0.0) return {std::exp(at_hi.v), at_hi.v, hi, true};

    auto eval = [&](double t) -> solvers::Derivatives {
        const Term o = objective(groups, a0, x, t, side);
        return {o.d1, o.d2, o.d3};
    };
    solvers::SolveOptions opts;
    opts.tol = 1e-13 * a0 * std::max(1.0, x);
    opts.start = start;
    const double t = solvers::halley_solve(eval, {lo, hi}, opts).root;
    const double v = objective(groups, a0, x, t, side).v;
    return {std::exp(v), v, t, false};
}

McReport summarize(const std::vector<double>& values, double analytic, std::uint64_t seed) {
    McReport r;
    r.samples = values.size();
    r.seed = seed;
    r.analytic_value = analytic;
    detail::NeumaierSum sum;
    for (double v : values) sum.add(v);
    const double n = static_cast<double>(values.size());
    r.mean = sum.value() / n;
    detail::NeumaierSum sq;
    for (double v : values) sq.add((v - r.mean) * (v - r.mean));
    r.stddev = values.size() > 1 ? std::sqrt(sq.value() / (n - 1.0)) : 0.0;
    r.ci3sigma_lo = r.mean - 3.0 * r.stddev;
    r.ci3sigma_hi = r.mean + 3.0 * r.stddev;
    r.max = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    return r;
}

// Runs body(i) for i in [0, n) serially or with OpenMP.
template <class Body>
void for_samples(std::uint64_t n, Exec exec, Body&& body) {
    const auto count = static_cast<std::int64_t>(n);
    if (exec == Exec::serial) {
        for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::uint64_t>(i));
        return;
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::uint64_t>(i));
}

void require_samples(std::uint64_t samples) {
    if (samples < 1) throw ConfigError("mc: samples must be >= 1");
}

}  // namespace

double chernoff_log_objective(std::span<const std::uint32_t> m, double x, double t, Side side) {
    return objective(group_occupancy(m), static_cast<double>(m.size()), x, t, side).v;
}

ChernoffMin exact_chernoff_min(std::span<const std::uint32_t> m, double x, Side side) {
    return minimize(m, x, side, std::nullopt);
}

Occupancy sample_occupancy(const sketch::SketchParams& params, std::uint64_t f0,
                           rng::SplitMix64& gen) {
    Occupancy m(params.registers(), 0);
    const unsigned r0 = params.r0;
    for (std::size_t c = 0; c < params.c0; ++c) {
        if (r0 == 0) {
            m[c] = static_cast<std::uint32_t>(f0);
            continue;
        }
        const unsigned per_draw = 64 / r0;
        std::uint64_t left = f0;
        while (left > 0) {
            std::uint64_t bits = gen.next();
            const unsigned take = static_cast<unsigned>(std::min<std::uint64_t>(left, per_draw));
            for (unsigned k = 0; k < take; ++k) {
                const std::size_t row = static_cast<std::size_t>(bits >> (64 - r0));
                ++m[row * params.c0 + c];
                bits <<= r0;
            }
            left -= take;
        }
    }
    return m;
}

PValueReports simulate_pvalues(const McConfig& cfg) {
    sketch::validate(cfg.params);
    require_samples(cfg.samples);
    const double a0 = static_cast<double>(cfg.params.registers());
    const double q = 1.0 - cfg.alpha;
    PValueReports out;
    out.x_d = cfg.x_d ? *cfg.x_d : ci::halfwidth_from_tail(q, a0, Side::plus);
    out.x_u = cfg.x_u ? *cfg.x_u : ci::halfwidth_from_tail(q, a0, Side::minus);
    const double bound_plus = ci::tail_from_halfwidth(out.x_d, a0, Side::plus);
    const double bound_minus = ci::tail_from_halfwidth(out.x_u, a0, Side::minus);
    // Minimizers of the Gamma-form bounds start the exact searches.
    const double t_plus = solvers::t_plus(out.x_d);
    const double t_minus = std::min(solvers::t_minus(out.x_u), kTMaxMinus * 0.5);

    std::vector<double> plus(cfg.samples), minus(cfg.samples);
    std::vector<std::uint8_t> hit_plus(cfg.samples), hit_minus(cfg.samples);
    for_samples(cfg.samples, cfg.exec, [&](std::uint64_t i) {
        auto gen = rng::substream(cfg.seed, i);
        const Occupancy m = sample_occupancy(cfg.params, cfg.f0, gen);
        const auto p = minimize(m, out.x_d, Side::plus, t_plus);
        const auto n = minimize(m, out.x_u, Side::minus, t_minus);
        plus[i] = p.value;
        minus[i] = n.value;
        hit_plus[i] = p.boundary;
        hit_minus[i] = n.boundary;
    });

    auto finish = [&](const std::vector<double>& v, const std::vector<std::uint8_t>& hits,
                      double bound) {
        McReport r = summarize(v, bound, cfg.seed);
        r.dominated = r.max <= bound * (1.0 + kDominationSlack);
        for (auto h : hits) r.boundary_hits += h;
        return r;
    };
    out.plus = finish(plus, hit_plus, bound_plus);
    out.minus = finish(minus, hit_minus, bound_minus);
    return out;
}

std::vector<McReport> coverage_experiment(const McConfig& cfg,
                                          std::span<const ci::IntervalSpec> specs) {
    sketch::validate(cfg.params);
    require_samples(cfg.samples);
    const double a0 = static_cast<double>(cfg.params.registers());
    std::vector<ci::Plan> plans;
    for (const auto& s : specs) plans.push_back(ci::plan_interval(s, a0));

    const std::size_t k = specs.size();
    std::vector<std::uint8_t> covered(cfg.samples * k);
    const double f0 = static_cast<double>(cfg.f0);
    for_samples(cfg.samples, cfg.exec, [&](std::uint64_t i) {
        auto gen = rng::substream(cfg.seed, i);
        const std::uint64_t salt = gen.next();
        sketch::Sketch sk(cfg.params);
        std::uint8_t obj[16];
        for (int b = 0; b < 8; ++b) obj[b] = static_cast<std::uint8_t>(salt >> (8 * b));
        for (std::uint64_t n = 0; n < cfg.f0; ++n) {
            for (int b = 0; b < 8; ++b) obj[8 + b] = static_cast<std::uint8_t>(n >> (8 * b));
            sk.insert(hashing::Bytes(obj, 16));
        }
        const double mean_y = sk.query().mean;
        for (std::size_t j = 0; j < k; ++j) {
            const auto iv =
                ci::interval_from_plan(mean_y, cfg.params, plans[j], ci::spec_alpha(specs[j]));
            covered[i * k + j] = iv.lower < f0 && f0 < iv.upper;
        }
    });

    std::vector<McReport> out;
    const double n = static_cast<double>(cfg.samples);
    for (std::size_t j = 0; j < k; ++j) {
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < cfg.samples; ++i) hits += covered[i * k + j];
        McReport r;
        r.samples = cfg.samples;
        r.seed = cfg.seed;
        r.analytic_value = ci::spec_alpha(specs[j]);
        r.mean = static_cast<double>(hits) / n;
        r.stddev = std::sqrt(r.mean * (1.0 - r.mean) / n);
        r.ci3sigma_lo = r.mean - 3.0 * r.stddev;
        r.ci3sigma_hi = r.mean + 3.0 * r.stddev;
        r.max = r.mean;
        r.dominated = r.ci3sigma_hi >= r.analytic_value;
        out.push_back(r);
    }
    return out;
}

McReport coverage_experiment(const McConfig& cfg, const ci::IntervalSpec& spec) {
    return coverage_experiment(cfg, std::span<const ci::IntervalSpec>(&spec, 1)).front();
}

BiasReport bias_experiment(const sketch::SketchParams& params, std::uint64_t objects,
                           std::uint64_t seed) {
    sketch::validate(params);
    sketch::Sketch sk(params);
    // Smallest untruncated mantissa among the objects holding each register's X.
    std::vector<double> u_min(params.registers(), 1.0);
    const double scale = std::ldexp(1.0, static_cast<int>(params.z0));
    for (std::uint64_t i = 0; i < objects; ++i) {
        auto gen = rng::substream(seed, i);
        for (unsigned c = 1; c <= params.c0; ++c) {
            hashing::FieldTriple f;
            f.R = params.r0 == 0 ? 1u
                                 : 1u + static_cast<std::uint32_t>(gen.next() >> (64 - params.r0));
            std::uint32_t x = 1;
            // Geometric(1/2): position of the first 1-bit.
            std::uint64_t w = gen.next();
            while (w == 0) {
                x += 64;
                w = gen.next();
            }
            x += static_cast<std::uint32_t>(std::countl_zero(w));
            f.X = x;
            const double u = static_cast<double>(gen.next() >> 11) * 0x1.0p-53;
            f.Z = static_cast<std::uint32_t>(std::floor(u * scale));

            const std::size_t idx = (f.R - 1) * params.c0 + (c - 1);
            const auto old_x = sk.x_matrix()[idx];
            sk.update(c, f);
            if (f.X > old_x) {
                u_min[idx] = u;
            } else if (f.X == old_x) {
                u_min[idx] = std::min(u_min[idx], u);
            }
        }
    }
    BiasReport r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                 0};
    const auto xs = sk.x_matrix();
    const auto zs = sk.z_matrix();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 0) continue;
        ++r.touched;
        const double y = sketch::register_y(xs[i], zs[i], params.z0);
        const double ybar = static_cast<double>(xs[i]) - std::log2(1.0 + u_min[i]);
        r.min_diff = std::min(r.min_diff, y - ybar);
        r.max_diff = std::max(r.max_diff, y - ybar);
    }
    if (r.touched == 0) r.min_diff = r.max_diff = 0.0;
    return r;
}

std::vector<GumbelRow> gumbel_mgf_check(std::span<const std::uint64_t> f0_grid,
                                        std::span<const double> s_grid, std::uint64_t samples,
                                        std::uint64_t seed, Exec exec) {
    require_samples(samples);
    std::vector<GumbelRow> rows;
    for (std::uint64_t f0 : f0_grid) {
        if (f0 < 1) throw ConfigError("gumbel_mgf_check: f0 must be >= 1");
        const double f = static_cast<double>(f0);
        const double h = specfun::digamma(f + 1.0) + euler_gamma;
        for (std::size_t si = 0; si < s_grid.size(); ++si) {
            const double s = s_grid[si];
            const double u = s / ln2;
            if (!(u >= 0.0 && u < 0.5)) {
                throw DomainError("gumbel_mgf_check: s/ln 2 must lie in [0, 1/2)");
            }
            // Common random numbers across the f0 grid, so trends in f0 are not
            // masked by sampling noise.
            const std::uint64_t row_seed = rng::substream(seed, si).next();
            std::vector<double> values(samples);
            for_samples(samples, exec, [&](std::uint64_t i) {
                auto gen = rng::substream(row_seed, i);
                // Maximum of f0 unit exponentials by inversion of U^{1/f0}.
                const double m = -std::log(-std::expm1(std::log(gen.uniform_open()) / f));
                values[i] = std::exp(u * (m - h));
            });
            GumbelRow row{f0, s, {}, 0.0};
            const double exact =
                u == 0.0 ? 1.0
                         : std::exp(-u * h + std::log(boost::math::tgamma_delta_ratio(f + 1.0, -u)) +
                                    specfun::ln_gamma(1.0 - u));
            row.report = summarize(values, exact, seed);
            // Noise band of the mean, not of single draws.
            const double se = row.report.stddev / std::sqrt(static_cast<double>(samples));
            row.report.ci3sigma_lo = row.report.mean - 3.0 * se;
            row.report.ci3sigma_hi = row.report.mean + 3.0 * se;
            row.limit = u == 0.0 ? 1.0 : std::exp(specfun::ln_gamma(1.0 - u) - euler_gamma * u);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace fmci::mc
