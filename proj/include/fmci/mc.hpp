#pragma once

// Monte Carlo validation: exact finite Chernoff minima against their
// Gamma-form limits, end-to-end interval coverage, the register bias of
// truncated mantissas, and the Gumbel limit of centered maxima.
//
// Every experiment derives one RNG substream per sample from (seed, index),
// so serial and parallel runs produce bit-identical reports.

#include "fmci/ci.hpp"
#include "fmci/rng.hpp"
#include "fmci/sketch.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fmci::mc {

enum class Exec { serial, parallel };

struct McConfig {
    sketch::SketchParams params;
    std::uint64_t f0 = 500;
    double alpha = 0.95;
    // Half-widths for simulate_pvalues; default: chosen so the Gamma-form
    // bound equals 1 - alpha on each side.
    std::optional<double> x_d;
    std::optional<double> x_u;
    std::uint64_t samples = 10000;
    std::uint64_t seed = 1;
    Exec exec = Exec::parallel;
};

struct McReport {
    double mean = 0.0;
    double stddev = 0.0;
    double ci3sigma_lo = 0.0;
    double ci3sigma_hi = 0.0;
    double analytic_value = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    // pvalues only: largest sample, whether every sample stayed at or below
    // analytic_value, and how many minimizations ended on the window edge.
    double max = 0.0;
    bool dominated = true;
    std::uint64_t boundary_hits = 0;

    bool operator==(const McReport&) const = default;
};

// Occupancy counts m_rc, row-major 2^r0 x c0.
using Occupancy = std::vector<std::uint32_t>;

struct ChernoffMin {
    double value;     // min over the window of the product
    double log_value;
    double t;         // minimizer
    bool boundary;    // minimizer on the window edge
};

// Search windows for t.
inline constexpr double kTMin = 1e-8;
inline constexpr double kTMaxPlus = 1.0 - 1e-8;
inline constexpr double kTMaxMinus = 50.0;

// min_t prod_{r,c} e^{-t x} prod_{j=1}^{m_rc} e^{-+t/j} / (1 -+ t/j),
// with the upper signs for Side::plus (t in (0,1)) and the lower signs for
// Side::minus (t > 0).
ChernoffMin exact_chernoff_min(std::span<const std::uint32_t> m, double x, ci::Side side);

// log of the objective above at a given t; the product form is evaluated
// term by term for small m and through ln Gamma otherwise.
double chernoff_log_objective(std::span<const std::uint32_t> m, double x, double t,
                              ci::Side side);

// Multinomial occupancy of f0 balls per column, one uniform bin per ball.
Occupancy sample_occupancy(const sketch::SketchParams& params, std::uint64_t f0,
                           rng::SplitMix64& gen);

struct PValueReports {
    McReport plus;
    McReport minus;
    double x_d = 0.0;
    double x_u = 0.0;
};

// Distribution of the exact minima P_+ (at x_d) and P_- (at x_u) over
// sampled occupancies.
PValueReports simulate_pvalues(const McConfig& cfg);

// Coverage of `spec` over cfg.samples synthetic streams of f0 distinct
// objects. mean is the empirical coverage, stddev its binomial standard
// error and analytic_value the nominal confidence.
McReport coverage_experiment(const McConfig& cfg, const ci::IntervalSpec& spec);
// Several specs evaluated on the same streams.
std::vector<McReport> coverage_experiment(const McConfig& cfg,
                                          std::span<const ci::IntervalSpec> specs);

// Register bias of truncating the mantissa to z0 bits. Objects get
// independent (R, X, U) with U uniform on [0,1); Z = floor(U 2^z0).
// Reports extremes of Y - Ybar over every touched register, where Ybar
// uses the untruncated U.
struct BiasReport {
    double min_diff = 0.0;
    double max_diff = 0.0;
    std::size_t touched = 0;
};
BiasReport bias_experiment(const sketch::SketchParams& params, std::uint64_t objects,
                           std::uint64_t seed);

// E exp(s (Ybar - H(f0)/lambda0)) for Ybar the maximum of f0 exponentials
// of rate lambda0, against its exact finite value and the Gumbel limit
// Gamma(1 - s/lambda0) exp(-gamma s/lambda0). Rows with the same s share
// their uniforms across f0. ci3sigma_* bound the mean: mean -+ 3 stddev/sqrt(n).
struct GumbelRow {
    std::uint64_t f0;
    double s;
    McReport report;  // analytic_value = exact finite value
    double limit;
};
std::vector<GumbelRow> gumbel_mgf_check(std::span<const std::uint64_t> f0_grid,
                                        std::span<const double> s_grid, std::uint64_t samples,
                                        std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace fmci::mc
