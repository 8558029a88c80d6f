#pragma once

// Special functions needed by the interval engine: log-gamma, the digamma
// family up to order 2, the Lerch transcendent for s in {1,2,3}, harmonic
// numbers and their p-modification H_p(x) with two x-derivatives.
//
// All functions are pure and thread-safe. Domain violations throw
// fmci::DomainError.

#include <cstdint>
#include <numbers>

namespace fmci::specfun {

inline constexpr double euler_gamma = 0.5772156649015329;
inline constexpr double ln2 = std::numbers::ln2;

double ln_gamma(double x);
double digamma(double x);
double trigamma(double x);
double tetragamma(double x);

struct LerchArgs {
    double z;  // in [0, 1)
    int s;     // 1, 2 or 3
    double a;  // >= 1
};

/// Phi(z, s, a) = sum_{n>=0} z^n / (a+n)^s.
///
/// Summed directly (Neumaier) with a certified truncation point taken from
/// lerch_tail_bound(); for z > 0.999 the integral representation
/// int_0^1 (-ln u)^{s-1} u^{a-1} / (1 - z u) du / (s-1)! is used instead.
double lerch_phi(const LerchArgs& args);

/// Upper bound on sum_{j>=0} z^{x+j+1} / (x+j+1), obtained from the
/// exponential-integral estimate E1(t) < e^{-t} ln(1 + 1/t):
///   z^x * ln(1 - 1/(x ln z)).
double lerch_tail_bound(double z, double x);

/// m-th harmonic number, compensated partial sum. harmonic(0) == 0.
double harmonic(std::uint64_t m);

/// p-modified harmonic number
///   H_p(x) = int_0^1 (1 - (1-p+pt)^x) / (1-t) dt
///          = psi(x+1) + gamma + ln p + (1-p)^{x+1} Phi(1-p, 1, x+1).
/// H_0 == 0 and H_p(0) == 0 exactly; H_1(x) = psi(x+1) + gamma.
double harmonic_p(double p, double x);

/// dH_p/dx and d^2H_p/dx^2 (p in (0,1], x >= 0).
double harmonic_p_d1(double p, double x);
double harmonic_p_d2(double p, double x);

struct HarmonicPValue {
    double value;
    double d1;
    double d2;
};

// H_p, H_p' and H_p'' sharing one pass over the Lerch series.
HarmonicPValue harmonic_p_with_derivatives(double p, double x);

}  // namespace fmci::specfun
