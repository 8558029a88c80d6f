#include "fmci/specfun.hpp"

#include "fmci/errors.hpp"
#include "summation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace fmci::specfun {
namespace {

// B_2, B_4, ..., B_16
constexpr std::array<double, 8> kBernoulli = {
    1.0 / 6.0,         -1.0 / 30.0,  1.0 / 42.0,         -1.0 / 30.0,
    5.0 / 66.0,        -691.0 / 2730.0, 7.0 / 6.0,       -3617.0 / 510.0,
};

// Below this the argument is shifted upward by recurrence before the
// asymptotic series is used.
constexpr double kAsymptoticFrom = 8.0;

void require_positive(double x, const char* fn) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(fn) + ": argument must be finite and > 0, got " +
                          std::to_string(x));
    }
}

double ln_gamma_asymptotic(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    double pw = inv;  // x^{-(2k-1)}
    for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
        const double kk = static_cast<double>(k);
        series += kBernoulli[k - 1] / (2.0 * kk * (2.0 * kk - 1.0)) * pw;
        pw *= inv2;
    }
    constexpr double half_ln_2pi = 0.91893853320467274178;
    return (x - 0.5) * std::log(x) - x + half_ln_2pi + series;
}

double digamma_asymptotic(double x) {
    const double inv2 = 1.0 / (x * x);
    double series = 0.0;
    double pw = inv2;  // x^{-2k}
    for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
        series += kBernoulli[k - 1] / (2.0 * static_cast<double>(k)) * pw;
        pw *= inv2;
    }
    return std::log(x) - 0.5 / x - series;
}

double trigamma_asymptotic(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    double pw = inv2 * inv;  // x^{-(2k+1)}
    for (double b : kBernoulli) {
        series += b * pw;
        pw *= inv2;
    }
    return inv + 0.5 * inv2 + series;
}

double tetragamma_asymptotic(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    double pw = inv2 * inv2;  // x^{-(2k+2)}
    for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
        series += (2.0 * static_cast<double>(k) + 1.0) * kBernoulli[k - 1] * pw;
        pw *= inv2;
    }
    return -inv2 - inv2 * inv - series;
}

// Tail of sum_{n>=count} z^n / (a+n)^s, for count >= 1.
double lerch_series_tail(double z, int s, double a, double count) {
    const double shifted = a + count - 1.0;
    const double bound = std::pow(z, count - 1.0) * std::log1p(-1.0 / (shifted * std::log(z)));
    return s == 1 ? bound : bound / std::pow(a + count, s - 1);
}

double lerch_by_series(double z, int s, double a) {
    detail::NeumaierSum sum;
    double zn = 1.0;
    for (std::uint64_t n = 0;; ++n) {
        const double base = a + static_cast<double>(n);
        double denom = base;
        if (s >= 2) denom *= base;
        if (s >= 3) denom *= base;
        sum.add(zn / denom);
        zn *= z;
        if ((n & 7u) == 7u || zn == 0.0) {
            if (zn == 0.0) break;
            const double tail = lerch_series_tail(z, s, a, static_cast<double>(n + 1));
            if (tail < 1e-17 * sum.value()) break;
        }
    }
    return sum.value();
}

double lerch_by_integral(double z, int s, double a) {
    // Phi = 1/(s-1)! int_0^inf v^{s-1} e^{-a v} / (1 - z e^{-v}) dv, with u = e^{-v}
    // in the Euler integral. The integrand has a pole at v ~ -(1 - z) and decays
    // like e^{-a v}. Pieces double in length from ~ (1 - z) and are capped at
    // 1/a, so a fixed 31-point Kronrod rule resolves each one to rounding.
    auto integrand = [z, s, a](double v) {
        const double denom = (1.0 - z) - z * std::expm1(-v);
        double f = std::exp(-a * v) / denom;
        if (s >= 2) f *= v;
        if (s >= 3) f *= v;
        return f;
    };
    const double width_cap = 1.0 / a;
    const double first = std::min(1.0 - z, width_cap);
    const double v_end = (60.0 + 2.0 * (s - 1) * std::log(60.0 / a + 1.0)) / a;
    using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
    detail::NeumaierSum sum;
    sum.add(Integrator::integrate(integrand, 0.0, first, 0));
    double lo = first;
    while (lo < v_end) {
        const double hi = std::min(lo + std::min(lo, width_cap), v_end);
        sum.add(Integrator::integrate(integrand, lo, hi, 0));
        lo = hi;
    }
    const double factorial = s == 3 ? 2.0 : 1.0;
    return sum.value() / factorial;
}

struct LerchTriple {
    double phi1;
    double phi2;
    double phi3;
};

LerchTriple lerch_triple(double z, double a) {
    if (z > 0.999) {
        return {lerch_by_integral(z, 1, a), lerch_by_integral(z, 2, a), lerch_by_integral(z, 3, a)};
    }
    detail::NeumaierSum s1, s2, s3;
    double zn = 1.0;
    for (std::uint64_t n = 0;; ++n) {
        const double base = a + static_cast<double>(n);
        const double t1 = zn / base;
        const double t2 = t1 / base;
        s1.add(t1);
        s2.add(t2);
        s3.add(t2 / base);
        zn *= z;
        if (zn == 0.0) break;
        if ((n & 7u) == 7u) {
            // The s = 1 tail dominates the relative tails of s = 2, 3 because
            // every term shrinks by the same factor (a+n) >= a.
            const double tail = lerch_series_tail(z, 1, a, static_cast<double>(n + 1));
            if (tail < 1e-17 * s1.value()) break;
        }
    }
    return {s1.value(), s2.value(), s3.value()};
}

void require_harmonic_args(double p, double x, const char* fn) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(std::string(fn) + ": p must lie in [0,1], got " + std::to_string(p));
    }
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(fn) + ": x must be finite and >= 0, got " +
                          std::to_string(x));
    }
}

}  // namespace

double ln_gamma(double x) {
    require_positive(x, "ln_gamma");
    if (x == 1.0 || x == 2.0) return 0.0;
    if (x >= kAsymptoticFrom) return ln_gamma_asymptotic(x);
    double prod = 1.0;
    while (x < kAsymptoticFrom) {
        prod *= x;
        x += 1.0;
    }
    return ln_gamma_asymptotic(x) - std::log(prod);
}

double digamma(double x) {
    require_positive(x, "digamma");
    double shift = 0.0;
    while (x < kAsymptoticFrom) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    return digamma_asymptotic(x) + shift;
}

double trigamma(double x) {
    require_positive(x, "trigamma");
    double shift = 0.0;
    while (x < kAsymptoticFrom) {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    return trigamma_asymptotic(x) + shift;
}

double tetragamma(double x) {
    require_positive(x, "tetragamma");
    double shift = 0.0;
    while (x < kAsymptoticFrom) {
        shift -= 2.0 / (x * x * x);
        x += 1.0;
    }
    return tetragamma_asymptotic(x) + shift;
}

double lerch_phi(const LerchArgs& args) {
    const auto [z, s, a] = args;
    if (!(z >= 0.0 && z < 1.0)) {
        throw DomainError("lerch_phi: z must lie in [0,1), got " + std::to_string(z));
    }
    if (s < 1 || s > 3) {
        throw DomainError("lerch_phi: s must be 1, 2 or 3, got " + std::to_string(s));
    }
    if (!(a >= 1.0) || !std::isfinite(a)) {
        throw DomainError("lerch_phi: a must be finite and >= 1, got " + std::to_string(a));
    }
    if (z == 0.0) return 1.0 / std::pow(a, s);
    if (z > 0.999) return lerch_by_integral(z, s, a);
    return lerch_by_series(z, s, a);
}

double lerch_tail_bound(double z, double x) {
    if (!(z > 0.0 && z < 1.0)) {
        throw DomainError("lerch_tail_bound: z must lie in (0,1), got " + std::to_string(z));
    }
    if (!(x > 0.0)) {
        throw DomainError("lerch_tail_bound: x must be > 0, got " + std::to_string(x));
    }
    const double xl = x * std::log(z);
    return std::exp(xl) * std::log1p(-1.0 / xl);
}

double harmonic(std::uint64_t m) {
    detail::NeumaierSum sum;
    for (std::uint64_t j = m; j >= 1; --j) sum.add(1.0 / static_cast<double>(j));
    return sum.value();
}

double harmonic_p(double p, double x) {
    require_harmonic_args(p, x, "harmonic_p");
    if (p == 0.0 || x == 0.0) return 0.0;
    const double classical = digamma(x + 1.0) + euler_gamma;
    if (p == 1.0) return classical;
    const double z = 1.0 - p;
    const double prefactor = std::pow(z, x + 1.0);
    const double tail = prefactor > 0.0 ? prefactor * lerch_phi({z, 1, x + 1.0}) : 0.0;
    return classical + std::log(p) + tail;
}

double harmonic_p_d1(double p, double x) {
    require_harmonic_args(p, x, "harmonic_p_d1");
    if (p == 0.0) throw DomainError("harmonic_p_d1: p must be > 0");
    const double base = trigamma(x + 1.0);
    if (p == 1.0) return base;
    const double z = 1.0 - p;
    const double prefactor = std::pow(z, x + 1.0);
    if (prefactor == 0.0) return base;
    const double lz = std::log(z);
    const double phi1 = lerch_phi({z, 1, x + 1.0});
    const double phi2 = lerch_phi({z, 2, x + 1.0});
    return base + prefactor * (lz * phi1 - phi2);
}

double harmonic_p_d2(double p, double x) {
    require_harmonic_args(p, x, "harmonic_p_d2");
    if (p == 0.0) throw DomainError("harmonic_p_d2: p must be > 0");
    const double base = tetragamma(x + 1.0);
    if (p == 1.0) return base;
    const double z = 1.0 - p;
    const double prefactor = std::pow(z, x + 1.0);
    if (prefactor == 0.0) return base;
    const double lz = std::log(z);
    const double phi1 = lerch_phi({z, 1, x + 1.0});
    const double phi2 = lerch_phi({z, 2, x + 1.0});
    const double phi3 = lerch_phi({z, 3, x + 1.0});
    return base + prefactor * (lz * lz * phi1 - 2.0 * lz * phi2 + 2.0 * phi3);
}

HarmonicPValue harmonic_p_with_derivatives(double p, double x) {
    require_harmonic_args(p, x, "harmonic_p_with_derivatives");
    if (p == 0.0) throw DomainError("harmonic_p_with_derivatives: p must be > 0");
    const double classical = x == 0.0 ? 0.0 : digamma(x + 1.0) + euler_gamma;
    HarmonicPValue out{classical, trigamma(x + 1.0), tetragamma(x + 1.0)};
    if (p == 1.0) return out;
    if (x > 0.0) out.value += std::log(p);
    const double z = 1.0 - p;
    const double prefactor = std::pow(z, x + 1.0);
    if (prefactor == 0.0) return out;
    const auto [phi1, phi2, phi3] = lerch_triple(z, x + 1.0);
    const double lz = std::log(z);
    if (x > 0.0) out.value += prefactor * phi1;
    out.d1 += prefactor * (lz * phi1 - phi2);
    out.d2 += prefactor * (lz * lz * phi1 - 2.0 * lz * phi2 + 2.0 * phi3);
    return out;
}

}  // namespace fmci::specfun
