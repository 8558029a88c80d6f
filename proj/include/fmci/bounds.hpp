#pragma once

// Closed-form enclosures for the roots of the four inverse problems.
// Templated on the real type so the same formulas can be evaluated in
// extended precision when certifying them.

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>

namespace fmci::bounds {

template <class Real>
struct Enclosure {
    Real lo;
    Real hi;
};

// psi(x) = y with x > 1/2:  e^y < x < e^y + 1/2.
template <class Real>
Enclosure<Real> digamma_root(const Real& y) {
    using std::exp;
    const Real ey = exp(y);
    return {ey, ey + Real(0.5)};
}

// H_p(x) = y, p in (0,1]:
//   upper  e^{y-gamma}/p - 1/2
//   lower  e^{y-gamma}/p - e + 1/ln(1-p)   when e^{y-gamma} > p (1/2 - 1/((e-1) ln(1-p)))
//          e^{y-gamma} - 1                 otherwise
// For p = 1 the terms in 1/ln(1-p) vanish. The lower bound is not clamped here.
template <class Real>
Enclosure<Real> harmonic_p_root(const Real& p, const Real& y) {
    using std::exp;
    using std::log;
    namespace bc = boost::math::constants;
    const Real a = exp(y - bc::euler<Real>());
    const Real hi = a / p - Real(0.5);
    const Real inv_log_q = p < Real(1) ? Real(1) / log(Real(1) - p) : Real(0);
    const Real threshold = p * (Real(0.5) - inv_log_q / (bc::e<Real>() - Real(1)));
    const Real lo = a > threshold ? a / p - bc::e<Real>() + inv_log_q : a - Real(1);
    return {lo, hi};
}

// g_-(x) = y.
template <class Real>
Enclosure<Real> alpha_minus_root(const Real& y) {
    using std::log;
    using std::sqrt;
    namespace bc = boost::math::constants;
    if (y < Real(3)) {
        return {sqrt(y / Real(50)), bc::pi<Real>() * sqrt(Real(2) * y / Real(3))};
    }
    return {Real(2) / Real(3) * (log(y + Real(0.5)) + bc::euler<Real>()),
            Real(2) * (log(Real(4) * y / Real(3) + Real(1)) + bc::euler<Real>())};
}

// The constant C in (0,1) of the g_+ lower bound; t_+(x) > C at the root.
template <class Real>
Real alpha_plus_c(const Real& y) {
    using std::sqrt;
    namespace bc = boost::math::constants;
    const Real pi2_6 = bc::pi_sqr<Real>() / Real(6);
    const Real a = (Real(3) - pi2_6) / Real(2);
    const Real half_y = y / Real(2);
    const Real b = half_y + (Real(1) - a);
    const Real root = sqrt(b * b + Real(4) * a);
    // 1 - z where z = (-b + root) / (2a) is the positive root of a z^2 + b z - 1;
    // written without the cancellation at small y.
    const Real one_minus_z = (half_y + half_y * (b + Real(1) - a) / (root + Real(1) + a)) / (b + root);
    return sqrt(one_minus_z);
}

// g_+(x) = y.
template <class Real>
Enclosure<Real> alpha_plus_root(const Real& y) {
    using std::log;
    using std::sqrt;
    namespace bc = boost::math::constants;
    const Real c = alpha_plus_c(y);
    const Real lo1 = -log(Real(1) - c) - bc::euler<Real>();
    const Real lo2 = bc::pi_sqr<Real>() / Real(6) * c;
    return {lo1 > lo2 ? lo1 : lo2, Real(2) * sqrt(y * (y + Real(2)))};
}

}  // namespace fmci::bounds
