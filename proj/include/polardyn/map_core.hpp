#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "config.hpp"

namespace polardyn {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
// pi = pi_hi + pi_lo to about 35 digits; used for exact reduction mod i*pi.
inline constexpr double pi_lo = 1.2246467991473532e-16;

class invalid_parameter : public std::domain_error {
public:
    using std::domain_error::domain_error;
};
class pole_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};
class omitted_value_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A double-precision complex number, or the point at infinity.
struct ComplexValue {
    double re = 0.0;
    double im = 0.0;
    bool at_infinity = false;

    constexpr ComplexValue() = default;
    constexpr ComplexValue(cplx z) : re(z.real()), im(z.imag()) {}
    static constexpr ComplexValue infinity() {
        ComplexValue v;
        v.at_infinity = true;
        return v;
    }
    constexpr cplx value() const { return {re, im}; }
    constexpr bool finite() const { return !at_infinity; }
};

/// The pole k*pi*i.
struct Pole {
    long long k = 0;
    cplx location() const { return {0.0, static_cast<double>(k) * pi}; }
};

/// Index m of the horizontal strip mpi - pi/2 <= Im z < mpi + pi/2 that the
/// principal branch m maps onto.
inline long long strip_index(cplx z) {
    double t = std::floor(z.imag() / pi + 0.5);
    constexpr double cap = 4e18;
    return static_cast<long long>(std::clamp(t, -cap, cap));
}

namespace detail {

struct Reduced {
    cplx z;    // z - k*pi*i, |Im| <= pi/2 up to rounding
    double k;  // nearest pole index (symmetric rounding)
};

inline Reduced reduce(cplx z) {
    double k = std::round(z.imag() / pi);
    double r = std::fma(-k, pi, z.imag());
    r = std::fma(-k, pi_lo, r);
    return {{z.real(), r}, k};
}

/// log(1 + u) without cancellation for small |u|.
inline cplx log1p(cplx u) {
    if (std::abs(u) < 0.5) {
        double x = u.real(), y = u.imag();
        return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
    }
    return std::log(1.0 + u);
}

/// 1 - e^{-2z} for a reduced argument z, accurate near the pole z = 0.
inline cplx one_minus_exp_m2(cplx z) {
    double a = -2.0 * z.real(), b = -2.0 * z.imag();
    if (a < -746.0) return {1.0, 0.0};
    double s = std::sin(0.5 * b);
    double re = std::expm1(a) * std::cos(b) - 2.0 * s * s;
    double im = std::exp(a) * std::sin(b);
    return {-re, -im};
}

/// Clamps a quotient num/den to magnitude just below the overflow guard and
/// keeps its phase.
inline cplx saturate_quotient(cplx num, cplx den, const EngineConfig& c) {
    cplx r = num / den;
    double mag = std::abs(r);
    if (std::isfinite(mag) && mag < c.overflow_guard) return r;
    double phase = std::arg(num) - std::arg(den);
    return std::polar(std::nextafter(c.overflow_guard, 0.0), phase);
}

/// e^{L} with the magnitude kept inside [1/guard, guard).
inline cplx saturate_exp(cplx L, const EngineConfig& c) {
    double lg = std::log(c.overflow_guard);
    if (L.real() >= lg) return std::polar(std::nextafter(c.overflow_guard, 0.0), L.imag());
    if (L.real() <= -lg) return std::polar(1.0 / c.overflow_guard, L.imag());
    return std::exp(L);
}

inline void require_parameter(cplx lam) {
    if (lam == cplx(0.0, 0.0)) throw invalid_parameter("lambda = 0 is not in the family");
}

/// True when z counts as a pole under the configured thresholds. The pole at
/// the origin only triggers on an exact zero: near it f ~ lam/(2z) is
/// computed accurately.
inline bool near_pole(const Reduced& r, cplx z, const EngineConfig& c) {
    if (z == cplx(0.0, 0.0)) return true;
    if (r.k == 0.0) return false;
    double dist = std::abs(r.z);
    if (dist < c.pole_snap) return true;
    if (dist > std::max(1e-3, c.pole_eps)) return false;  // |1 - e^{-2z}| ~ 2 dist
    cplx d = z.real() < 0.0 ? one_minus_exp_m2(-r.z) : one_minus_exp_m2(r.z);
    double mag = std::abs(d);
    if (z.real() < 0.0) mag *= std::exp(-2.0 * r.z.real());
    return mag < c.pole_eps;
}

}  // namespace detail

/// f_lambda(z) = lambda / (1 - e^{-2z}).
inline ComplexValue eval(cplx lam, cplx z, const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("eval: z must be finite");
    auto r = detail::reduce(z);
    if (detail::near_pole(r, z, c)) return ComplexValue::infinity();
    if (z.real() < -c.exp_guard) return detail::saturate_exp(std::log(-lam) + 2.0 * r.z, c);
    if (z.real() < 0.0) {
        // lambda e^{2z} / (e^{2z} - 1), no overflow for Re z < 0
        return detail::saturate_quotient(-lam * std::exp(2.0 * r.z), detail::one_minus_exp_m2(-r.z), c);
    }
    return detail::saturate_quotient(lam, detail::one_minus_exp_m2(r.z), c);
}

inline ComplexValue eval(cplx lam, ComplexValue z, const EngineConfig& c = {}) {
    if (z.at_infinity) throw std::invalid_argument("eval: z must be finite");
    return eval(lam, z.value(), c);
}

/// df/dz = -2 lambda e^{-2z} / (1 - e^{-2z})^2.
inline cplx dz(cplx lam, cplx z, const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    auto r = detail::reduce(z);
    if (detail::near_pole(r, z, c)) throw pole_error("dz: derivative at a pole");
    if (z.real() < 0.0) {
        cplx d = detail::one_minus_exp_m2(-r.z);
        return -2.0 * lam * std::exp(2.0 * r.z) / (d * d);
    }
    cplx d = detail::one_minus_exp_m2(r.z);
    return -2.0 * lam * std::exp(-2.0 * r.z) / (d * d);
}

/// df/dlambda = 1 / (1 - e^{-2z}).
inline cplx dlam(cplx lam, cplx z, const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    auto r = detail::reduce(z);
    if (detail::near_pole(r, z, c)) throw pole_error("dlam: derivative at a pole");
    if (z.real() < 0.0) return -std::exp(2.0 * r.z) / detail::one_minus_exp_m2(-r.z);
    return 1.0 / detail::one_minus_exp_m2(r.z);
}

/// log f'(z), finite even where f'(z) under- or overflows. The imaginary part
/// is defined modulo 2 pi.
inline cplx log_dz(cplx lam, cplx z, const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    auto r = detail::reduce(z);
    if (detail::near_pole(r, z, c)) throw pole_error("log_dz: derivative at a pole");
    cplx base = std::log(-2.0 * lam);
    if (z.real() < 0.0) {
        cplx e = std::exp(2.0 * r.z);
        return base + 2.0 * r.z - 2.0 * detail::log1p(-e);
    }
    cplx e = std::exp(-2.0 * r.z);
    return base - 2.0 * r.z - 2.0 * detail::log1p(-e);
}

/// The preimage of w on branch m: -1/2 Log(1 - lambda/w) + i m pi.
inline cplx inverse_branch(cplx lam, cplx w, long long m) {
    detail::require_parameter(lam);
    if (w == cplx(0.0, 0.0) || w == lam)
        throw omitted_value_error("inverse_branch: 0 and lambda are omitted values");
    cplx u = -lam / w;
    cplx L;
    if (std::abs(u) < 0.5) {
        L = detail::log1p(u);
    } else {
        cplx q = (w - lam) / w;
        if (q.imag() == 0.0) q.imag(0.0);  // negative reals take Im Log = +pi
        L = std::log(q);
    }
    return -0.5 * L + cplx(0.0, static_cast<double>(m) * pi);
}

struct RealFixedPoint {
    double x;
    double multiplier;
};

/// The positive solution of lambda = x (1 - e^{-2x}) and its multiplier
/// -2x e^{-2x} / (1 - e^{-2x}).
inline RealFixedPoint real_fixed_point(double lam) {
    if (!(lam > 0.0) || !std::isfinite(lam))
        throw std::domain_error("real_fixed_point: lambda must be positive");
    auto h = [](double x) { return -x * std::expm1(-2.0 * x); };
    double lo = 0.0, hi = lam + 1.0;
    for (int it = 0; it < 2000 && hi - lo > 0.0; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (h(mid) < lam ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        double dh = -std::expm1(-2.0 * x) + 2.0 * x * std::exp(-2.0 * x);
        double nx = x - (h(x) - lam) / dh;
        if (!(nx > 0.0) || std::abs(h(nx) - lam) >= std::abs(h(x) - lam)) break;
        x = nx;
    }
    return {x, -2.0 * x / std::expm1(2.0 * x)};
}

}  // namespace polardyn
