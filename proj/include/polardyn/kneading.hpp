#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "map_core.hpp"
#include "orbit.hpp"

namespace polardyn {

class kneading_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class allowability_error : public kneading_error {
public:
    using kneading_error::kneading_error;
};

class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, cplx last) : std::runtime_error(what), last_iterate(last) {}
    cplx last_iterate;
};

enum class SequenceType { star, regular, unipolar, hybrid };

inline const char* to_string(SequenceType t) {
    switch (t) {
        case SequenceType::star: return "star";
        case SequenceType::regular: return "regular";
        case SequenceType::unipolar: return "unipolar";
        case SequenceType::hybrid: return "hybrid";
    }
    return "?";
}

/// Digits k_1 ... k_{n-1} of *k_1...k_{n-1}; empty for period one.
struct KneadingSequence {
    std::vector<int> digits;
    SequenceType type = SequenceType::star;
    friend bool operator==(const KneadingSequence&, const KneadingSequence&) = default;
};

struct PrepoleAddress {
    std::vector<int> entries;

    PrepoleAddress shift() const {
        if (entries.size() < 2) throw kneading_error("shift of an order-one address");
        return {{entries.begin() + 1, entries.end()}};
    }
    friend bool operator==(const PrepoleAddress&, const PrepoleAddress&) = default;
};

inline std::string join_digits(const std::vector<int>& d, const char* sep = " ") {
    std::string s;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(d[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Sequence classification

inline bool is_allowable(const std::vector<int>& d) {
    if (d.empty()) return true;
    if (std::all_of(d.begin(), d.end(), [](int k) { return k == 0; })) return false;
    if (d.size() % 2 == 1) {
        bool pattern = true;  // 0 k 0 k ... 0
        for (std::size_t i = 0; i < d.size(); i += 2) pattern = pattern && d[i] == 0;
        if (pattern) return false;
    }
    return true;
}

namespace detail {

inline bool is_unipolar(const std::vector<int>& d) {
    if (d.empty() || d.size() % 2 != 0) return false;
    bool odd_nonzero = false;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i % 2 == 1 && d[i] != 0) return false;
        if (i % 2 == 0 && d[i] != 0) odd_nonzero = true;
    }
    return odd_nonzero;
}

inline bool is_hybrid(const std::vector<int>& d) {
    const std::size_t n = d.size();
    // a tail of pairs (k, 0) starting at t, k at t nonzero, preceded by a nonzero d[t-1]
    for (std::size_t t = n; t >= 3; t -= 2) {
        const std::size_t first = t - 2;
        if (d[first + 1] != 0) break;
        if (d[first] != 0 && d[first - 1] != 0) return true;
    }
    return false;
}

}  // namespace detail

inline SequenceType classify_sequence(const std::vector<int>& d) {
    if (!is_allowable(d)) throw allowability_error("kneading sequence *" + join_digits(d, "") + " is not allowable");
    if (d.empty()) return SequenceType::star;
    if (d.back() != 0) return SequenceType::regular;
    if (detail::is_unipolar(d)) return SequenceType::unipolar;
    if (detail::is_hybrid(d)) return SequenceType::hybrid;
    throw kneading_error("kneading sequence *" + join_digits(d, " ") + " matches no sequence type");
}

// ---------------------------------------------------------------------------
// Itineraries

/// m_j with inverse_branch(lam, cycle[j+1], m_j) = cycle[j], for first <= j < last.
inline std::vector<int> cyclic_itinerary(cplx lam, const std::vector<cplx>& cycle, std::size_t first = 0,
                                         std::size_t last = std::numeric_limits<std::size_t>::max()) {
    const std::size_t n = cycle.size();
    std::vector<int> out;
    for (std::size_t j = first; j < std::min(n, last); ++j) {
        cplx next = cycle[(j + 1) % n];
        cplx base;
        try {
            base = inverse_branch(lam, next, 0);
        } catch (const omitted_value_error&) {
            throw kneading_error("itinerary: cycle point coincides with an omitted value");
        }
        auto m = static_cast<long long>(std::round((cycle[j].imag() - base.imag()) / pi));
        cplx back = inverse_branch(lam, next, m);
        if (!(std::abs(back - cycle[j]) <= 1e-8 * detail::scale_of(cycle[j])))
            throw kneading_error("itinerary: round trip failed at position " + std::to_string(j));
        out.push_back(static_cast<int>(m));
    }
    return out;
}

/// Raw branch indices m_1 ... m_{n-1} of an attracting cycle whose first
/// point has maximal real part.
inline std::vector<int> branch_itinerary(cplx lam, const std::vector<cplx>& cycle) {
    if (cycle.size() <= 1) return {};
    return cyclic_itinerary(lam, cycle, 1);
}

namespace detail {

/// Continues the chain of preimages chain[i] = g(chain[i-1]), chain[0] = g(w),
/// while the driving point w moves along path(s), s from 0 to 1. Each g is
/// the inverse branch that is continuous along the path.
inline void continue_chain(cplx lam, std::vector<cplx>& chain, const std::function<cplx(double)>& path,
                           int steps) {
    const double base_h = 1.0 / steps;
    double s = 0.0, h = base_h;
    std::vector<cplx> next(chain.size());
    while (s < 1.0) {
        double ns = std::min(1.0, s + h);
        cplx cur = path(ns);
        bool ok = true;
        for (std::size_t i = 0; i < chain.size() && ok; ++i) {
            if (cur == cplx(0.0, 0.0) || cur == lam) {
                ok = false;
                break;
            }
            cplx b0 = inverse_branch(lam, cur, 0);
            double m = std::round((chain[i].imag() - b0.imag()) / pi);
            cplx v = b0 + cplx(0.0, m * pi);
            if (!(std::abs(v - chain[i]) < 0.5)) ok = false;
            next[i] = v;
            cur = v;
        }
        if (ok) {
            chain.swap(next);
            s = ns;
            h = std::min(base_h, 2.0 * h);
        } else {
            h *= 0.5;
            if (h < 1e-12) throw kneading_error("branch continuation failed");
        }
    }
}

/// Digit of a left-tract cycle point from y = -2 Im z: the nearest even
/// centerline 2k pi gives k; the nearest odd centerline (2j+1) pi gives j+1
/// for j >= 0 and j for j < 0.
inline int left_digit(cplx z, bool odd) {
    double t = -2.0 * z.imag() / pi;
    if (!odd) return static_cast<int>(std::round(t / 2.0));
    double o = 2.0 * std::round((t - 1.0) / 2.0) + 1.0;  // nearest odd integer
    return static_cast<int>(o > 0.0 ? (o + 1.0) / 2.0 : (o - 1.0) / 2.0);
}

}  // namespace detail

/// Turns raw strip indices into the kneading sequence. Zero-tail pairs are
/// read off the end of the itinerary, left-tract digits come from the strip
/// geometry near -infinity, and regular digits are the addresses of the
/// boundary prepoles reached by continuing the inverse branches to the pole.
inline KneadingSequence calibrate_digits(const std::vector<int>& raw, cplx lam, const std::vector<cplx>& cyc,
                                         const EngineConfig& c = {}) {
    const int n = static_cast<int>(cyc.size());
    if (n <= 1) return {{}, SequenceType::star};
    if (static_cast<int>(raw.size()) != n - 1) throw kneading_error("itinerary length mismatch");
    if (lam.imag() == 0.0) throw kneading_error("kneading extraction is undefined for real lambda");

    auto rawat = [&](int j) { return raw[j - 1]; };  // positions are 1-based
    std::vector<int> digits(raw.begin(), raw.end());
    std::vector<char> left(n, 0), pole0(n, 0);
    for (int i = n - 1; i >= 2 && rawat(i) == 0; i -= 2) {
        left[i - 1] = 1;
        pole0[i] = 1;
    }
    for (int j = 1; j < n; ++j) {
        if (left[j]) digits[j - 1] = detail::left_digit(cyc[j], j == n - 2);
        if (pole0[j]) digits[j - 1] = 0;
    }

    int L = n - 1;
    while (L >= 1 && (left[L] || pole0[L])) --L;
    if (L >= 1) {
        // phase 1: push the point after z_L to infinity inside its tract
        const cplx drive = cyc[(L + 1) % n];
        const double dir = (L == n - 1) ? 1.0 : -1.0;
        const double R = 8.0 * (std::abs(lam) + std::abs(drive) + 1.0);
        std::vector<cplx> chain;
        for (int j = L; j >= 1; --j) chain.push_back(cyc[j]);
        detail::continue_chain(
            lam, chain, [&](double s) { return drive + cplx(dir * R * s, 0.0); }, c.continuation_steps);
        const double k = std::round(chain[0].imag() / pi);
        if (k == 0.0) throw kneading_error("regular block ends at the pole 0");
        const cplx pole(0.0, k * pi);
        if (!(std::abs(chain[0] - pole) < 1.0)) throw kneading_error("continuation did not reach a pole");
        // phase 2: slide z_L onto the pole; the chain ends on the prepoles
        const cplx top = chain[0];
        std::vector<cplx> rest(chain.begin() + 1, chain.end());
        if (!rest.empty())
            detail::continue_chain(
                lam, rest, [&](double s) { return s >= 1.0 ? pole : top + (pole - top) * s; },
                c.continuation_steps);
        digits[L - 1] = static_cast<int>(k);
        for (int j = L - 1; j >= 1; --j) digits[j - 1] = static_cast<int>(strip_index(rest[L - 1 - j]));
    }
    return {digits, classify_sequence(digits)};
}

inline KneadingSequence kneading_of(cplx lam, const CycleReport& rep, const EngineConfig& c = {}) {
    if (rep.period == 1) return {{}, SequenceType::star};
    return calibrate_digits(branch_itinerary(lam, rep.cycle), lam, rep.cycle, c);
}

// ---------------------------------------------------------------------------
// Prepoles and virtual cycle parameters

namespace detail {

inline void require_address(const PrepoleAddress& a) {
    if (a.entries.empty()) throw kneading_error("empty prepole address");
    if (a.entries.back() == 0) throw kneading_error("prepole address must end in a nonzero entry");
}

inline cplx pole_of(int k) { return {0.0, static_cast<double>(k) * pi}; }

}  // namespace detail

/// The prepole with the given address: pull the pole k_n back along the
/// principal branches k_{n-1}, ..., k_1.
inline cplx prepole(cplx lam, const PrepoleAddress& a, const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    if (lam.imag() == 0.0) throw kneading_error("prepole: lambda must not be real");
    detail::require_address(a);
    const auto& e = a.entries;
    cplx z = detail::pole_of(e.back());
    try {
        for (std::size_t j = e.size() - 1; j-- > 0;) z = inverse_branch(lam, z, e[j]);
    } catch (const omitted_value_error&) {
        throw kneading_error("prepole: address " + join_digits(e, ",") + " is not realizable");
    }
    auto fwd = detail::forward(lam, z, static_cast<int>(e.size()) - 1, c);
    if (!fwd || !(std::abs(*fwd - detail::pole_of(e.back())) < 1e-8 * detail::scale_of(*fwd)))
        throw kneading_error("prepole: forward check failed");
    return z;
}

namespace detail {

struct VcpResidual {
    cplx g;
    cplx D;
    std::vector<long long> strips;  // strip indices of w_0 ... w_{n-2}
};

inline std::optional<VcpResidual> vcp_residual(cplx lam, const PrepoleAddress& a, const EngineConfig& c) {
    if (lam == cplx(0.0, 0.0)) return std::nullopt;
    const std::size_t n = a.entries.size();
    VcpResidual r{{}, 1.0, {}};
    cplx w = lam;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        auto v = eval(lam, w, c);
        if (v.at_infinity) return std::nullopt;
        r.strips.push_back(strip_index(w));
        r.D = dlam(lam, w, c) + dz(lam, w, c) * r.D;
        w = v.value();
        if (phase_lost(w, c) || !std::isfinite(std::abs(r.D))) return std::nullopt;
    }
    r.g = w - pole_of(a.entries.back());
    return r;
}

}  // namespace detail

/// Damped Newton solve of f^{n-1}_lambda(lambda) = k_n pi i.
inline cplx solve_virtual_cycle_parameter(const PrepoleAddress& a, cplx seed, const EngineConfig& c = {}) {
    if (!is_allowable(a.entries))
        throw allowability_error("address " + join_digits(a.entries, ",") + " is not allowable");
    detail::require_address(a);
    if (a.entries.size() == 1) return detail::pole_of(a.entries.front());
    if (seed == cplx(0.0, 0.0)) throw invalid_parameter("seed must be nonzero");

    cplx lam = seed;
    auto r = detail::vcp_residual(lam, a, c);
    if (!r) throw convergence_error("virtual cycle solve: seed orbit meets a pole", lam);
    for (int step = 0; step < c.max_newton; ++step) {
        if (std::abs(r->g) < c.newton_tol) {
            for (int polish = 0; polish < 4; ++polish) {
                cplx cand = lam - r->g / r->D;
                auto rc = detail::vcp_residual(cand, a, c);
                if (!rc || !(std::abs(rc->g) < std::abs(r->g))) break;
                lam = cand;
                r = rc;
            }
            for (std::size_t j = 0; j + 1 < a.entries.size(); ++j)
                if (r->strips[j] != a.entries[j])
                    throw convergence_error("virtual cycle solve converged to a different address", lam);
            return lam;
        }
        const cplx delta = -r->g / r->D;
        double t = 1.0;
        std::optional<detail::VcpResidual> best;
        cplx best_lam = lam;
        for (int h = 0; h <= c.newton_halvings; ++h, t *= 0.5) {
            cplx cand = lam + t * delta;
            auto rc = detail::vcp_residual(cand, a, c);
            if (!rc) continue;
            best = rc;
            best_lam = cand;
            if (std::abs(rc->g) < std::abs(r->g)) break;
        }
        if (!best) throw convergence_error("virtual cycle solve: Newton step left the domain", lam);
        lam = best_lam;
        r = best;
    }
    throw convergence_error("virtual cycle solve did not converge", lam);
}

/// Starting guess for the virtual cycle parameter with address a: a fixed
/// point of lambda -> prepole(lambda, a), found by plain iteration.
inline cplx virtual_center_seed(const PrepoleAddress& a, const EngineConfig& c = {}) {
    detail::require_address(a);
    cplx lam = detail::pole_of(a.entries.front()) + cplx(0.5, a.entries.front() == 0 ? 0.5 : 0.0);
    if (a.entries.size() == 1) return detail::pole_of(a.entries.front());
    for (int it = 0; it < 40; ++it) {
        try {
            cplx nl = prepole(lam, a, c);
            if (nl.imag() == 0.0) break;
            lam = nl;
        } catch (const std::exception&) {
            break;
        }
    }
    return lam;
}

// ---------------------------------------------------------------------------
// Strips and escape certificates

enum class Parity { even, odd };

struct StripSpec {
    Parity parity = Parity::even;
    int k = 0;
    double M = 10.0;
    double eps = 0.1;

    double center() const {
        if (parity == Parity::even) return 2.0 * k * pi;
        if (k == 0) throw std::invalid_argument("odd strips are indexed by k != 0");
        return (k > 0 ? 2.0 * k - 1.0 : 2.0 * k + 1.0) * pi;
    }
};

inline bool strip_membership(cplx z, const StripSpec& s) {
    if (!(z.real() > s.M)) return false;
    return std::abs(z.imag() - s.center()) < 0.5 * pi - s.eps;
}

struct EscapeCertificate {
    bool certified = false;
    int depth = 0;           // tower levels that passed
    bool overflowed = false; // tower left double range before i_max
};

/// Checks E^i(-2 w_n) in s_list[i] for i = 0..i_max, E(u) = e^u; the last
/// strip is reused when s_list is shorter than i_max + 1.
inline EscapeCertificate escaping_certificate(cplx lam, int n, int i_max, const std::vector<StripSpec>& s_list,
                                              const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    if (s_list.empty()) throw std::invalid_argument("escaping_certificate: empty strip list");
    auto spec = [&](int i) -> const StripSpec& {
        return s_list[std::min<std::size_t>(static_cast<std::size_t>(i), s_list.size() - 1)];
    };
    auto w = detail::forward(lam, lam, n, c);
    if (!w) return {};
    cplx u = -2.0 * *w;
    constexpr double exp_max = 709.0;
    for (int i = 0; i <= i_max; ++i) {
        if (!strip_membership(u, spec(i))) return {false, i, false};
        if (i == i_max) return {true, i + 1, false};
        if (u.real() > exp_max) {
            // level i+1 from logarithms: e^u = e^{Re u} (cos Im u + i sin Im u)
            const StripSpec& s = spec(i + 1);
            double cs = std::cos(u.imag()), sn = std::sin(u.imag());
            bool re_ok = cs > 0.0 && u.real() + std::log(cs) > std::log(s.M);
            double lo = s.center() - 0.5 * pi + s.eps, hi = s.center() + 0.5 * pi - s.eps;
            bool im_ok;
            if (sn == 0.0) {
                im_ok = lo < 0.0 && 0.0 < hi;
            } else {
                double lm = u.real() + std::log(std::abs(sn));
                if (lm > std::log(std::max(std::abs(lo), std::abs(hi)))) {
                    im_ok = false;
                } else {
                    double v = std::copysign(std::exp(lm), sn);
                    im_ok = lo < v && v < hi;
                }
            }
            if (!(re_ok && im_ok)) return {false, i + 1, true};
            return {true, i + 2, true};
        }
        u = std::exp(u);
    }
    return {true, i_max + 1, false};
}

}  // namespace polardyn
