#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "config.hpp"
#include "map_core.hpp"

namespace polardyn {

enum class Terminal { budget_exhausted, pole_hit, overflow, converged };

inline const char* to_string(Terminal t) {
    switch (t) {
        case Terminal::budget_exhausted: return "budget_exhausted";
        case Terminal::pole_hit: return "pole_hit";
        case Terminal::overflow: return "overflow";
        case Terminal::converged: return "converged";
    }
    return "?";
}

/// points[0] = z0 and points[j+1] = f(points[j]). For pole_hit, points[step] is
/// the point at infinity and step is the last index.
struct OrbitTrace {
    std::vector<ComplexValue> points;
    Terminal terminal = Terminal::budget_exhausted;
    int step = -1;
};

struct CycleReport {
    int period = 0;
    cplx representative;
    std::vector<cplx> cycle;  // cycle[0] = representative, maximal real part
    cplx multiplier;
    cplx log_multiplier;  // sum of log f'; Re < 0 even when multiplier underflows
    double residual = 0.0;
};

namespace detail {

/// Left of Re = 20 the next image depends on Im z mod pi, which is noise once
/// |Im z| exceeds phase_guard. Further right the image is lambda to 1e-17.
inline bool phase_lost(cplx v, const EngineConfig& c) {
    return std::abs(v.imag()) > c.phase_guard && v.real() < 20.0;
}

inline bool saturated(cplx v, const EngineConfig& c) {
    double m = std::abs(v);
    return m > c.overflow_guard * 1e-10 || (m != 0.0 && m < 1e10 / c.overflow_guard);
}

inline double scale_of(cplx z) { return std::max(1.0, std::abs(z)); }

/// f^n(z), or nothing if the orbit meets a pole or loses its phase.
inline std::optional<cplx> forward(cplx lam, cplx z, int n, const EngineConfig& c) {
    for (int i = 0; i < n; ++i) {
        auto v = eval(lam, z, c);
        if (v.at_infinity) return std::nullopt;
        z = v.value();
        if (phase_lost(z, c)) return std::nullopt;
    }
    return z;
}

}  // namespace detail

inline OrbitTrace iterate(cplx lam, cplx z0, int budget, const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    OrbitTrace tr;
    tr.points.reserve(static_cast<std::size_t>(std::max(budget, 0)) + 1);
    tr.points.emplace_back(z0);
    cplx w = z0;
    for (int t = 1; t <= budget; ++t) {
        auto v = eval(lam, w, c);
        tr.points.push_back(v);
        if (v.at_infinity) {
            tr.terminal = Terminal::pole_hit;
            tr.step = t;
            return tr;
        }
        cplx nw = v.value();
        if (detail::phase_lost(nw, c)) {
            tr.terminal = Terminal::overflow;
            tr.step = t;
            return tr;
        }
        if (nw == w) {
            tr.terminal = Terminal::converged;
            tr.step = t;
            return tr;
        }
        w = nw;
    }
    tr.terminal = Terminal::budget_exhausted;
    tr.step = budget;
    return tr;
}

/// Newton refinement of f^p(z) = z from an approximate return point. Returns
/// an attracting cycle of minimal period dividing p, or nothing.
inline std::optional<CycleReport> refine_cycle(cplx lam, cplx z, int p, const EngineConfig& c = {}) {
    for (int it = 0; it < 40; ++it) {
        cplx y = z, P = 1.0;
        for (int i = 0; i < p; ++i) {
            auto v = eval(lam, y, c);
            if (v.at_infinity) return std::nullopt;
            P *= dz(lam, y, c);
            if (!std::isfinite(std::abs(P))) return std::nullopt;
            if (std::abs(P) < 1e-300) P = 0.0;
            y = v.value();
            if (detail::phase_lost(y, c)) return std::nullopt;
        }
        cplx g = y - z;
        if (std::abs(g) <= 1e-15 * detail::scale_of(z)) break;
        cplx nz = z - g / (P - 1.0);
        if (!std::isfinite(nz.real()) || !std::isfinite(nz.imag())) return std::nullopt;
        z = nz;
    }
    auto tol = [&](cplx q) { return c.cycle_tol * detail::scale_of(q); };
    auto back = detail::forward(lam, z, p, c);
    if (!back || !(std::abs(*back - z) < tol(z))) return std::nullopt;
    for (int d = 1; d < p; ++d) {
        if (p % d != 0) continue;
        auto q = detail::forward(lam, z, d, c);
        if (q && std::abs(*q - z) < tol(z)) {
            p = d;
            break;
        }
    }

    CycleReport rep;
    rep.period = p;
    rep.cycle.reserve(p);
    cplx y = z;
    for (int i = 0; i < p; ++i) {
        if (detail::saturated(y, c) || detail::phase_lost(y, c)) return std::nullopt;
        rep.cycle.push_back(y);
        auto v = eval(lam, y, c);
        if (v.at_infinity) return std::nullopt;
        y = v.value();
    }
    auto top = std::max_element(rep.cycle.begin(), rep.cycle.end(),
                                [](cplx a, cplx b) { return a.real() < b.real(); });
    std::rotate(rep.cycle.begin(), top, rep.cycle.end());

    rep.multiplier = 1.0;
    rep.log_multiplier = 0.0;
    for (cplx q : rep.cycle) {
        rep.multiplier *= dz(lam, q, c);
        rep.log_multiplier += log_dz(lam, q, c);
    }
    if (!(rep.log_multiplier.real() < 0.0)) return std::nullopt;
    rep.representative = rep.cycle.front();
    auto again = detail::forward(lam, rep.representative, p, c);
    if (!again) return std::nullopt;
    rep.residual = std::abs(*again - rep.representative);
    if (!(rep.residual < tol(rep.representative))) return std::nullopt;
    return rep;
}

namespace detail {

inline int near_return(const std::vector<cplx>& pts, int max_period, double tol) {
    const int t = static_cast<int>(pts.size()) - 1;
    const cplx w = pts[t];
    const double lim = tol * scale_of(w);
    for (int p = 1; p <= max_period && p <= t; ++p)
        if (std::abs(w - pts[t - p]) < lim) return p;
    return 0;
}

constexpr int cycle_check_stride = 64;

}  // namespace detail

/// Orbit of the asymptotic value with on-line cycle detection. Stops at the
/// first pole hit, phase loss, confirmed cycle, or when the budget runs out.
struct OrbitScan {
    std::vector<cplx> points;  // finite points only; for pole_hit the last one is the pole
    Terminal terminal = Terminal::budget_exhausted;
    std::optional<CycleReport> cycle;
};

inline OrbitScan scan_orbit(cplx lam, int budget, int max_period, const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    OrbitScan s;
    s.points.reserve(static_cast<std::size_t>(budget) + 1);
    s.points.push_back(lam);
    const int burn = budget / 2;
    for (int t = 1; t <= budget; ++t) {
        auto v = eval(lam, s.points.back(), c);
        if (v.at_infinity) {
            s.terminal = Terminal::pole_hit;
            return s;
        }
        s.points.push_back(v.value());
        if (detail::phase_lost(v.value(), c)) {
            s.terminal = Terminal::overflow;
            return s;
        }
        if (t < burn || t < max_period) continue;
        if ((t - burn) % detail::cycle_check_stride != 0 && t != budget) continue;
        if (int p = detail::near_return(s.points, max_period, c.coarse_tol)) {
            if (auto rep = refine_cycle(lam, s.points.back(), p, c)) {
                s.cycle = std::move(rep);
                s.terminal = Terminal::converged;
                return s;
            }
        }
    }
    s.terminal = Terminal::budget_exhausted;
    return s;
}

inline std::optional<CycleReport> detect_cycle(cplx lam, int budget, int max_period,
                                               const EngineConfig& c = {}) {
    return scan_orbit(lam, budget, max_period, c).cycle;
}

/// Window test for the alternation towards the zero virtual cycle {0, -inf}:
/// over the last 2T points, one parity stays below zero_eps in modulus and
/// the other has real part below -escape_M.
inline bool alternation_window(const std::vector<cplx>& pts, const EngineConfig& c) {
    const std::size_t want = 2 * static_cast<std::size_t>(c.escape_window);
    if (pts.size() < want) return false;
    const std::size_t first = pts.size() - want;
    for (int parity = 0; parity < 2; ++parity) {
        bool ok = true;
        for (std::size_t i = first; i < pts.size() && ok; ++i) {
            bool small = ((i - first) % 2) == static_cast<std::size_t>(parity);
            ok = small ? std::abs(pts[i]) < c.zero_eps : pts[i].real() < -c.escape_M;
        }
        if (ok) return true;
    }
    return false;
}

/// Limits a_i = lim_{lambda -> 0} f^{2i+1}_lambda(lambda):
/// a_0 = 1/2 and a_{i+1} = (1 - e^{-2 a_i}) / 2.
inline ComplexValue zero_limit_orbit(unsigned i) {
    double a = 0.5;
    for (unsigned k = 0; k < i; ++k) a = -0.5 * std::expm1(-2.0 * a);
    return cplx(a, 0.0);
}

}  // namespace polardyn
