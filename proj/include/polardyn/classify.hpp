#pragma once

#include <optional>
#include <string>
#include <variant>

#include "kneading.hpp"
#include "orbit.hpp"

namespace polardyn {

enum class Tag { attracting, escaping, virtual_cycle_parameter, undetermined };

inline const char* to_string(Tag t) {
    switch (t) {
        case Tag::attracting: return "attracting";
        case Tag::escaping: return "escaping";
        case Tag::virtual_cycle_parameter: return "virtual_cycle_parameter";
        case Tag::undetermined: return "undetermined";
    }
    return "?";
}

struct Attracting {
    CycleReport cycle;
    std::optional<KneadingSequence> kneading;
    std::string kneading_failure;  // why kneading is absent, if it is
};

struct Escaping {
    int steps = 0;           // orbit length examined
    bool saturated = false;  // alternation ran past double range
};

struct VirtualCycleParameter {
    PrepoleAddress address;
};

struct Undetermined {
    Terminal terminal = Terminal::budget_exhausted;
};

struct ParamClass {
    std::variant<Attracting, Escaping, VirtualCycleParameter, Undetermined> payload;

    Tag tag() const { return static_cast<Tag>(payload.index()); }
    const Attracting* attracting() const { return std::get_if<Attracting>(&payload); }
    const Escaping* escaping() const { return std::get_if<Escaping>(&payload); }
    const VirtualCycleParameter* virtual_cycle() const { return std::get_if<VirtualCycleParameter>(&payload); }
};

namespace detail {

/// The orbit stopped on a phase-lost point in the left tract right after
/// passing within zero_eps of 0: the alternation towards {0, -inf} outran
/// double precision.
inline bool saturated_escape(const std::vector<cplx>& pts, const EngineConfig& c) {
    if (pts.size() < 3) return false;
    cplx last = pts.back(), prev = pts[pts.size() - 2];
    return last.real() < -c.escape_M && std::abs(prev) < c.zero_eps;
}

}  // namespace detail

/// Precedence: virtual cycle parameter, attracting cycle, escaping, undetermined.
inline ParamClass classify_parameter(cplx lam, int budget, int max_period, const EngineConfig& c = {}) {
    detail::require_parameter(lam);
    OrbitScan s = scan_orbit(lam, budget, max_period, c);

    if (s.terminal == Terminal::pole_hit) {
        const cplx hit = s.points.back();
        const double k = detail::reduce(hit).k;
        if (k != 0.0) {
            PrepoleAddress a;
            for (std::size_t j = 0; j + 1 < s.points.size(); ++j)
                a.entries.push_back(static_cast<int>(strip_index(s.points[j])));
            a.entries.push_back(static_cast<int>(k));
            return {VirtualCycleParameter{std::move(a)}};
        }
        return {Undetermined{s.terminal}};
    }

    if (s.cycle) {
        Attracting at{*s.cycle, std::nullopt, {}};
        try {
            at.kneading = kneading_of(lam, at.cycle, c);
        } catch (const std::exception& e) {
            at.kneading_failure = e.what();
        }
        return {std::move(at)};
    }

    if (s.terminal == Terminal::overflow && detail::saturated_escape(s.points, c))
        return {Escaping{static_cast<int>(s.points.size()), true}};
    if (alternation_window(s.points, c)) return {Escaping{static_cast<int>(s.points.size()), false}};
    return {Undetermined{s.terminal}};
}

inline ParamClass classify_parameter(cplx lam, const EngineConfig& c = {}) {
    return classify_parameter(lam, c.param_budget, c.max_period, c);
}

}  // namespace polardyn
