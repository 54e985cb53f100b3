#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace polardyn {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every numerical threshold used by the engine. Passed by const reference,
/// never stored globally.
struct EngineConfig {
    double pole_snap = 1e-12;
    double pole_eps = 1e-14;
    double exp_guard = 350.0;
    double overflow_guard = 1e300;
    double phase_guard = 1e12;
    double coarse_tol = 1e-4;
    double cycle_tol = 1e-10;
    double zero_eps = 1e-8;
    double escape_M = 50.0;
    int escape_window = 25;
    int max_period = 64;
    int param_budget = 4000;
    int dyn_budget = 2000;
    int max_newton = 60;
    int newton_halvings = 8;
    double newton_tol = 1e-10;
    double basin_tol = 1e-6;
    int continuation_steps = 64;

    void validate() const {
        const std::pair<const char*, double> positive[] = {
            {"pole_snap", pole_snap},   {"pole_eps", pole_eps},
            {"exp_guard", exp_guard},   {"overflow_guard", overflow_guard},
            {"phase_guard", phase_guard}, {"coarse_tol", coarse_tol},
            {"cycle_tol", cycle_tol},   {"zero_eps", zero_eps},
            {"escape_M", escape_M},     {"newton_tol", newton_tol},
            {"basin_tol", basin_tol}};
        for (auto [name, v] : positive)
            if (!(v > 0.0)) throw config_error(std::string(name) + " must be positive");
        if (escape_window < 5) throw config_error("escape_window must be at least 5");
        if (max_period < 1) throw config_error("max_period must be at least 1");
        if (param_budget < 2 || dyn_budget < 2) throw config_error("budgets must be at least 2");
        if (max_newton < 1 || newton_halvings < 0) throw config_error("bad newton limits");
        if (continuation_steps < 4) throw config_error("continuation_steps must be at least 4");
    }
};

// ---------------------------------------------------------------------------
// Locale-independent scalar parsing.

namespace detail {

inline std::string_view trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view s, std::string_view what) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    T out{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
        throw config_error("cannot parse " + std::string(what) + ": '" + std::string(s) + "'");
    return out;
}

}  // namespace detail

inline double parse_real(std::string_view s) {
    double v = detail::parse_number<double>(s, "real");
    if (!std::isfinite(v)) throw config_error("non-finite real: '" + std::string(detail::trim(s)) + "'");
    return v;
}
inline long long parse_int(std::string_view s) { return detail::parse_number<long long>(s, "integer"); }

inline bool parse_bool(std::string_view s) {
    s = detail::trim(s);
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw config_error("cannot parse boolean: '" + std::string(s) + "'");
}

/// Parses `RE`, `IMi`, `RE+IMi` or `RE-IMi`, with optional whitespace.
inline std::complex<double> parse_complex(std::string_view text) {
    std::string s;
    for (char c : text)
        if (c != ' ' && c != '\t') s.push_back(c);
    if (s.empty()) throw config_error("empty complex literal");
    if (s.back() != 'i') return {parse_real(s), 0.0};
    s.pop_back();
    // find the sign separating real and imaginary parts (not an exponent sign)
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag_of = [](std::string_view t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_real(t);
    };
    if (split == std::string::npos) return {0.0, imag_of(s)};
    return {parse_real(std::string_view(s).substr(0, split)),
            imag_of(std::string_view(s).substr(split))};
}

/// Parses a comma- or whitespace-separated integer list such as "-2,-1".
inline std::vector<int> parse_int_list(std::string_view s) {
    std::vector<int> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(static_cast<int>(parse_int(cur)));
        cur.clear();
    };
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') flush();
        else cur.push_back(c);
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------
// Flat key=value files.

struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

inline std::vector<KeyValue> read_key_values(std::istream& in) {
    std::vector<KeyValue> out;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string_view s = detail::trim(std::string_view(raw).substr(0, hash));
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw config_error("line " + std::to_string(line) + ": expected key=value");
        auto key = detail::trim(s.substr(0, eq));
        if (key.empty()) throw config_error("line " + std::to_string(line) + ": empty key");
        out.push_back({std::string(key), std::string(detail::trim(s.substr(eq + 1))), line});
    }
    return out;
}

/// Applies one key to the engine configuration. Returns false when the key is
/// not an engine key, so callers can try their own tables before rejecting it.
inline bool apply_engine_key(EngineConfig& c, std::string_view key, std::string_view value) {
    using Field = std::variant<double EngineConfig::*, int EngineConfig::*>;
    static const std::pair<std::string_view, Field> table[] = {
        {"pole_snap", &EngineConfig::pole_snap},
        {"pole_eps", &EngineConfig::pole_eps},
        {"exp_guard", &EngineConfig::exp_guard},
        {"overflow_guard", &EngineConfig::overflow_guard},
        {"phase_guard", &EngineConfig::phase_guard},
        {"coarse_tol", &EngineConfig::coarse_tol},
        {"cycle_tol", &EngineConfig::cycle_tol},
        {"zero_eps", &EngineConfig::zero_eps},
        {"escape_M", &EngineConfig::escape_M},
        {"escape_window", &EngineConfig::escape_window},
        {"max_period", &EngineConfig::max_period},
        {"param_budget", &EngineConfig::param_budget},
        {"dyn_budget", &EngineConfig::dyn_budget},
        {"max_newton", &EngineConfig::max_newton},
        {"newton_halvings", &EngineConfig::newton_halvings},
        {"newton_tol", &EngineConfig::newton_tol},
        {"basin_tol", &EngineConfig::basin_tol},
        {"continuation_steps", &EngineConfig::continuation_steps},
    };
    auto it = std::find_if(std::begin(table), std::end(table),
                           [&](const auto& e) { return e.first == key; });
    if (it == std::end(table)) return false;
    std::visit(
        [&](auto member) {
            using T = std::remove_reference_t<decltype(c.*member)>;
            if constexpr (std::is_same_v<T, double>) c.*member = parse_real(value);
            else c.*member = static_cast<int>(parse_int(value));
        },
        it->second);
    return true;
}

inline EngineConfig read_engine_config(std::istream& in) {
    EngineConfig c;
    for (const auto& kv : read_key_values(in))
        if (!apply_engine_key(c, kv.key, kv.value))
            throw config_error("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    c.validate();
    return c;
}

}  // namespace polardyn
