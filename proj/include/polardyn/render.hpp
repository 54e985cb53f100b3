#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "classify.hpp"

namespace polardyn {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB raster.
struct ImageBuffer {
    int cols = 0;
    int rows = 0;
    std::vector<std::uint8_t> pixels;

    ImageBuffer() = default;
    ImageBuffer(int c, int r) : cols(c), rows(r), pixels(static_cast<std::size_t>(c) * r * 3, 0) {}

    Rgb at(int x, int y) const {
        auto i = index(x, y);
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        auto i = index(x, y);
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
    }
    ImageBuffer flipped_vertically() const {
        ImageBuffer out(cols, rows);
        for (int y = 0; y < rows; ++y)
            for (int x = 0; x < cols; ++x) out.set(x, rows - 1 - y, at(x, y));
        return out;
    }
    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t index(int x, int y) const { return (static_cast<std::size_t>(y) * cols + x) * 3; }
};

enum class RenderMode { parameter, dynamical };

struct Window {
    cplx center{0.0, 0.0};
    double width = 20.0;
    double height = 20.0;
};

struct RenderJob {
    RenderMode mode = RenderMode::parameter;
    cplx lambda{0.0, 0.0};  // dynamical mode only
    Window window;
    int cols = 256;
    int rows = 256;
    int budget = 0;  // 0: the engine default for the mode
    int max_period = 0;
    std::uint64_t palette_seed = 0;
    bool signed_palette = true;
    int threads = 0;  // 0: hardware concurrency

    void validate() const {
        if (!(window.width > 0.0) || !(window.height > 0.0)) throw config_error("window must have positive size");
        if (cols < 1 || rows < 1) throw config_error("resolution must be at least 1x1");
        if (budget < 0 || max_period < 0 || threads < 0) throw config_error("negative budget or thread count");
    }
};

/// Affine pixel map; (0,0) is the top-left corner and (cols-1, rows-1) the
/// bottom-right one. Written so that rows py and rows-1-py are exact
/// conjugates when the center is real.
inline cplx pixel_point(const RenderJob& job, int px, int py) {
    const auto& w = job.window;
    double fx = job.cols > 1 ? static_cast<double>(2 * px - (job.cols - 1)) / (job.cols - 1) : 0.0;
    double fy = job.rows > 1 ? static_cast<double>((job.rows - 1) - 2 * py) / (job.rows - 1) : 0.0;
    return {w.center.real() + 0.5 * w.width * fx, w.center.imag() + 0.5 * w.height * fy};
}

// ---------------------------------------------------------------------------
// Palette

namespace palette {

inline constexpr Rgb escaping{16, 16, 24};
inline constexpr Rgb virtual_cycle{255, 255, 255};
inline constexpr Rgb undetermined{128, 128, 128};
inline constexpr Rgb sentinel{255, 0, 255};
inline constexpr Rgb julia{0, 0, 0};
inline constexpr Rgb pole{255, 255, 255};
inline constexpr Rgb orbit_escape{96, 0, 0};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Periods 1-9 have fixed colours; other periods hash (period, seed).
inline Rgb period_color(int period, std::uint64_t seed) {
    static constexpr Rgb table[] = {
        {255, 221, 0},    // 1 yellow
        {0, 215, 225},    // 2 cyan
        {220, 30, 30},    // 3 red
        {240, 230, 140},  // 4 khaki
        {30, 170, 60},    // 5 green
        {65, 105, 225},   // 6 royal blue
        {10, 20, 140},    // 7 dark blue
        {190, 70, 200},   // 8 violet
        {255, 140, 0},    // 9 orange
    };
    if (period >= 1 && period <= 9) return table[period - 1];
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(period) ^ splitmix64(seed));
    return {static_cast<std::uint8_t>(64 + (h & 0xbf)), static_cast<std::uint8_t>(64 + ((h >> 8) & 0xbf)),
            static_cast<std::uint8_t>(64 + ((h >> 16) & 0xbf))};
}

inline Rgb scale(Rgb c, double f) {
    auto s = [f](std::uint8_t v) { return static_cast<std::uint8_t>(std::clamp(v * f + 0.5, 0.0, 255.0)); };
    return {s(c.r), s(c.g), s(c.b)};
}

inline Rgb basin_shade(Rgb base, int component, int period) {
    return scale(base, 1.0 - 0.45 * component / period);
}

inline Rgb mix(Rgb a, Rgb b, double t) {
    auto m = [t](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::clamp(x + (y - x) * t + 0.5, 0.0, 255.0));
    };
    return {m(a.r, b.r), m(a.g, b.g), m(a.b, b.b)};
}

/// Colour of an attracting class. sign is the sign of the first nonzero digit
/// and only matters when the palette is signed.
inline Rgb attracting_color(int period, std::optional<SequenceType> type, int sign, std::uint64_t seed,
                            bool signed_digits) {
    Rgb c = period_color(period, seed);
    if (!type) c = scale(c, 0.5);
    else if (*type == SequenceType::unipolar) c = scale(c, 0.8);
    else if (*type == SequenceType::hybrid) c = scale(c, 0.62);
    if (signed_digits && sign < 0) c = mix(c, Rgb{255, 255, 255}, 0.3);
    return c;
}

}  // namespace palette

inline int first_digit_sign(const std::vector<int>& d) {
    for (int k : d)
        if (k != 0) return k > 0 ? 1 : -1;
    return 0;
}

// ---------------------------------------------------------------------------
// Parallel row scheduling

inline int resolve_threads(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("POLARDYN_THREADS")) {
        try {
            long long cap = parse_int(env);
            if (cap > 0) n = std::min<long long>(n, cap);
        } catch (const config_error&) {
        }
    }
    return n;
}

/// Runs body(row) for every row on up to `threads` workers. Rows are
/// independent, so the result does not depend on the schedule.
template <class Body>
void parallel_rows(int rows, int threads, Body&& body) {
    threads = std::max(1, std::min(threads, rows));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next.fetch_add(1); r < rows; r = next.fetch_add(1)) body(r);
    };
    if (threads == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Parameter plane

struct TableRow {
    int px = 0, py = 0;
    cplx lambda;
    Tag tag = Tag::undetermined;
    int period = 0;
    cplx multiplier{0.0, 0.0};
    std::vector<int> digits;
    std::optional<SequenceType> type;
};

inline TableRow table_row(int px, int py, cplx lam, const ParamClass& pc) {
    TableRow row{px, py, lam, pc.tag(), 0, {0.0, 0.0}, {}, std::nullopt};
    if (auto a = pc.attracting()) {
        row.period = a->cycle.period;
        row.multiplier = a->cycle.multiplier;
        if (a->kneading) {
            row.digits = a->kneading->digits;
            row.type = a->kneading->type;
        }
    } else if (auto v = pc.virtual_cycle()) {
        row.period = static_cast<int>(v->address.entries.size()) + 1;
        row.digits = v->address.entries;
    }
    return row;
}

inline Rgb class_color(const TableRow& row, std::uint64_t seed, bool signed_digits) {
    switch (row.tag) {
        case Tag::attracting:
            return palette::attracting_color(row.period, row.type, first_digit_sign(row.digits), seed, signed_digits);
        case Tag::escaping: return palette::escaping;
        case Tag::virtual_cycle_parameter: return palette::virtual_cycle;
        case Tag::undetermined: return palette::undetermined;
    }
    return palette::undetermined;
}

struct ParamRender {
    ImageBuffer image;
    std::vector<TableRow> table;  // row-major, one entry per pixel
};

inline ParamRender render_param_plane(const RenderJob& job, const EngineConfig& c = {}) {
    job.validate();
    if (job.mode != RenderMode::parameter) throw config_error("render_param_plane needs a parameter job");
    const int budget = job.budget > 0 ? job.budget : c.param_budget;
    const int maxp = job.max_period > 0 ? job.max_period : c.max_period;
    ParamRender out{ImageBuffer(job.cols, job.rows), std::vector<TableRow>(static_cast<std::size_t>(job.cols) * job.rows)};
    parallel_rows(job.rows, resolve_threads(job.threads), [&](int py) {
        for (int px = 0; px < job.cols; ++px) {
            cplx lam = pixel_point(job, px, py);
            auto& row = out.table[static_cast<std::size_t>(py) * job.cols + px];
            if (lam == cplx(0.0, 0.0)) {
                row = TableRow{px, py, lam, Tag::undetermined, 0, {0.0, 0.0}, {}, std::nullopt};
                out.image.set(px, py, palette::sentinel);
                continue;
            }
            try {
                row = table_row(px, py, lam, classify_parameter(lam, budget, maxp, c));
            } catch (const std::exception&) {
                row = TableRow{px, py, lam, Tag::undetermined, 0, {0.0, 0.0}, {}, std::nullopt};
            }
            out.image.set(px, py, class_color(row, job.palette_seed, job.signed_palette));
        }
    });
    return out;
}

/// The colouring with digit signs ignored, rebuilt from a classification table.
inline ImageBuffer recolor_unsigned(const std::vector<TableRow>& table, int cols, int rows, std::uint64_t seed) {
    ImageBuffer img(cols, rows);
    for (const auto& row : table)
        img.set(row.px, row.py,
                row.lambda == cplx(0.0, 0.0) ? palette::sentinel : class_color(row, seed, false));
    return img;
}

// ---------------------------------------------------------------------------
// Dynamical plane

inline ImageBuffer render_dyn_plane(const RenderJob& job, const EngineConfig& c = {}) {
    job.validate();
    if (job.mode != RenderMode::dynamical) throw config_error("render_dyn_plane needs a dynamical job");
    const cplx lam = job.lambda;
    detail::require_parameter(lam);
    const int budget = job.budget > 0 ? job.budget : c.dyn_budget;
    const int maxp = job.max_period > 0 ? job.max_period : c.max_period;
    const auto cycle = detect_cycle(lam, c.param_budget, maxp, c);
    const Rgb base = cycle ? palette::period_color(cycle->period, job.palette_seed) : palette::undetermined;

    const double dx = job.cols > 1 ? job.window.width / (job.cols - 1) : job.window.width;
    const double dy = job.rows > 1 ? job.window.height / (job.rows - 1) : job.window.height;
    const double pole_radius = 0.5 * std::max(dx, dy);

    ImageBuffer img(job.cols, job.rows);
    parallel_rows(job.rows, resolve_threads(job.threads), [&](int py) {
        std::vector<cplx> pts;
        for (int px = 0; px < job.cols; ++px) {
            const cplx z0 = pixel_point(job, px, py);
            const auto red = detail::reduce(z0);
            if (std::abs(red.z) <= pole_radius) {
                img.set(px, py, palette::pole);
                continue;
            }
            Rgb color = cycle ? palette::julia : palette::undetermined;
            pts.clear();
            pts.push_back(z0);
            cplx z = z0;
            for (int t = 0; t < budget; ++t) {
                if (cycle) {
                    bool hit = false;
                    for (int j = 0; j < cycle->period && !hit; ++j) {
                        const cplx q = cycle->cycle[j];
                        if (std::abs(z - q) < c.basin_tol * detail::scale_of(q)) {
                            // z0 lies in the basin component of cycle point j - t
                            int comp = ((j - t) % cycle->period + cycle->period) % cycle->period;
                            color = palette::basin_shade(base, comp, cycle->period);
                            hit = true;
                        }
                    }
                    if (hit) break;
                }
                auto v = eval(lam, z, c);
                if (v.at_infinity) {
                    color = palette::pole;
                    break;
                }
                z = v.value();
                if (!cycle) pts.push_back(z);
                if (detail::phase_lost(z, c)) {
                    if (!cycle && detail::saturated_escape(pts, c)) color = palette::orbit_escape;
                    break;
                }
            }
            if (!cycle && color == palette::undetermined && alternation_window(pts, c)) color = palette::orbit_escape;
            img.set(px, py, color);
        }
    });
    return img;
}

// ---------------------------------------------------------------------------
// Job files

/// Reads a flat key=value job. Engine keys go to `engine`; anything else
/// unknown is an error.
inline RenderJob read_render_job(std::istream& in, EngineConfig& engine) {
    RenderJob job;
    for (const auto& kv : read_key_values(in)) {
        const std::string& k = kv.key;
        const std::string& v = kv.value;
        if (k == "mode") {
            if (v == "parameter") job.mode = RenderMode::parameter;
            else if (v == "dynamical") job.mode = RenderMode::dynamical;
            else throw config_error("line " + std::to_string(kv.line) + ": mode must be parameter or dynamical");
        } else if (k == "lambda") job.lambda = parse_complex(v);
        else if (k == "center") job.window.center = parse_complex(v);
        else if (k == "width") job.window.width = parse_real(v);
        else if (k == "height") job.window.height = parse_real(v);
        else if (k == "cols") job.cols = static_cast<int>(parse_int(v));
        else if (k == "rows") job.rows = static_cast<int>(parse_int(v));
        else if (k == "budget") job.budget = static_cast<int>(parse_int(v));
        else if (k == "max_period") job.max_period = static_cast<int>(parse_int(v));
        else if (k == "palette_seed") job.palette_seed = static_cast<std::uint64_t>(parse_int(v));
        else if (k == "signed_palette") job.signed_palette = parse_bool(v);
        else if (k == "threads") job.threads = static_cast<int>(parse_int(v));
        else if (!apply_engine_key(engine, k, v))
            throw config_error("line " + std::to_string(kv.line) + ": unknown key '" + k + "'");
    }
    job.validate();
    engine.validate();
    return job;
}

// ---------------------------------------------------------------------------
// Output

inline void write_ppm(std::ostream& os, const ImageBuffer& img) {
    os << "P6\n" << img.cols << ' ' << img.rows << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

/// Twelve significant digits, independent of the C locale.
inline std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os, const std::vector<TableRow>& table) {
    os << "px,py,re_lambda,im_lambda,tag,period,mult_re,mult_im,digits\n";
    for (const auto& r : table) {
        os << r.px << ',' << r.py << ',' << format_real(r.lambda.real()) << ',' << format_real(r.lambda.imag()) << ','
           << to_string(r.tag) << ',' << r.period << ',' << format_real(r.multiplier.real()) << ','
           << format_real(r.multiplier.imag()) << ",\"" << join_digits(r.digits) << "\"\n";
    }
}

}  // namespace polardyn
