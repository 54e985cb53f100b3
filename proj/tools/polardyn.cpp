// polardyn: command-line front end for the f_lambda(z) = lambda / (1 - e^{-2z})
// engine. Exit codes: 0 success, 1 usage or configuration error,
// 2 undetermined classification or unconverged solve.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <polardyn/polardyn.hpp>

namespace {

using namespace polardyn;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_undetermined = 2;

std::string fmt(cplx z) {
    std::string im = format_real(std::abs(z.imag()));
    bool neg = std::signbit(z.imag());
    return format_real(z.real()) + (neg ? "-" : "+") + im + "i";
}

std::string kneading_text(const std::vector<int>& d) {
    std::string s = "*";
    for (int k : d) s += std::to_string(k);
    return s;
}

EngineConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    return read_engine_config(in);
}

int cmd_classify(const std::string& lambda_text, int budget, int max_period, const EngineConfig& cfg) {
    cplx lam = parse_complex(lambda_text);
    auto pc = classify_parameter(lam, budget > 0 ? budget : cfg.param_budget,
                                 max_period > 0 ? max_period : cfg.max_period, cfg);
    std::cout << "lambda: " << fmt(lam) << "\n" << "tag: " << to_string(pc.tag()) << "\n";
    if (auto a = pc.attracting()) {
        const auto& c = a->cycle;
        std::cout << "period: " << c.period << "\n"
                  << "multiplier: " << fmt(c.multiplier) << "\n"
                  << "log_multiplier: " << fmt(c.log_multiplier) << "\n"
                  << "representative: " << fmt(c.representative) << "\n"
                  << "residual: " << format_real(c.residual) << "\n";
        if (a->kneading) {
            std::cout << "kneading: " << kneading_text(a->kneading->digits) << "\n"
                      << "digits: " << join_digits(a->kneading->digits) << "\n"
                      << "type: " << to_string(a->kneading->type) << "\n";
        } else {
            std::cout << "kneading: unavailable (" << a->kneading_failure << ")\n";
        }
    } else if (auto e = pc.escaping()) {
        std::cout << "orbit_length: " << e->steps << "\n"
                  << "saturated: " << (e->saturated ? "true" : "false") << "\n";
    } else if (auto v = pc.virtual_cycle()) {
        std::cout << "address: " << join_digits(v->address.entries) << "\n";
    }
    return pc.tag() == Tag::undetermined ? exit_undetermined : exit_ok;
}

int cmd_vcsolve(const std::string& address_text, const std::string& seed_text, const EngineConfig& cfg) {
    PrepoleAddress a{parse_int_list(address_text)};
    if (a.entries.empty()) throw config_error("empty address");
    if (!is_allowable(a.entries))
        throw allowability_error("address " + join_digits(a.entries, ",") + " is not allowable");
    cplx seed = seed_text.empty() ? virtual_center_seed(a, cfg) : parse_complex(seed_text);
    cplx lam = solve_virtual_cycle_parameter(a, seed, cfg);
    double residual = 0.0;
    if (a.entries.size() > 1) {
        auto w = detail::forward(lam, lam, static_cast<int>(a.entries.size()) - 1, cfg);
        residual = w ? std::abs(*w - detail::pole_of(a.entries.back())) : INFINITY;
    }
    std::cout << "address: " << join_digits(a.entries) << "\n"
              << "lambda: " << fmt(lam) << "\n"
              << "residual: " << format_real(residual) << "\n";
    return exit_ok;
}

int cmd_prepole(const std::string& lambda_text, const std::string& address_text, const EngineConfig& cfg) {
    cplx lam = parse_complex(lambda_text);
    PrepoleAddress a{parse_int_list(address_text)};
    cplx p = prepole(lam, a, cfg);
    auto w = detail::forward(lam, p, static_cast<int>(a.entries.size()) - 1, cfg);
    std::cout << "prepole: " << fmt(p) << "\n"
              << "forward_residual: "
              << format_real(w ? std::abs(*w - detail::pole_of(a.entries.back())) : INFINITY) << "\n";
    return exit_ok;
}

int cmd_escape_cert(const std::string& lambda_text, int n, int i_max, const std::string& parity, int k, double M,
                    double eps, const EngineConfig& cfg) {
    cplx lam = parse_complex(lambda_text);
    StripSpec s;
    if (parity == "even") s.parity = Parity::even;
    else if (parity == "odd") s.parity = Parity::odd;
    else throw config_error("parity must be even or odd");
    s.k = k;
    s.M = M;
    s.eps = eps;
    s.center();
    auto cert = escaping_certificate(lam, n, i_max, {s}, cfg);
    std::cout << "certified: " << (cert.certified ? "true" : "false") << "\n"
              << "depth: " << cert.depth << "\n"
              << "overflowed: " << (cert.overflowed ? "true" : "false") << "\n";
    return exit_ok;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path);
    return out;
}

int cmd_render(const std::string& job_path, const std::string& ppm_path, const std::string& csv_path,
               RenderMode expected, EngineConfig cfg) {
    std::ifstream in(job_path);
    if (!in) throw config_error("cannot open job file " + job_path);
    RenderJob job = read_render_job(in, cfg);
    if (job.mode != expected)
        throw config_error(std::string("job mode must be ") + (expected == RenderMode::parameter ? "parameter" : "dynamical"));
    if (expected == RenderMode::dynamical) detail::require_parameter(job.lambda);
    auto ppm = open_out(ppm_path);
    std::ofstream csv;
    if (!csv_path.empty()) csv = open_out(csv_path);

    auto t0 = std::chrono::steady_clock::now();
    ImageBuffer img;
    std::vector<TableRow> table;
    if (expected == RenderMode::parameter) {
        auto r = render_param_plane(job, cfg);
        img = std::move(r.image);
        table = std::move(r.table);
    } else {
        img = render_dyn_plane(job, cfg);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_ppm(ppm, img);
    if (!ppm) throw config_error("write failed: " + ppm_path);
    if (csv.is_open()) {
        write_csv(csv, table);
        if (!csv) throw config_error("write failed: " + csv_path);
    }
    std::cout << "pixels: " << job.cols * job.rows << "\n"
              << "threads: " << resolve_threads(job.threads) << "\n"
              << "seconds: " << format_real(secs) << "\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polardyn: dynamics and parameter space of lambda / (1 - e^{-2z})"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key=value file overriding engine defaults");

    std::string lambda_text, address_text, seed_text, job_path, out_path, csv_path, parity = "even";
    int budget = 0, max_period = 0, n = 0, i_max = 4, k = 0;
    unsigned index = 0;
    double M = 10.0, eps = 0.1;

    auto* classify = app.add_subcommand("classify", "classify a parameter");
    classify->add_option("--lambda", lambda_text, "parameter, e.g. 2.0 or -7-1.5707963i")->required();
    classify->add_option("--budget", budget, "iteration budget");
    classify->add_option("--max-period", max_period, "largest cycle period searched");

    auto* vcsolve = app.add_subcommand("vcsolve", "solve for a virtual cycle parameter");
    vcsolve->add_option("--address", address_text, "prepole address, e.g. 1,1 or -2,-1")->required();
    vcsolve->add_option("--seed", seed_text, "Newton seed (default: prepole fixed-point iteration)");

    auto* pre = app.add_subcommand("prepole", "locate a prepole by address");
    pre->add_option("--lambda", lambda_text, "parameter (not real)")->required();
    pre->add_option("--address", address_text, "prepole address")->required();

    auto* cert = app.add_subcommand("escape-cert", "exponential-tower escape certificate");
    cert->add_option("--lambda", lambda_text, "parameter")->required();
    cert->add_option("--n", n, "orbit index of the starting point w_n");
    cert->add_option("--imax", i_max, "deepest tower level checked");
    cert->add_option("--parity", parity, "strip parity: even or odd");
    cert->add_option("--k", k, "strip index");
    cert->add_option("--M", M, "real-part threshold");
    cert->add_option("--eps", eps, "band margin in (0, pi/2)");

    auto* rparam = app.add_subcommand("render-param", "render the parameter plane");
    rparam->add_option("--job", job_path, "job file")->required();
    rparam->add_option("--out", out_path, "output PPM")->required();
    rparam->add_option("--csv", csv_path, "output classification table");

    auto* rdyn = app.add_subcommand("render-dyn", "render a dynamical plane");
    rdyn->add_option("--job", job_path, "job file")->required();
    rdyn->add_option("--out", out_path, "output PPM")->required();

    auto* zl = app.add_subcommand("zero-limit", "print a_i = lim_{lambda->0} w_{2i+1}");
    zl->add_option("--i", index, "index i")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        EngineConfig cfg = load_config(config_path);
        if (*classify) return cmd_classify(lambda_text, budget, max_period, cfg);
        if (*vcsolve) return cmd_vcsolve(address_text, seed_text, cfg);
        if (*pre) return cmd_prepole(lambda_text, address_text, cfg);
        if (*cert) return cmd_escape_cert(lambda_text, n, i_max, parity, k, M, eps, cfg);
        if (*rparam) return cmd_render(job_path, out_path, csv_path, RenderMode::parameter, cfg);
        if (*rdyn) return cmd_render(job_path, out_path, "", RenderMode::dynamical, cfg);
        if (*zl) {
            std::cout << "a_" << index << ": " << format_real(zero_limit_orbit(index).re) << "\n";
            return exit_ok;
        }
    } catch (const convergence_error& e) {
        std::cerr << "error: " << e.what() << " (last iterate " << fmt(e.last_iterate) << ")\n";
        return exit_undetermined;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
