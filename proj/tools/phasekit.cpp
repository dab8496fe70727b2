// phasekit command-line front end: grid scans, boundary traces,
// multicritical search, single-point full ED and the invariant self-check.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "phasekit/ed_full.hpp"
#include "phasekit/scan.hpp"
#include "phasekit/selfcheck.hpp"

namespace {

using namespace phasekit;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kPointFailures = 2;

struct Options {
    std::string method{"mean-field"};
    std::string backend{"chain-ed"};
    double j_min{-0.6}, j_max{0.6};
    int j_steps{61};
    double g_min{0.0}, g_max{1.0};
    int g_steps{51};
    double omega{1.0}, eps{1.0};
    int n_sites{0};  // 0: 16 for chain-ED, 8 for full ED
    int n_max{16};
    double tol_jump{1e-2};
    double width{0.02};
    double j{0.0}, g{0.0};
    std::string out{"-"};
    int threads{0};
};

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("PHASEKIT_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
        throw ParamError("PHASEKIT_THREADS must be a positive integer");
    }
    return 1;
}

// Writes through a file or stdout when the path is "-".
template <class Fn>
void emit(const std::string& path, Fn&& write) {
    if (path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParamError("cannot open '" + path + "' for writing");
    write(f);
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

ToleranceSet tolerances(const Options& o) {
    ToleranceSet t;
    t.tol_jump = o.tol_jump;
    t.validate();
    return t;
}

int cmd_scan(const Options& o) {
    ScanSpec s;
    s.method = method_from_string(o.method);
    s.j_range = {o.j_min, o.j_max, o.j_steps};
    s.g_range = {o.g_min, o.g_max, o.g_steps};
    s.omega = o.omega;
    s.eps = o.eps;
    s.backend = backend_from_string(o.backend, o.n_sites > 0 ? o.n_sites : 16);
    s.ed_spins = o.n_sites > 0 ? o.n_sites : 8;
    s.ed_n_max = o.n_max;
    s.tolerances = tolerances(o);
    s.threads = resolve_threads(o.threads);
    s.validate();

    const auto rows = run_scan(s);
    emit(o.out, [&](std::ostream& os) { write_csv(os, rows); });
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.failed() ? 1 : 0;
    if (failed > 0) {
        std::cerr << failed << " of " << rows.size() << " points failed; see the flags column\n";
        return kPointFailures;
    }
    return kOk;
}

int cmd_trace(const Options& o, double g_search) {
    TraceSpec s;
    s.method = method_from_string(o.method);
    s.backend = backend_from_string(o.backend, o.n_sites > 0 ? o.n_sites : 16);
    s.omega = o.omega;
    s.eps = o.eps;
    s.tolerances = tolerances(o);
    s.g_max = g_search;
    s.threads = resolve_threads(o.threads);
    const AxisRange js{o.j_min, o.j_max, o.j_steps};
    if (js.steps < 1 || js.min > js.max) throw ParamError("J range must satisfy min <= max with at least one point");
    std::vector<double> j_list;
    for (int i = 0; i < js.steps; ++i) j_list.push_back(js.at(i));

    const auto trace = trace_boundary(s, j_list);
    emit(o.out, [&](std::ostream& os) { os << to_json(trace).dump(2) << '\n'; });
    for (const auto& e : trace)
        if (e.error) return kPointFailures;
    return kOk;
}

int cmd_multicritical(const Options& o) {
    const Backend b = backend_from_string(o.backend, o.n_sites > 0 ? o.n_sites : 16);
    const ModelParams tmpl{o.omega, o.eps, 0.0, 0.0};
    validate_params(tmpl);
    const auto report = find_multicritical(tmpl, b, o.j_min, o.j_max, tolerances(o), o.width);
    emit(o.out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    return report["status"] == "ok" ? kOk : kPointFailures;
}

int cmd_ed_point(const Options& o) {
    EDConfig c;
    c.n_spins = o.n_sites > 0 ? o.n_sites : 8;
    c.n_max = o.n_max;
    const ModelParams p{o.omega, o.eps, o.g, o.j};
    validate_params(p);
    validate_ed_config(c);
    const EDResult r = converge_nmax(p, c, 1e-8);
    nlohmann::json out{{"j", o.j},
                       {"g", o.g},
                       {"omega", o.omega},
                       {"eps", o.eps},
                       {"n_spins", r.n_spins},
                       {"n_max", r.n_max},
                       {"nmax_converged", r.nmax_converged},
                       {"energy_per_site", r.energy_per_site},
                       {"photon_density", r.photon_density},
                       {"quad_fluct", r.quad_fluct},
                       {"s_pi", r.s_pi},
                       {"m_x", r.mx},
                       {"m_x_rms", r.mx_rms},
                       {"m_z", r.mz},
                       {"parity", r.parity},
                       {"residual", r.residual}};
    emit(o.out, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
    return r.nmax_converged ? kOk : kPointFailures;
}

int cmd_selfcheck() {
    bool all = true;
    for (const auto& c : run_selfcheck()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        all = all && c.passed;
    }
    return all ? kOk : kPointFailures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dicke-Ising phase-diagram toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Plain key=value file; command-line flags take precedence");

    Options o;
    app.add_option("--method", o.method, "mean-field | effective | ed-full");
    app.add_option("--backend", o.backend, "Effective-chain backend: free-fermion | chain-ed");
    auto* j_min = app.add_option("--j-min", o.j_min, "Lowest J (J > 0 ferromagnetic)");
    auto* j_max = app.add_option("--j-max", o.j_max, "Highest J");
    app.add_option("--j-steps", o.j_steps, "Points along J");
    app.add_option("--g-min", o.g_min, "Lowest coupling g");
    auto* g_max = app.add_option("--g-max", o.g_max, "Highest g (trace: search limit)");
    app.add_option("--g-steps", o.g_steps, "Points along g");
    app.add_option("--omega", o.omega, "Photon frequency");
    app.add_option("--eps", o.eps, "Longitudinal field");
    app.add_option("--n-sites", o.n_sites, "Chain length (chain-ED 16, full ED 8 by default)");
    app.add_option("--n-max", o.n_max, "Photon truncation for full ED");
    app.add_option("--tol-jump", o.tol_jump, "Jump above which a transition counts as first order");
    app.add_option("--width", o.width, "J bracket target for the multicritical search");
    app.add_option("--j", o.j, "J for ed-point");
    app.add_option("--g", o.g, "g for ed-point");
    app.add_option("--out", o.out, "Output path, '-' for stdout");
    app.add_option("--threads", o.threads, "Worker threads (falls back to PHASEKIT_THREADS)");

    auto* scan = app.add_subcommand("scan", "Grid scan over (J, g) to CSV")->fallthrough();
    auto* trace = app.add_subcommand("trace", "Boundary points per J to JSON")->fallthrough();
    auto* multi = app.add_subcommand("multicritical", "Effective-chain search for the change of transition order in J")->fallthrough();
    auto* ed_point = app.add_subcommand("ed-point", "Full ED at one (J, g)")->fallthrough();
    auto* selfcheck = app.add_subcommand("selfcheck", "Run the invariant suite")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*scan) return cmd_scan(o);
        if (*trace) {
            // a single given end traces that one J
            if (j_min->count() && !j_max->count()) o.j_max = o.j_min, o.j_steps = 1;
            if (j_max->count() && !j_min->count()) o.j_min = o.j_max, o.j_steps = 1;
            return cmd_trace(o, g_max->count() ? o.g_max : 3.0);
        }
        if (*multi) {
            if (!j_min->count()) o.j_min = 0.25;
            if (!j_max->count()) o.j_max = 1.0;
            return cmd_multicritical(o);
        }
        if (*ed_point) return cmd_ed_point(o);
        if (*selfcheck) return cmd_selfcheck();
    } catch (const ParamError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kPointFailures;
    }
    return kUsage;
}
