#include "phasekit/scan.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "phasekit/ed_full.hpp"
#include "phasekit/mean_field.hpp"
#include "phasekit/parallel.hpp"

namespace phasekit {

namespace {

constexpr const char* kHeader = "j,g,energy,alpha_or_h,m_x,m_z,stag,label,method,flags";

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Flags live in one CSV cell: no separators or line breaks.
std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
    return s;
}

std::string method_tag(const ScanSpec& s) {
    switch (s.method) {
        case Method::MeanField: return "mean-field";
        case Method::Effective: return "effective:" + s.backend.name();
        case Method::EdFull: return "ed-full(" + std::to_string(s.ed_spins) + "," + std::to_string(s.ed_n_max) + ")";
    }
    return "";
}

ScanRecord failed_record(double j, double g, const std::string& method, const std::exception& e) {
    ScanRecord r;
    r.j = j;
    r.g = g;
    r.energy = r.alpha_or_h = r.m_x = r.m_z = r.stag = nan();
    r.method = method;
    r.flags = sanitize(std::string("error:") + e.what());
    return r;
}

ScanRecord mean_field_record(const ModelParams& p, const ToleranceSet& t) {
    const MeanFieldSolution sol = mf_minimize(p, t);
    ScanRecord r;
    r.energy = sol.energy;
    r.alpha_or_h = sol.orders.photon_displacement;
    r.m_x = sol.orders.mx;
    r.m_z = sol.orders.mz;
    r.stag = sol.orders.m_stag;
    r.label = sol.label;
    r.flags = sol.coexistent ? "coexistent" : "ok";
    return r;
}

ScanRecord effective_record(const ModelParams& p, const ChainLandscape& land, const ToleranceSet& t) {
    const SelfConsistentSolution sol = minimize_h(p, land, t);
    ScanRecord r;
    r.energy = sol.energy;
    r.alpha_or_h = sol.orders.photon_displacement;
    r.m_x = sol.orders.mx;
    r.m_z = sol.orders.mz;
    r.stag = sol.orders.m_stag;
    r.label = sol.label;
    r.flags = sol.coexistent ? "coexistent" : "ok";
    return r;
}

// A parity-symmetric finite ground state has <a> = <s^x> = 0, so the
// superradiant indicators are magnitudes: sqrt(<a^dag a>/N) and the rms
// transverse polarization, both reported only once the cavity holds at
// least one photon. Antiferromagnetic order uses the finite-chain s_pi test.
ScanRecord ed_full_record(const ModelParams& p, const ScanSpec& s, const ToleranceSet& t) {
    EDConfig c;
    c.n_spins = s.ed_spins;
    c.n_max = s.ed_n_max;
    c.compute_gap = false;
    const EDResult ed = ed_full_ground(p, c);
    const bool macroscopic = ed.photon_density * ed.n_spins >= 1.0;

    OrderParams o;
    o.photon_displacement = macroscopic ? -std::sqrt(ed.photon_density) : 0.0;
    o.mx = macroscopic ? ed.mx_rms : ed.mx;
    o.mz = ed.mz;
    o.m_stag = ed.s_pi >= afm_structure_threshold(ed.n_spins) ? std::sqrt(ed.s_pi) : 0.0;

    ScanRecord r;
    r.energy = ed.energy_per_site;
    r.alpha_or_h = o.photon_displacement;
    r.m_x = o.mx;
    r.m_z = o.mz;
    r.stag = o.m_stag;
    r.label = classify_orders(o, t);
    r.flags = "proxy";
    return r;
}

double parse_double(const std::string& s) {
    if (s == "nan" || s == "-nan") return nan();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters in number '" + s + "'");
    return v;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::MeanField: return "mean-field";
        case Method::Effective: return "effective";
        case Method::EdFull: return "ed-full";
    }
    return "";
}

Method method_from_string(std::string_view text) {
    if (text == "mean-field") return Method::MeanField;
    if (text == "effective") return Method::Effective;
    if (text == "ed-full") return Method::EdFull;
    throw ParamError("unknown method '" + std::string(text) + "' (mean-field, effective, ed-full)");
}

Backend backend_from_string(std::string_view text, int n_sites) {
    if (text == "free-fermion") return Backend::free_fermion();
    if (text == "chain-ed") {
        validate_chain({0.0, 0.0, 0.0, n_sites});
        return Backend::chain_ed(n_sites);
    }
    throw ParamError("unknown backend '" + std::string(text) + "' (free-fermion, chain-ed)");
}

double AxisRange::at(int i) const {
    if (steps == 1) return min;
    if (i == steps - 1) return max;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

void ScanSpec::validate() const {
    for (const auto* r : {&j_range, &g_range}) {
        const char* name = r == &j_range ? "J" : "g";
        if (!std::isfinite(r->min) || !std::isfinite(r->max))
            throw ParamError(std::string(name) + " range must be finite");
        if (r->steps < 1) throw ParamError(std::string(name) + " range needs at least one point");
        if (r->steps == 1 && r->min != r->max)
            throw ParamError(std::string(name) + " range with one point needs min == max");
        if (r->min > r->max) throw ParamError(std::string(name) + " range must satisfy min <= max");
    }
    if (g_range.min < 0.0) throw ParamError("g must be nonnegative");
    validate_params({omega, eps, g_range.min, j_range.min});
    tolerances.validate();
    if (threads < 1) throw ParamError("threads must be at least 1");
    if (method == Method::Effective) {
        if (backend.kind == Backend::Kind::FreeFermion && eps != 0.0)
            throw ParamError("free-fermion backend requires eps = 0");
        if (backend.kind == Backend::Kind::ChainEd) validate_chain({eps, 0.0, 0.0, backend.n_sites});
    }
    if (method == Method::EdFull) {
        EDConfig c;
        c.n_spins = ed_spins;
        c.n_max = ed_n_max;
        validate_ed_config(c);
    }
}

std::vector<ScanRecord> run_scan(const ScanSpec& s) {
    s.validate();
    const auto nj = static_cast<std::size_t>(s.j_range.steps);
    const auto ng = static_cast<std::size_t>(s.g_range.steps);
    const std::string tag = method_tag(s);
    std::vector<ScanRecord> rows(nj * ng);

    auto point = [&](std::size_t k, const ChainLandscape* land) {
        const double j = s.j_range.at(static_cast<int>(k / ng));
        const double g = s.g_range.at(static_cast<int>(k % ng));
        const ModelParams p{s.omega, s.eps, g, j};
        ScanRecord r;
        try {
            switch (s.method) {
                case Method::MeanField: r = mean_field_record(p, s.tolerances); break;
                case Method::Effective: r = effective_record(p, *land, s.tolerances); break;
                case Method::EdFull: r = ed_full_record(p, s, s.tolerances); break;
            }
        } catch (const std::exception& e) {
            r = failed_record(j, g, tag, e);
        }
        r.j = j;
        r.g = g;
        r.method = tag;
        rows[k] = std::move(r);
    };

    if (s.method == Method::Effective) {
        // one landscape per J row, shared by every g on that row
        parallel_for(nj, s.threads, [&](std::size_t row) {
            std::unique_ptr<ChainLandscape> land;
            try {
                land = std::make_unique<ChainLandscape>(s.eps, s.j_range.at(static_cast<int>(row)), s.backend);
            } catch (const std::exception& e) {
                for (std::size_t c = 0; c < ng; ++c)
                    rows[row * ng + c] = failed_record(s.j_range.at(static_cast<int>(row)),
                                                       s.g_range.at(static_cast<int>(c)), tag, e);
                return;
            }
            for (std::size_t c = 0; c < ng; ++c) point(row * ng + c, land.get());
        });
    } else {
        parallel_for(nj * ng, s.threads, [&](std::size_t k) { point(k, nullptr); });
    }
    return rows;
}

std::string format_float(double v) {
    if (std::isnan(v)) return "nan";
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_csv(std::ostream& os, const std::vector<ScanRecord>& rows) {
    os << kHeader << '\n';
    for (const auto& r : rows) {
        os << format_float(r.j) << ',' << format_float(r.g) << ',' << format_float(r.energy) << ','
           << format_float(r.alpha_or_h) << ',' << format_float(r.m_x) << ',' << format_float(r.m_z) << ','
           << format_float(r.stag) << ',' << to_string(r.label) << ',' << r.method << ','
           << (r.flags.empty() ? "ok" : r.flags) << '\n';
    }
}

std::vector<ScanRecord> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kHeader) throw ParamError("CSV header does not match the scan contract");
    std::vector<ScanRecord> rows;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != 10) throw ParamError("CSV line " + std::to_string(line_no) + " does not have 10 columns");
        try {
            ScanRecord r;
            r.j = parse_double(cells[0]);
            r.g = parse_double(cells[1]);
            r.energy = parse_double(cells[2]);
            r.alpha_or_h = parse_double(cells[3]);
            r.m_x = parse_double(cells[4]);
            r.m_z = parse_double(cells[5]);
            r.stag = parse_double(cells[6]);
            r.label = phase_label_from_string(cells[7]);
            r.method = cells[8];
            r.flags = cells[9];
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw ParamError("CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

nlohmann::json to_json(const TransitionPoint& tp) {
    nlohmann::json trend = nlohmann::json::array();
    for (const auto& [n, jump] : tp.jump_trend) trend.push_back({{"n_sites", n}, {"jump", jump}});
    return {{"j", tp.j},
            {"g_c", tp.g_c},
            {"order", std::string(to_string(tp.order))},
            {"jump", tp.jump},
            {"bracket_width", tp.bracket_width},
            {"below", std::string(to_string(tp.below))},
            {"above", std::string(to_string(tp.above))},
            {"coexistent", tp.coexistent},
            {"coexistence_gap", tp.coexistence_gap},
            {"backend", tp.backend},
            {"jump_trend", trend}};
}

namespace {

std::vector<TransitionPoint> mean_field_trace(const ModelParams& tmpl, const TraceSpec& s) {
    const ClassicalGround cg = classical_ground(tmpl.with_g(0.0));
    if (cg.label == PhaseLabel::AFM_N) {
        if (auto w = mf_intermediate_window(tmpl, s.tolerances, 1e-3, s.g_max)) return {w->lower, w->upper};
    }
    // Every label change along g; a tied g = 0 point is not a boundary.
    const auto labels = mf_label_scan(tmpl, s.tolerances, 1e-2, s.g_max);
    std::vector<TransitionPoint> out;
    for (std::size_t i = cg.degenerate ? 2 : 1; i < labels.size(); ++i) {
        if (labels[i].second != labels[i - 1].second)
            out.push_back(mf_boundary_bisect(tmpl, labels[i - 1].first, labels[i].first, s.tolerances));
    }
    if (out.empty()) throw BracketError("no label change for g <= " + format_float(s.g_max));
    return out;
}

}  // namespace

std::vector<TraceEntry> trace_boundary(const TraceSpec& s, const std::vector<double>& j_list) {
    s.tolerances.validate();
    if (s.method == Method::EdFull) throw ParamError("boundary tracing supports mean-field and effective methods");
    if (!(s.g_max > 0.0)) throw ParamError("g_max must be positive");
    std::vector<TraceEntry> out(j_list.size());
    // workers split the J list; each locate stays single-threaded
    parallel_for(j_list.size(), s.threads, [&](std::size_t i) {
        TraceEntry& e = out[i];
        e.j = j_list[i];
        const ModelParams tmpl{s.omega, s.eps, 0.0, e.j};
        try {
            validate_params(tmpl);
            if (s.method == Method::MeanField) {
                e.points = mean_field_trace(tmpl, s);
            } else {
                e.points = {locate_transition_g(tmpl, s.backend, s.tolerances)};
            }
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
    });
    return out;
}

nlohmann::json to_json(const std::vector<TraceEntry>& trace) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : trace) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& tp : e.points) pts.push_back(to_json(tp));
        nlohmann::json item{{"j", e.j}, {"points", pts}};
        item["error"] = e.error ? nlohmann::json(*e.error) : nlohmann::json(nullptr);
        arr.push_back(item);
    }
    return arr;
}

nlohmann::json find_multicritical(const ModelParams& tmpl, const Backend& b, double j_lo, double j_hi,
                                  const ToleranceSet& t, double width) {
    nlohmann::json report{{"backend", b.name()}, {"bracket", {j_lo, j_hi}}, {"width", width}};
    auto probes_json = [](const std::vector<TransitionPoint>& probes) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& tp : probes) arr.push_back(to_json(tp));
        return arr;
    };
    try {
        const MulticriticalResult r = locate_multicritical(tmpl, b, j_lo, j_hi, t, width);
        report["status"] = "ok";
        report["j_mc"] = r.j_mc;
        report["j_second_order_side"] = r.j_lo;
        report["j_first_order_side"] = r.j_hi;
        report["probes"] = probes_json(r.probes);
    } catch (const MulticriticalBracketError& e) {
        report["status"] = "error";
        report["error"] = e.what();
        report["probes"] = probes_json(e.probes());
    }
    return report;
}

}  // namespace phasekit
