#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasekit/effective.hpp"
#include "phasekit/model.hpp"
#include "phasekit/transition.hpp"

namespace phasekit {

enum class Method { MeanField, Effective, EdFull };

std::string_view to_string(Method m);
Method method_from_string(std::string_view text);

/// Parses "free-fermion" or "chain-ed" (the latter taking n_sites).
Backend backend_from_string(std::string_view text, int n_sites);

struct AxisRange {
    double min{0.0};
    double max{0.0};
    int steps{2};

    double at(int i) const;
};

struct ScanSpec {
    AxisRange j_range{-0.6, 0.6, 61};
    AxisRange g_range{0.0, 1.0, 51};
    double omega{1.0};
    double eps{1.0};
    Method method{Method::MeanField};
    Backend backend{Backend::chain_ed(16)};
    int ed_spins{8};
    int ed_n_max{16};
    ToleranceSet tolerances;
    int threads{1};

    void validate() const;
};

struct ScanRecord {
    double j{0.0};
    double g{0.0};
    double energy{0.0};
    double alpha_or_h{0.0};
    double m_x{0.0};
    double m_z{0.0};
    double stag{0.0};
    PhaseLabel label{PhaseLabel::PM_N};
    std::string method;
    std::string flags;  // ';'-separated; "ok" when empty

    bool failed() const { return flags.rfind("error", 0) == 0; }
};

/// Evaluates every grid point once. Rows are ordered J-major then g,
/// independent of the worker count. Per-point failures land in `flags`.
std::vector<ScanRecord> run_scan(const ScanSpec& s);

/// CSV with header j,g,energy,alpha_or_h,m_x,m_z,stag,label,method,flags and
/// floats at 12 significant digits.
void write_csv(std::ostream& os, const std::vector<ScanRecord>& rows);
std::vector<ScanRecord> read_csv(std::istream& is);

nlohmann::json to_json(const TransitionPoint& tp);

struct TraceEntry {
    double j{0.0};
    std::vector<TransitionPoint> points;
    std::optional<std::string> error;
};

struct TraceSpec {
    Method method{Method::MeanField};
    Backend backend{Backend::chain_ed(16)};
    double omega{1.0};
    double eps{1.0};
    ToleranceSet tolerances;
    double g_max{3.0};
    int threads{1};
};

/// Boundary points per J. On the antiferromagnetic mean-field side both
/// edges of the AFM-S window are reported when it exists.
std::vector<TraceEntry> trace_boundary(const TraceSpec& s, const std::vector<double>& j_list);
nlohmann::json to_json(const std::vector<TraceEntry>& trace);

/// locate_multicritical wrapped into a report; bracket failures become a
/// structured error entry carrying every probe.
nlohmann::json find_multicritical(const ModelParams& tmpl, const Backend& b, double j_lo, double j_hi,
                                  const ToleranceSet& t, double width = 0.02);

/// Formats with 12 significant digits ("nan" for NaN).
std::string format_float(double v);

}  // namespace phasekit
