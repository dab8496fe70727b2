#include "phasekit/effective.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phasekit/free_fermion.hpp"
#include "phasekit/parallel.hpp"

namespace phasekit {

namespace {

constexpr double kGolden = 0.6180339887498949;
constexpr double kStep = ChainLandscape::kGridStep;

LanczosOptions chain_lanczos() {
    LanczosOptions o;
    o.residual_tol = 1e-12;
    o.krylov_dim = 80;
    o.max_restarts = 400;
    return o;
}

double photon_cost(const ModelParams& p) { return p.omega / (16.0 * p.g * p.g); }

double e_eff(const ModelParams& p, const ChainLandscape& land, double h) {
    return land.at(h).energy + photon_cost(p) * h * h;
}

// d e_eff / dh = -m_x(h) + omega h / (8 g^2)
double e_eff_slope(const ModelParams& p, const ChainLandscape& land, double h) {
    return 2.0 * photon_cost(p) * h - land.at(h).mx;
}

HMinimum golden_section(const ModelParams& p, const ChainLandscape& land, double a, double b, double tol = 1e-8) {
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = e_eff(p, land, x1);
    double f2 = e_eff(p, land, x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = e_eff(p, land, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = e_eff(p, land, x2);
        }
    }
    const double h = 0.5 * (a + b);
    return {h, e_eff(p, land, h)};
}

// Golden section on [a, b], then a root of the Hellmann-Feynman slope near
// the golden estimate when it can be bracketed inside [a, b].
HMinimum refine_minimum(const ModelParams& p, const ChainLandscape& land, double a, double b) {
    HMinimum m = golden_section(p, land, a, b);
    if (m.h - a < 1e-7) {
        // collapsed onto the left edge; an edge at h = 0 is the normal solution
        if (a == 0.0) return {0.0, e_eff(p, land, 0.0)};
        return m;
    }

    double delta = 1e-7;
    double lo = std::max(a, m.h - delta), hi = std::min(b, m.h + delta);
    double flo = e_eff_slope(p, land, lo), fhi = e_eff_slope(p, land, hi);
    while ((flo > 0.0 || fhi < 0.0) && (lo > a || hi < b)) {
        delta *= 8.0;
        lo = std::max(a, m.h - delta);
        hi = std::min(b, m.h + delta);
        flo = e_eff_slope(p, land, lo);
        fhi = e_eff_slope(p, land, hi);
    }
    if (!(flo <= 0.0 && fhi >= 0.0)) return m;
    if (flo == 0.0) return {lo, e_eff(p, land, lo)};
    if (fhi == 0.0) return {hi, e_eff(p, land, hi)};

    boost::uintmax_t iters = 80;
    auto root = boost::math::tools::toms748_solve([&](double h) { return e_eff_slope(p, land, h); }, lo, hi, flo, fhi,
                                                  boost::math::tools::eps_tolerance<double>(48), iters);
    const double h = 0.5 * (root.first + root.second);
    const double e = e_eff(p, land, h);
    // keep whichever estimate is lower; the slope root should never lose
    return e <= m.energy + 1e-15 ? HMinimum{h, e} : m;
}

struct GridScan {
    std::vector<double> e;  // e_eff at h = i * kStep
    long n{0};
};

GridScan scan_grid(const ModelParams& p, const ChainLandscape& land, int threads = 1) {
    long n = static_cast<long>(std::ceil(default_h_max(p) / kStep));
    n = std::max(n, 8L);
    const double c = photon_cost(p);
    for (int attempt = 0; attempt < 9; ++attempt) {
        land.prefetch(n, threads);
        GridScan gs;
        gs.n = n;
        gs.e.resize(static_cast<std::size_t>(n) + 1);
        for (long i = 0; i <= n; ++i) {
            const double h = kStep * static_cast<double>(i);
            gs.e[i] = land.grid(i).energy + c * h * h;
        }
        if (gs.e[n] > gs.e[n - 1]) return gs;
        n *= 2;
    }
    std::ostringstream os;
    os << "e_eff still decreasing at h_max=" << kStep * static_cast<double>(n) << "; raise h_max";
    throw ConvergenceError(os.str());
}

std::vector<HMinimum> find_minima(const ModelParams& p, const ChainLandscape& land, const GridScan& gs) {
    std::vector<HMinimum> out;
    const auto& e = gs.e;

    // h = 0 is always stationary; its curvature decides whether it is a minimum.
    const double curvature0 = 2.0 * photon_cost(p) - land.susceptibility();
    if (curvature0 >= 0.0) {
        out.push_back({0.0, e[0]});
    } else if (e[0] <= e[1]) {
        out.push_back(refine_minimum(p, land, 0.0, kStep));
    }
    for (long i = 1; i < gs.n; ++i) {
        if (e[i] <= e[i - 1] && e[i] < e[i + 1]) {
            HMinimum m = refine_minimum(p, land, kStep * static_cast<double>(i - 1), kStep * static_cast<double>(i + 1));
            const bool dup = std::any_of(out.begin(), out.end(), [&](const HMinimum& o) { return std::abs(o.h - m.h) < 1e-9; });
            if (!dup) out.push_back(m);
        }
    }
    if (out.empty()) out.push_back({0.0, e[0]});
    std::sort(out.begin(), out.end(), [](const HMinimum& a, const HMinimum& b) { return a.h < b.h; });
    return out;
}

const HMinimum& pick_global(const std::vector<HMinimum>& minima) {
    const HMinimum* best = &minima.front();
    for (const auto& m : minima) {
        const double tie = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(m.energy));
        if (m.energy < best->energy - tie) best = &m;  // ties keep the smaller h
    }
    return *best;
}

SelfConsistentSolution build_solution(const ModelParams& p, const ChainLandscape& land, const ToleranceSet& t,
                                      std::vector<HMinimum> minima, double h_max) {
    const HMinimum global = pick_global(minima);
    const ChainPoint cp = land.at(global.h);

    SelfConsistentSolution sol;
    sol.h_star = global.h;
    sol.energy = global.energy;
    sol.residual = std::abs(global.h - 8.0 * p.g * p.g / p.omega * cp.mx);
    if (sol.residual > 1e-6)
        throw ConvergenceError("self-consistency residual " + std::to_string(sol.residual) + " at h=" +
                               std::to_string(global.h));
    sol.orders = {p.g > 0.0 ? -global.h / (4.0 * p.g) : 0.0, cp.mx, cp.mz, cp.m_stag};
    sol.label = classify_orders(sol.orders, t);
    sol.s_pi = cp.s_pi;
    sol.h_max = h_max;
    for (const auto& m : minima)
        if (&m != &global && std::abs(m.energy - global.energy) < t.tol_energy && std::abs(m.h - global.h) > t.tol_jump)
            sol.coexistent = true;
    sol.minima = std::move(minima);
    return sol;
}

// Local minimum of e_eff in a window around a previously found minimum.
HMinimum track_minimum(const ModelParams& p, const ChainLandscape& land, double h_guess) {
    const double span = std::max(4.0 * kStep, 0.25 * h_guess);
    return refine_minimum(p, land, std::max(0.0, h_guess - span), h_guess + span);
}

struct Bracketed {
    double g_lo, g_hi;
    SelfConsistentSolution lo, hi;
};

TransitionPoint locate_core(const ModelParams& tmpl, const ChainLandscape& land, const ToleranceSet& t, double g_lo,
                            double g_hi, const LocateOptions& opts) {
    if (!(g_lo < g_hi) || g_lo < 0.0) throw BracketError("g-bracket must satisfy 0 <= g_lo < g_hi");
    Bracketed br{g_lo, g_hi, minimize_h(tmpl.with_g(g_lo), land, t), minimize_h(tmpl.with_g(g_hi), land, t)};
    if (br.lo.label == br.hi.label)
        throw BracketError("same label " + std::string(to_string(br.lo.label)) + " at both ends of the g-bracket");

    auto bisect_to = [&](double width) {
        while (br.g_hi - br.g_lo > width) {
            const double mid = 0.5 * (br.g_lo + br.g_hi);
            if (mid <= br.g_lo || mid >= br.g_hi) break;
            SelfConsistentSolution m = minimize_h(tmpl.with_g(mid), land, t);
            if (m.label == br.lo.label) {
                br.g_lo = mid;
                br.lo = std::move(m);
            } else {
                br.g_hi = mid;
                br.hi = std::move(m);
            }
        }
    };

    TransitionPoint tp;
    tp.j = tmpl.j;
    tp.backend = land.backend().name();

    double width = opts.width;
    bisect_to(width);
    for (;;) {
        const double jump = std::abs(br.hi.h_star - br.lo.h_star);
        if (jump <= t.tol_jump) {
            tp.order = TransitionOrder::Second;
            tp.jump = jump;
            tp.g_c = 0.5 * (br.g_lo + br.g_hi);
            break;
        }
        // A discontinuity is genuine when the far branch already exists as
        // a metastable minimum on the low side.
        const bool metastable = std::any_of(br.lo.minima.begin(), br.lo.minima.end(), [&](const HMinimum& m) {
            return std::abs(m.h - br.lo.h_star) > t.tol_jump && std::abs(m.h - br.hi.h_star) < 0.5 * jump;
        });
        if (metastable || width <= opts.min_width) {
            tp.order = metastable ? TransitionOrder::First : (jump > t.tol_jump ? TransitionOrder::First
                                                                                : TransitionOrder::Second);
            if (!metastable) {
                tp.jump = jump;
                tp.g_c = 0.5 * (br.g_lo + br.g_hi);
                break;
            }
            // Refine to the energy crossing of the two tracked minima.
            double a = br.g_lo, b = br.g_hi;
            double h_n = br.lo.h_star, h_s = br.hi.h_star;
            HMinimum mn{}, ms{};
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const ModelParams pm = tmpl.with_g(mid);
                mn = track_minimum(pm, land, h_n);
                ms = track_minimum(pm, land, h_s);
                const double de = ms.energy - mn.energy;
                if (de > 0.0) a = mid; else b = mid;
                h_n = mn.h;
                h_s = ms.h;
                if (b - a < 1e-13 || std::abs(de) < 1e-14) break;
            }
            tp.g_c = 0.5 * (a + b);
            tp.jump = std::abs(ms.h - mn.h);
            tp.coexistence_gap = std::abs(ms.energy - mn.energy);
            tp.coexistent = tp.coexistence_gap < t.tol_energy;
            width = b - a;
            br.g_lo = a;
            br.g_hi = b;
            break;
        }
        width = std::max(opts.min_width, width / 16.0);
        bisect_to(width);
    }
    tp.bracket_width = br.g_hi - br.g_lo;
    tp.below = br.lo.label;
    tp.above = br.hi.label;
    if (tp.order == TransitionOrder::Second) tp.coexistence_gap = std::abs(br.hi.energy - br.lo.energy);
    return tp;
}

std::pair<double, double> auto_bracket(const ModelParams& tmpl, const ChainLandscape& land, const ToleranceSet& t) {
    const double g_sp = normal_instability_g(tmpl.omega, land);
    if (!(g_sp > 0.0) || !std::isfinite(g_sp)) throw BracketError("cannot derive a g-bracket: no normal-state instability");
    double g_hi = 1.01 * g_sp;
    const PhaseLabel base = minimize_h(tmpl.with_g(1e-3 * g_sp), land, t).label;
    for (int k = 0; k < 12 && minimize_h(tmpl.with_g(g_hi), land, t).label == base; ++k) g_hi *= 1.5;
    double g_lo = 0.5 * g_sp;
    for (int k = 0; k < 30 && minimize_h(tmpl.with_g(g_lo), land, t).label != base; ++k) g_lo *= 0.5;
    return {g_lo, g_hi};
}

}  // namespace

std::string Backend::name() const {
    if (kind == Kind::FreeFermion) return "free-fermion";
    return "chain-ed(" + std::to_string(n_sites) + ")";
}

double afm_structure_threshold(int n_sites) { return 5.0 / (4.0 * n_sites); }

ChainLandscape::ChainLandscape(double eps, double j, Backend backend) : eps_(eps), j_(j), backend_(backend) {
    if (backend_.kind == Backend::Kind::FreeFermion && eps_ != 0.0)
        throw ParamError("free-fermion backend requires eps = 0");
    if (backend_.kind == Backend::Kind::ChainEd) validate_chain({eps_, j_, 0.0, backend_.n_sites});
}

ChainPoint ChainLandscape::evaluate(double h) const {
    ChainPoint cp;
    cp.h = h;
    if (backend_.kind == Backend::Kind::FreeFermion) {
        cp.energy = ff_ground_energy(j_, h);
        cp.mx = ff_mx(j_, h);
        cp.mz = 0.0;  // spin-flip symmetric ground state
        cp.m_stag = j_ < 0.0 ? ff_order_parameter(j_, h) : 0.0;
        cp.s_pi = cp.m_stag * cp.m_stag;
    } else {
        const ChainResult r = ed_chain_ground({eps_, j_, h, backend_.n_sites}, chain_lanczos());
        cp.energy = r.energy;
        cp.mx = r.mx;
        cp.mz = r.mz;
        cp.s_pi = r.s_pi;
        cp.m_stag = r.s_pi >= afm_structure_threshold(backend_.n_sites) ? std::sqrt(r.s_pi) : 0.0;
    }
    return cp;
}

ChainPoint ChainLandscape::at(double h) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = memo_.find(h); it != memo_.end()) return it->second;
    }
    ChainPoint cp = evaluate(h);
    std::lock_guard lock(mutex_);
    memo_.emplace(h, cp);
    return cp;
}

void ChainLandscape::prefetch(long n, int threads) const {
    std::vector<long> missing;
    {
        std::lock_guard lock(mutex_);
        for (long i = 0; i <= n; ++i)
            if (!memo_.count(kStep * static_cast<double>(i))) missing.push_back(i);
    }
    parallel_for(missing.size(), threads, [&](std::size_t k) { (void)grid(missing[k]); });
}

std::size_t ChainLandscape::evaluations() const {
    std::lock_guard lock(mutex_);
    return memo_.size();
}

double ChainLandscape::susceptibility() const {
    {
        std::lock_guard lock(mutex_);
        if (chi_) return *chi_;
    }
    const double d = 1e-3;
    const double d1 = at(d).mx / d;
    const double d2 = at(0.5 * d).mx / (0.5 * d);
    const double chi = (4.0 * d2 - d1) / 3.0;
    std::lock_guard lock(mutex_);
    chi_ = chi;
    return chi;
}

void check_backend(const ModelParams& p, const Backend& b) {
    if (b.kind == Backend::Kind::FreeFermion && p.eps != 0.0)
        throw ParamError("free-fermion backend requires eps = 0");
    if (b.kind == Backend::Kind::ChainEd) validate_chain({p.eps, p.j, 0.0, b.n_sites});
}

double effective_energy(const ModelParams& p, double h, const Backend& b) {
    validate_params(p);
    check_backend(p, b);
    if (!(p.g > 0.0)) throw ParamError("g must be positive for the photon-elimination functional");
    double e_chain = 0.0;
    if (b.kind == Backend::Kind::FreeFermion) {
        e_chain = ff_ground_energy(p.j, h);
    } else {
        e_chain = ed_chain_ground({p.eps, p.j, h, b.n_sites}, chain_lanczos()).energy;
    }
    return e_chain + photon_cost(p) * h * h;
}

double default_h_max(const ModelParams& p) {
    return 4.0 * std::max({p.eps, 4.0 * std::abs(p.j), 2.0 * p.g * p.g / p.omega});
}

SelfConsistentSolution minimize_h(const ModelParams& p, const ChainLandscape& land, const ToleranceSet& t) {
    validate_params(p);
    t.validate();
    if (p.eps != land.eps() || p.j != land.j()) throw ParamError("landscape was built for different (eps, J)");

    if (p.g == 0.0) {
        // infinite photon cost pins h = 0
        const ChainPoint cp = land.at(0.0);
        return build_solution(p, land, t, {{0.0, cp.energy}}, 0.0);
    }
    const GridScan gs = scan_grid(p, land);
    return build_solution(p, land, t, find_minima(p, land, gs), kStep * static_cast<double>(gs.n));
}

SelfConsistentSolution minimize_h(const ModelParams& p, const Backend& b, const ToleranceSet& t) {
    check_backend(p, b);
    ChainLandscape land(p.eps, p.j, b);
    return minimize_h(p, land, t);
}

EffectiveLandscape effective_landscape(const ModelParams& p, const ChainLandscape& land, const ToleranceSet& t) {
    if (!(p.g > 0.0)) throw ParamError("g must be positive for the photon-elimination functional");
    const SelfConsistentSolution sol = minimize_h(p, land, t);
    const GridScan gs = scan_grid(p, land);
    EffectiveLandscape out;
    for (long i = 0; i <= gs.n; ++i) {
        out.h_grid.push_back(kStep * static_cast<double>(i));
        out.e_values.push_back(gs.e[i]);
    }
    out.minimizers = sol.minima;
    out.global = {sol.h_star, sol.energy};
    out.degenerate = sol.coexistent;
    out.h_max = sol.h_max;
    return out;
}

double spinodal_g(double omega, double j) {
    if (!(omega > 0.0)) throw ParamError("omega must be positive");
    if (!(j > 0.0)) throw ParamError("spinodal_g requires J > 0");
    auto second_diff = [&](double d) {
        return 2.0 * (ff_ground_energy(j, d) - ff_ground_energy(j, 0.0)) / (d * d);
    };
    const double d = 1e-4;
    const double curvature = (4.0 * second_diff(0.5 * d) - second_diff(d)) / 3.0;
    const double chi = -curvature;
    if (!(chi > 0.0)) throw ConvergenceError("non-positive susceptibility estimate in spinodal_g");
    return std::sqrt(omega / (8.0 * chi));
}

double normal_instability_g(double omega, const ChainLandscape& land) {
    const double chi = land.susceptibility();
    if (!(chi > 0.0)) throw ConvergenceError("non-positive susceptibility estimate");
    return std::sqrt(omega / (8.0 * chi));
}

TransitionPoint locate_transition_g(const ModelParams& tmpl, const Backend& b, const ToleranceSet& t, double g_lo,
                                    double g_hi, const LocateOptions& opts) {
    validate_params(tmpl);
    check_backend(tmpl, b);
    t.validate();
    ChainLandscape land(tmpl.eps, tmpl.j, b);
    TransitionPoint tp = locate_core(tmpl, land, t, g_lo, g_hi, opts);

    if (b.kind == Backend::Kind::ChainEd && opts.record_trend) {
        for (int n : opts.trend_sizes) {
            if (n == b.n_sites) continue;
            try {
                ChainLandscape other(tmpl.eps, tmpl.j, Backend::chain_ed(n));
                const auto [lo, hi] = auto_bracket(tmpl, other, t);
                tp.jump_trend.emplace_back(n, locate_core(tmpl, other, t, lo, hi, opts).jump);
            } catch (const std::exception&) {
                tp.jump_trend.emplace_back(n, std::numeric_limits<double>::quiet_NaN());
            }
        }
        tp.jump_trend.emplace_back(b.n_sites, tp.jump);
        std::sort(tp.jump_trend.begin(), tp.jump_trend.end());
    }
    return tp;
}

TransitionPoint locate_transition_g(const ModelParams& tmpl, const Backend& b, const ToleranceSet& t,
                                    const LocateOptions& opts) {
    validate_params(tmpl);
    check_backend(tmpl, b);
    ChainLandscape land(tmpl.eps, tmpl.j, b);
    const auto [lo, hi] = auto_bracket(tmpl, land, t);
    return locate_transition_g(tmpl, b, t, lo, hi, opts);
}

MulticriticalResult locate_multicritical(const ModelParams& tmpl, const Backend& b, double j_lo, double j_hi,
                                         const ToleranceSet& t, double width, const LocateOptions& opts) {
    if (!(j_lo < j_hi)) throw BracketError("J-bracket must satisfy j_lo < j_hi");
    LocateOptions probe_opts = opts;
    probe_opts.record_trend = false;

    MulticriticalResult res;
    auto probe = [&](double j) {
        TransitionPoint tp = locate_transition_g(tmpl.with_j(j), b, t, probe_opts);
        res.probes.push_back(tp);
        return tp.order;
    };

    const TransitionOrder order_lo = probe(j_lo);
    const TransitionOrder order_hi = probe(j_hi);
    if (order_lo == order_hi) {
        std::ostringstream os;
        os << "transition is " << to_string(order_lo) << " order at both J=" << j_lo << " and J=" << j_hi;
        throw MulticriticalBracketError(os.str(), res.probes);
    }
    while (j_hi - j_lo > width) {
        const double mid = 0.5 * (j_lo + j_hi);
        if (probe(mid) == order_lo) j_lo = mid; else j_hi = mid;
    }
    res.j_lo = order_lo == TransitionOrder::Second ? j_lo : j_hi;
    res.j_hi = order_lo == TransitionOrder::Second ? j_hi : j_lo;
    res.j_mc = 0.5 * (j_lo + j_hi);
    return res;
}

}  // namespace phasekit
