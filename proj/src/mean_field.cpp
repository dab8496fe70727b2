#include "phasekit/mean_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace phasekit {

namespace {

constexpr double kPi = std::numbers::pi;

// Exact zero on the polarized corners so normal states carry alpha == 0.
double spin_sin(double theta) {
    return std::abs(theta) == kPi ? 0.0 : std::sin(theta);
}

constexpr double kGradTol = 1e-10;

double wrap_angle(double theta) {
    double w = std::remainder(theta, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

struct Derivatives {
    double energy;
    std::array<double, 2> grad;
    std::array<double, 3> hess;  // aa, ab, bb
};

// Reduced energy e(ta, tb) = -g^2 (sa + sb)^2 / (4 omega) + (eps/4)(ca + cb) - J ca cb
Derivatives reduced_derivatives(const ModelParams& p, double ta, double tb) {
    const double sa = spin_sin(ta), ca = std::cos(ta);
    const double sb = spin_sin(tb), cb = std::cos(tb);
    const double k = p.g * p.g / p.omega;
    const double s = sa + sb;

    Derivatives d{};
    d.energy = -0.25 * k * s * s + 0.25 * p.eps * (ca + cb) - p.j * (ca * cb);
    d.grad[0] = -0.5 * k * s * ca - 0.25 * p.eps * sa + p.j * sa * cb;
    d.grad[1] = -0.5 * k * s * cb - 0.25 * p.eps * sb + p.j * ca * sb;
    d.hess[0] = -0.5 * k * (ca * ca - s * sa) - 0.25 * p.eps * ca + p.j * ca * cb;
    d.hess[1] = -0.5 * k * ca * cb - p.j * sa * sb;
    d.hess[2] = -0.5 * k * (cb * cb - s * sb) - 0.25 * p.eps * cb + p.j * ca * cb;
    return d;
}

double norm2(const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); }

// Smallest eigenvalue and its eigenvector of the symmetric 2x2 Hessian.
std::pair<double, std::array<double, 2>> lowest_mode(const std::array<double, 3>& h) {
    const double mean = 0.5 * (h[0] + h[2]);
    const double diff = 0.5 * (h[0] - h[2]);
    const double rad = std::hypot(diff, h[1]);
    const double lambda = mean - rad;
    std::array<double, 2> v{h[1], lambda - h[0]};
    if (norm2(v) < 1e-300) v = (h[0] <= h[2]) ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
    const double n = norm2(v);
    return {lambda, {v[0] / n, v[1] / n}};
}

struct LocalMin {
    double ta, tb, energy;
    bool converged;
};

// Damped Newton descent with a gradient fallback and saddle escape along
// the negative-curvature direction.
LocalMin descend(const ModelParams& p, double ta, double tb) {
    bool converged = false;
    int polish = 0;
    for (int iter = 0; iter < 500; ++iter) {
        const Derivatives d = reduced_derivatives(p, ta, tb);
        const double gnorm = norm2(d.grad);
        const auto [lmin, mode] = lowest_mode(d.hess);

        if (gnorm < kGradTol) {
            if (lmin < -1e-9) {
                // stationary but not a minimum: step off the saddle
                ta += 1e-3 * mode[0];
                tb += 1e-3 * mode[1];
                converged = false;
                polish = 0;
                continue;
            }
            converged = true;
            if (++polish > 3) break;
        }

        std::array<double, 2> step{-d.grad[0], -d.grad[1]};
        const double det = d.hess[0] * d.hess[2] - d.hess[1] * d.hess[1];
        if (lmin > 1e-12 && std::abs(det) > 1e-300) {
            step = {-(d.hess[2] * d.grad[0] - d.hess[1] * d.grad[1]) / det,
                    -(-d.hess[1] * d.grad[0] + d.hess[0] * d.grad[1]) / det};
        } else if (lmin < 0.0) {
            // indefinite: push downhill along the soft mode as well
            const double sgn = (mode[0] * d.grad[0] + mode[1] * d.grad[1]) > 0 ? -1.0 : 1.0;
            step[0] += 0.1 * sgn * mode[0];
            step[1] += 0.1 * sgn * mode[1];
        }
        const double snorm = norm2(step);
        if (snorm > 0.5) {
            step[0] *= 0.5 / snorm;
            step[1] *= 0.5 / snorm;
        }

        const double slope = d.grad[0] * step[0] + d.grad[1] * step[1];
        double t = 1.0;
        double na = ta + step[0], nb = tb + step[1];
        double ne = mf_reduced_energy(p, na, nb);
        while (ne > d.energy + 1e-4 * t * slope && t > 1e-12) {
            t *= 0.5;
            na = ta + t * step[0];
            nb = tb + t * step[1];
            ne = mf_reduced_energy(p, na, nb);
        }
        if (converged && ne > d.energy) break;
        if (t <= 1e-12) {
            // no descent possible at machine precision
            converged = gnorm < kGradTol * 100;
            break;
        }
        ta = na;
        tb = nb;
    }
    return {wrap_angle(ta), wrap_angle(tb), mf_reduced_energy(p, ta, tb), converged};
}

// Orders the "less ordered" state first for tie-breaking: normal before
// superradiant, paramagnetic before antiferromagnetic.
int order_rank(const OrderParams& o, double tol) {
    return (std::abs(o.photon_displacement) > tol ? 1 : 0) + (std::abs(o.m_stag) > tol ? 2 : 0);
}

double angle_distance(const MeanFieldAnsatz& a, const MeanFieldAnsatz& b) {
    return std::hypot(wrap_angle(a.theta_a - b.theta_a), wrap_angle(a.theta_b - b.theta_b));
}

// Jump of the order parameters between two solutions on either side of a boundary.
double order_jump(const MeanFieldSolution& lo, const MeanFieldSolution& hi) {
    const double da = std::abs(std::abs(hi.orders.photon_displacement) - std::abs(lo.orders.photon_displacement));
    const double ds = std::abs(std::abs(hi.orders.m_stag) - std::abs(lo.orders.m_stag));
    return std::max(da, ds);
}

}  // namespace

double mf_energy(const ModelParams& p, const MeanFieldAnsatz& a) {
    const double ca = std::cos(a.theta_a), cb = std::cos(a.theta_b);
    const double sa = spin_sin(a.theta_a), sb = spin_sin(a.theta_b);
    return p.omega * a.alpha * a.alpha + 0.25 * p.eps * (ca + cb) + p.g * a.alpha * (sa + sb) - p.j * (ca * cb);
}

double mf_alpha_opt(const ModelParams& p, double theta_a, double theta_b) {
    return -p.g * (spin_sin(theta_a) + spin_sin(theta_b)) / (2.0 * p.omega);
}

double mf_reduced_energy(const ModelParams& p, double theta_a, double theta_b) {
    return mf_energy(p, {mf_alpha_opt(p, theta_a, theta_b), theta_a, theta_b});
}

OrderParams mf_orders(const MeanFieldAnsatz& a) {
    const double ca = std::cos(a.theta_a), cb = std::cos(a.theta_b);
    const double sa = spin_sin(a.theta_a), sb = spin_sin(a.theta_b);
    return {a.alpha, 0.25 * (sa + sb), 0.25 * (ca + cb), 0.25 * (ca - cb)};
}

MeanFieldAnsatz mf_canonicalize(const ModelParams& /*p*/, MeanFieldAnsatz a) {
    a.theta_a = wrap_angle(a.theta_a);
    a.theta_b = wrap_angle(a.theta_b);
    const double s = spin_sin(a.theta_a) + spin_sin(a.theta_b);
    const bool flip = a.alpha > 0.0 || (a.alpha == 0.0 && s < -1e-15);
    if (flip) {
        a.alpha = -a.alpha;
        a.theta_a = wrap_angle(-a.theta_a);
        a.theta_b = wrap_angle(-a.theta_b);
    }
    if (a.theta_a < a.theta_b) std::swap(a.theta_a, a.theta_b);
    return a;
}

MeanFieldSolution mf_minimize(const ModelParams& p, const ToleranceSet& t, int n_starts) {
    validate_params(p);
    t.validate();
    if (n_starts < 8) throw ParamError("n_starts must be at least 8");

    if (p.g == 0.0) {
        // Without coupling the energy is bilinear in (cos ta, cos tb), so the
        // minimum sits on a corner; at J = -eps/4 whole edges tie and the
        // polarized corner is the less ordered representative.
        const ClassicalGround cg = classical_ground(p);
        MeanFieldSolution sol;
        sol.ansatz = cg.label == PhaseLabel::AFM_N ? MeanFieldAnsatz{0.0, kPi, 0.0} : MeanFieldAnsatz{0.0, kPi, kPi};
        sol.energy = mf_energy(p, sol.ansatz);
        sol.orders = mf_orders(sol.ansatz);
        sol.label = cg.label;
        sol.n_starts = sol.n_starts_agreeing = 1;
        sol.coexistent = cg.degenerate;
        if (cg.degenerate) {
            sol.competing = MeanFieldAnsatz{0.0, kPi, 0.0};
            sol.competing_energy = mf_energy(p, *sol.competing);
        }
        return sol;
    }

    std::vector<std::pair<double, double>> starts;
    starts.reserve(n_starts * n_starts + 3);
    for (int i = 0; i < n_starts; ++i)
        for (int k = 0; k < n_starts; ++k)
            starts.emplace_back(-kPi + 2.0 * kPi * i / n_starts, -kPi + 2.0 * kPi * k / n_starts);
    starts.emplace_back(kPi, kPi);          // polarized along -z
    starts.emplace_back(0.0, kPi);          // Neel
    starts.emplace_back(kPi / 2, kPi / 2);  // polarized along +x

    struct Candidate {
        MeanFieldAnsatz ansatz;
        double energy;
        int hits;
    };
    std::vector<Candidate> minima;
    for (const auto& [a0, b0] : starts) {
        const LocalMin m = descend(p, a0, b0);
        MeanFieldAnsatz a = mf_canonicalize(p, {mf_alpha_opt(p, m.ta, m.tb), m.ta, m.tb});
        auto same = std::find_if(minima.begin(), minima.end(), [&](const Candidate& c) {
            return angle_distance(c.ansatz, a) < 1e-5 && std::abs(c.energy - m.energy) < t.tol_energy;
        });
        if (same != minima.end()) {
            ++same->hits;
            if (m.energy < same->energy) {
                same->energy = m.energy;
                same->ansatz = a;
            }
        } else {
            minima.push_back({a, m.energy, 1});
        }
    }

    // Exact ties break toward the less ordered state.
    const double ulp_tie = 64.0 * std::numeric_limits<double>::epsilon();
    auto better = [&](const Candidate& x, const Candidate& y) {
        const double scale = std::max(1.0, std::abs(x.energy));
        if (std::abs(x.energy - y.energy) <= ulp_tie * scale)
            return order_rank(mf_orders(x.ansatz), t.tol_order_param) < order_rank(mf_orders(y.ansatz), t.tol_order_param);
        return x.energy < y.energy;
    };
    const auto best = std::min_element(minima.begin(), minima.end(),
                                       [&](const Candidate& x, const Candidate& y) { return better(x, y); });

    MeanFieldSolution sol;
    sol.ansatz = best->ansatz;
    sol.energy = best->energy;
    sol.orders = mf_orders(sol.ansatz);
    sol.label = classify_orders(sol.orders, t);
    sol.n_starts = static_cast<int>(starts.size());
    sol.n_starts_agreeing = best->hits;

    for (const auto& c : minima) {
        if (&c == &*best) continue;
        if (angle_distance(c.ansatz, best->ansatz) > 1e-4 && std::abs(c.energy - best->energy) < t.tol_energy) {
            if (!sol.competing || c.energy < sol.competing_energy) {
                sol.coexistent = true;
                sol.competing = c.ansatz;
                sol.competing_energy = c.energy;
            }
        }
    }
    return sol;
}

TransitionPoint mf_boundary_bisect(const ModelParams& tmpl, double g_lo, double g_hi, const ToleranceSet& t,
                                   double width) {
    if (!(g_lo < g_hi)) throw BracketError("mean-field g-bracket must satisfy g_lo < g_hi");
    MeanFieldSolution lo = mf_minimize(tmpl.with_g(g_lo), t);
    MeanFieldSolution hi = mf_minimize(tmpl.with_g(g_hi), t);
    if (lo.label == hi.label)
        throw BracketError("same label " + std::string(to_string(lo.label)) + " at both ends of the g-bracket");

    while (g_hi - g_lo > width) {
        const double mid = 0.5 * (g_lo + g_hi);
        if (mid <= g_lo || mid >= g_hi) break;
        MeanFieldSolution m = mf_minimize(tmpl.with_g(mid), t);
        if (m.label == lo.label) {
            g_lo = mid;
            lo = std::move(m);
        } else {
            g_hi = mid;
            hi = std::move(m);
        }
    }

    TransitionPoint tp;
    tp.j = tmpl.j;
    tp.g_c = 0.5 * (g_lo + g_hi);
    tp.bracket_width = g_hi - g_lo;
    tp.below = lo.label;
    tp.above = hi.label;
    tp.jump = order_jump(lo, hi);
    tp.order = tp.jump > t.tol_jump ? TransitionOrder::First : TransitionOrder::Second;
    tp.coexistent = lo.coexistent || hi.coexistent;
    tp.coexistence_gap = std::abs(lo.energy - hi.energy);
    tp.backend = "mean-field";
    return tp;
}

TransitionPoint mf_boundary_bisect_j(const ModelParams& tmpl, double j_lo, double j_hi, const ToleranceSet& t,
                                     double width) {
    if (!(j_lo < j_hi)) throw BracketError("mean-field J-bracket must satisfy j_lo < j_hi");
    MeanFieldSolution lo = mf_minimize(tmpl.with_j(j_lo), t);
    MeanFieldSolution hi = mf_minimize(tmpl.with_j(j_hi), t);
    if (lo.label == hi.label)
        throw BracketError("same label " + std::string(to_string(lo.label)) + " at both ends of the J-bracket");

    while (j_hi - j_lo > width) {
        const double mid = 0.5 * (j_lo + j_hi);
        if (mid <= j_lo || mid >= j_hi) break;
        MeanFieldSolution m = mf_minimize(tmpl.with_j(mid), t);
        if (m.label == lo.label) {
            j_lo = mid;
            lo = std::move(m);
        } else {
            j_hi = mid;
            hi = std::move(m);
        }
    }

    TransitionPoint tp;
    tp.j = 0.5 * (j_lo + j_hi);
    tp.g_c = tmpl.g;
    tp.bracket_width = j_hi - j_lo;
    tp.below = lo.label;
    tp.above = hi.label;
    tp.jump = order_jump(lo, hi);
    tp.order = tp.jump > t.tol_jump ? TransitionOrder::First : TransitionOrder::Second;
    tp.coexistent = lo.coexistent || hi.coexistent;
    tp.coexistence_gap = std::abs(lo.energy - hi.energy);
    tp.backend = "mean-field";
    return tp;
}

std::vector<std::pair<double, PhaseLabel>> mf_label_scan(const ModelParams& tmpl, const ToleranceSet& t, double dg,
                                                         double g_max) {
    if (!(dg > 0.0)) throw ParamError("g-step must be positive");
    std::vector<std::pair<double, PhaseLabel>> out;
    const auto n = static_cast<long>(std::floor(g_max / dg + 1e-9));
    int pm_s_run = 0;
    for (long i = 0; i <= n; ++i) {
        const double g = dg * static_cast<double>(i);
        const PhaseLabel l = mf_minimize(tmpl.with_g(g), t).label;
        out.emplace_back(g, l);
        pm_s_run = (l == PhaseLabel::PM_S) ? pm_s_run + 1 : 0;
        if (pm_s_run >= 10) break;
    }
    return out;
}

std::optional<IntermediateWindow> mf_intermediate_window(const ModelParams& tmpl, const ToleranceSet& t, double dg,
                                                         double g_max) {
    validate_params(tmpl.with_g(0.0));
    if (classical_ground(tmpl.with_g(0.0)).label != PhaseLabel::AFM_N) return std::nullopt;

    const auto scan = mf_label_scan(tmpl, t, dg, g_max);

    // Compress to the sequence of distinct labels and check it is monotone.
    std::vector<std::pair<double, PhaseLabel>> changes;
    for (const auto& entry : scan)
        if (changes.empty() || changes.back().second != entry.second) changes.push_back(entry);
    auto rank = [](PhaseLabel l) {
        switch (l) {
            case PhaseLabel::AFM_N: return 0;
            case PhaseLabel::AFM_S: return 1;
            case PhaseLabel::PM_S: return 2;
            case PhaseLabel::PM_N: return 3;
        }
        return 3;
    };
    bool monotone = changes.front().second == PhaseLabel::AFM_N;
    for (std::size_t i = 1; i < changes.size(); ++i)
        monotone = monotone && rank(changes[i].second) > rank(changes[i - 1].second) &&
                   changes[i].second != PhaseLabel::PM_N;
    if (!monotone) {
        std::ostringstream os;
        os << "non-monotone mean-field phase sequence at J=" << tmpl.j << ":";
        for (const auto& [g, l] : changes) os << " " << to_string(l) << "@" << g;
        throw ConsistencyError(os.str());
    }
    if (changes.size() < 2) return std::nullopt;

    // First boundary out of AFM-N. A window narrower than dg is still caught
    // because bisection resolves the first label change inside the bracket.
    const double g_first_other = changes[1].first;
    TransitionPoint lower = mf_boundary_bisect(tmpl, g_first_other - dg, g_first_other, t);
    if (lower.above != PhaseLabel::AFM_S) return std::nullopt;

    const auto pm_s = std::find_if(scan.begin(), scan.end(),
                                   [](const auto& e) { return e.second == PhaseLabel::PM_S; });
    if (pm_s == scan.end()) return std::nullopt;
    const double g_start = lower.g_c + 0.5 * lower.bracket_width;
    const double g_prev = std::max(g_start, pm_s->first - dg);
    double lo = g_prev;
    if (mf_minimize(tmpl.with_g(lo), t).label != PhaseLabel::AFM_S) lo = g_start;
    TransitionPoint upper = mf_boundary_bisect(tmpl, lo, pm_s->first, t);

    return IntermediateWindow{lower.g_c, upper.g_c, lower, upper};
}

}  // namespace phasekit
