#include "phasekit/selfcheck.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "phasekit/chain_ed.hpp"
#include "phasekit/ed_full.hpp"
#include "phasekit/effective.hpp"
#include "phasekit/free_fermion.hpp"
#include "phasekit/mean_field.hpp"
#include "phasekit/scan.hpp"

namespace phasekit {

namespace {

std::string fmt(double v) { return format_float(v); }

CheckResult run(const std::string& name, const std::function<std::string(bool&)>& body) {
    CheckResult r{name, false, ""};
    try {
        r.detail = body(r.passed);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    return r;
}

}  // namespace

std::vector<CheckResult> run_selfcheck() {
    std::vector<CheckResult> out;
    const ToleranceSet t;

    out.push_back(run("classical energies", [&](bool& ok) {
        const double pm = mf_minimize({1, 1, 0, 0}, t).energy;
        const double afm = mf_minimize({1, 1, 0, -0.5}, t).energy;
        ok = std::abs(pm + 0.5) < 1e-12 && std::abs(afm + 0.5) < 1e-12;
        return "polarized " + fmt(pm) + ", Neel " + fmt(afm);
    }));

    out.push_back(run("mean-field threshold at J=0", [&](bool& ok) {
        const TransitionPoint tp = mf_boundary_bisect({1, 1, 0, 0}, 0.3, 0.7, t);
        ok = std::abs(tp.g_c - 0.5) < 1e-6 && tp.order == TransitionOrder::Second;
        return "g_c = " + fmt(tp.g_c);
    }));

    out.push_back(run("free-fermion Hellmann-Feynman", [&](bool& ok) {
        double worst = 0.0;
        for (double j : {0.3, 0.7, 1.0})
            for (double h : {0.2, 1.1, 2.5}) {
                const double d = 1e-4;
                const double slope = (ff_ground_energy(j, h + d) - ff_ground_energy(j, h - d)) / (2 * d);
                worst = std::max(worst, std::abs(ff_mx(j, h) + slope));
            }
        ok = worst < 1e-6;
        return "max |m_x + de/dh| = " + fmt(worst);
    }));

    out.push_back(run("free-fermion critical energy", [&](bool& ok) {
        const double e = ff_ground_energy(1.0, 2.0);
        ok = std::abs(e + 4.0 / std::numbers::pi) < 1e-10;
        return "e(Gamma=J=1) = " + fmt(e);
    }));

    out.push_back(run("chain ED against free fermions", [&](bool& ok) {
        const double e16 = ed_chain_ground({0.0, 1.0, 4.0, 16}).energy;
        const double ff = ff_ground_energy(1.0, 4.0);
        ok = std::abs(e16 - ff) < 1e-6;  // gapped paramagnet, exponentially small finite-size error
        return "N=16 " + fmt(e16) + " vs " + fmt(ff);
    }));

    out.push_back(run("e_eff even in h", [&](bool& ok) {
        const ModelParams p{1, 0, 0.7, 0.6};
        double worst = 0.0;
        for (double h : {0.1, 0.8, 1.9}) {
            worst = std::max(worst, std::abs(effective_energy(p, h, Backend::free_fermion()) -
                                             effective_energy(p, -h, Backend::free_fermion())));
            const ModelParams q{1, 1, 0.7, 0.6};
            worst = std::max(worst, std::abs(effective_energy(q, h, Backend::chain_ed(8)) -
                                             effective_energy(q, -h, Backend::chain_ed(8))));
        }
        ok = worst < 1e-10;
        return "max asymmetry " + fmt(worst);
    }));

    out.push_back(run("full ED sparse against dense", [&](bool& ok) {
        const ModelParams p{1.0, 1.0, 0.6, -0.3};
        EDConfig c;
        c.n_spins = 4;
        c.n_max = 8;
        const auto dim = static_cast<Eigen::Index>(ed_dimension(c));
        Eigen::MatrixXd h(dim, dim);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), y(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            e.setZero();
            e(i) = 1.0;
            apply_full_hamiltonian(p, c, e, y);
            h.col(i) = y;
        }
        const double dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
        const double sparse = ed_full_ground(p, c).energy_per_site * c.n_spins;
        ok = std::abs(dense - sparse) < 1e-8 && (h - h.transpose()).cwiseAbs().maxCoeff() < 1e-14;
        return "dense " + fmt(dense) + ", Lanczos " + fmt(sparse);
    }));

    out.push_back(run("full ED truncation monotone", [&](bool& ok) {
        const ModelParams p{1.0, 1.0, 0.8, 0.2};
        EDConfig c;
        c.n_spins = 4;
        c.compute_gap = false;
        std::ostringstream os;
        double prev = 0.0;
        ok = true;
        for (int n_max : {8, 16, 32}) {
            c.n_max = n_max;
            const double e = ed_full_ground(p, c).energy_per_site;
            if (n_max > 8 && e > prev + 1e-9) ok = false;
            os << "n_max=" << n_max << ": " << fmt(e) << " ";
            prev = e;
        }
        return os.str();
    }));

    out.push_back(run("scan determinism and label consistency", [&](bool& ok) {
        ScanSpec s;
        s.j_range = {-0.5, 0.5, 5};
        s.g_range = {0.0, 1.0, 6};
        s.threads = 2;
        std::ostringstream a, b;
        const auto rows = run_scan(s);
        write_csv(a, rows);
        s.threads = 1;
        write_csv(b, run_scan(s));
        ok = a.str() == b.str() && rows.size() == 30;
        for (const auto& r : rows)
            if (r.failed() || classify_orders({r.alpha_or_h, r.m_x, r.m_z, r.stag}, t) != r.label) ok = false;
        return std::to_string(rows.size()) + " rows";
    }));

    return out;
}

}  // namespace phasekit
