#include "phasekit/ed_full.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace phasekit {

namespace {

struct SpinTables {
    Eigen::VectorXd diag;     // eps sum s^z - 4J sum s^z s^z
    Eigen::VectorXd sz;       // sum s^z
    Eigen::VectorXd stag_sq;  // (sum (-1)^i s^z_i)^2
    Eigen::VectorXd sign;     // prod_i 2 s^z_i
};

SpinTables spin_tables(const ModelParams& p, int n) {
    const Eigen::Index states = Eigen::Index{1} << n;
    SpinTables t{Eigen::VectorXd(states), Eigen::VectorXd(states), Eigen::VectorXd(states), Eigen::VectorXd(states)};
    for (Eigen::Index s = 0; s < states; ++s) {
        double mz = 0.0, zz = 0.0, st = 0.0;
        for (int i = 0; i < n; ++i) {
            const double zi = ((s >> i) & 1) ? 0.5 : -0.5;
            const double zn = ((s >> ((i + 1) % n)) & 1) ? 0.5 : -0.5;
            mz += zi;
            zz += zi * zn;
            st += (i % 2 == 0) ? zi : -zi;
        }
        t.diag(s) = p.eps * mz - 4.0 * p.j * zz;
        t.sz(s) = mz;
        t.stag_sq(s) = st * st;
        const int down = n - std::popcount(static_cast<unsigned long long>(s));
        t.sign(s) = (down % 2 == 0) ? 1.0 : -1.0;
    }
    return t;
}

// out(:, n) = sum_i x(s ^ (1 << i), n)
void flip_sum(const Eigen::Map<const Eigen::MatrixXd>& x, int n_spins, Eigen::MatrixXd& out) {
    const Eigen::Index states = x.rows();
    for (Eigen::Index col = 0; col < x.cols(); ++col) {
        for (Eigen::Index s = 0; s < states; ++s) {
            double acc = 0.0;
            for (int i = 0; i < n_spins; ++i) acc += x(s ^ (Eigen::Index{1} << i), col);
            out(s, col) = acc;
        }
    }
}

double displacement(const EDConfig& c) {
    return c.displaced_frame ? std::sqrt(static_cast<double>(c.n_spins)) * *c.displaced_frame : 0.0;
}

void apply_with_tables(const ModelParams& p, const EDConfig& c, const SpinTables& tab, const Eigen::VectorXd& xv,
                       Eigen::VectorXd& yv) {
    const Eigen::Index states = Eigen::Index{1} << c.n_spins;
    const int levels = c.n_max + 1;
    const double beta = displacement(c);
    const double coupling = p.g / std::sqrt(static_cast<double>(c.n_spins));  // (2g / sqrt N) * 1/2
    const double spin_shift = 2.0 * beta * coupling;
    const double photon_shift = p.omega * beta;

    Eigen::Map<const Eigen::MatrixXd> x(xv.data(), states, levels);
    Eigen::Map<Eigen::MatrixXd> y(yv.data(), states, levels);
    Eigen::MatrixXd fx(states, levels);
    flip_sum(x, c.n_spins, fx);

    for (int n = 0; n < levels; ++n) {
        const double photon = p.omega * n + p.omega * beta * beta;
        y.col(n) = (tab.diag.array() + photon) * x.col(n).array();
        if (n > 0) {
            const double sq = std::sqrt(static_cast<double>(n));
            y.col(n) += coupling * sq * fx.col(n - 1);
            if (photon_shift != 0.0) y.col(n) += photon_shift * sq * x.col(n - 1);
        }
        if (n + 1 < levels) {
            const double sq = std::sqrt(static_cast<double>(n + 1));
            y.col(n) += coupling * sq * fx.col(n + 1);
            if (photon_shift != 0.0) y.col(n) += photon_shift * sq * x.col(n + 1);
        }
        if (spin_shift != 0.0) y.col(n) += spin_shift * fx.col(n);
    }
}

}  // namespace

void validate_ed_config(const EDConfig& c) {
    if (c.n_spins < 4 || c.n_spins > 12 || c.n_spins % 2 != 0)
        throw ParamError("n_spins must be even with 4 <= n_spins <= 12");
    if (c.n_max < 8) throw ParamError("n_max must be at least 8");
    if (!(c.eig_tol > 0.0)) throw ParamError("eig_tol must be positive");
    if (ed_dimension(c) > c.dim_cap) {
        std::ostringstream os;
        os << "Hilbert dimension " << ed_dimension(c) << " exceeds the cap " << c.dim_cap;
        throw ParamError(os.str());
    }
}

std::int64_t ed_dimension(const EDConfig& c) { return (std::int64_t{1} << c.n_spins) * (c.n_max + 1); }

void apply_full_hamiltonian(const ModelParams& p, const EDConfig& c, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    validate_ed_config(c);
    y.resize(x.size());
    apply_with_tables(p, c, spin_tables(p, c.n_spins), x, y);
}

EDResult ed_full_ground(const ModelParams& p, const EDConfig& c) {
    validate_params(p);
    validate_ed_config(c);
    const SpinTables tab = spin_tables(p, c.n_spins);
    const Eigen::Index dim = ed_dimension(c);

    LinearOperator op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { apply_with_tables(p, c, tab, x, y); };
    LanczosOptions lo;
    lo.residual_tol = c.eig_tol;
    lo.krylov_dim = dim > (Eigen::Index{1} << 20) ? 24 : 60;
    lo.max_restarts = 2000;

    Eigenpair ground = lanczos_lowest(op, dim, lo);
    if (!ground.converged)
        throw ConvergenceError("full ED Lanczos did not converge, residual " + std::to_string(ground.residual));

    EDResult r;
    r.n_spins = c.n_spins;
    r.n_max = c.n_max;
    r.residual = ground.residual;
    r.gap = std::numeric_limits<double>::quiet_NaN();
    if (c.compute_gap) {
        Eigenpair first = lanczos_lowest(op, dim, lo, {ground.vector});
        if (first.converged) r.gap = first.value - ground.value;
    }

    const double n = c.n_spins;
    const Eigen::Index states = Eigen::Index{1} << c.n_spins;
    const int levels = c.n_max + 1;
    const double beta = displacement(c);
    Eigen::Map<const Eigen::MatrixXd> psi(ground.vector.data(), states, levels);

    double number = 0.0, q = 0.0, q2 = 0.0, stag = 0.0, parity = 0.0, mz = 0.0;
    for (int k = 0; k < levels; ++k) {
        const double w = psi.col(k).squaredNorm();
        number += k * w;
        q2 += (2.0 * k + 1.0) * w;
        stag += psi.col(k).cwiseAbs2().dot(tab.stag_sq);
        mz += psi.col(k).cwiseAbs2().dot(tab.sz);
        parity += ((k % 2 == 0) ? 1.0 : -1.0) * psi.col(k).cwiseAbs2().dot(tab.sign);
        if (k + 1 < levels) q += 2.0 * std::sqrt(k + 1.0) * psi.col(k).dot(psi.col(k + 1));
        if (k + 2 < levels) q2 += 2.0 * std::sqrt((k + 1.0) * (k + 2.0)) * psi.col(k).dot(psi.col(k + 2));
    }
    Eigen::MatrixXd fx(states, levels);
    flip_sum(psi, c.n_spins, fx);
    const Eigen::Map<const Eigen::VectorXd> flipped(fx.data(), dim);
    const double sx = 0.5 * flipped.dot(ground.vector);
    const double sx2 = 0.25 * flipped.squaredNorm();

    // back to the undisplaced frame
    r.energy_per_site = ground.value / n;
    r.photon_density = (number + beta * q + beta * beta) / n;
    r.quad_fluct = (q2 + 4.0 * beta * q + 4.0 * beta * beta) / n;
    r.quad_mean = (q + 2.0 * beta) / std::sqrt(n);
    r.s_pi = stag / (n * n);
    r.mx = sx / n;
    r.mz = mz / n;
    r.mx_rms = std::sqrt(sx2) / n;
    r.parity = c.displaced_frame ? std::numeric_limits<double>::quiet_NaN() : parity;
    return r;
}

EDResult converge_nmax(const ModelParams& p, const EDConfig& c, double energy_tol) {
    if (!(energy_tol > 0.0)) throw ParamError("energy_tol must be positive");
    EDConfig cur = c;
    cur.compute_gap = false;
    EDResult prev = ed_full_ground(p, cur);
    for (;;) {
        EDConfig next = cur;
        next.n_max = 2 * cur.n_max;
        if (ed_dimension(next) > next.dim_cap) {
            prev.nmax_converged = false;
            return prev;
        }
        EDResult r = ed_full_ground(p, next);
        const double noise = 10.0 * c.eig_tol;
        if (r.energy_per_site > prev.energy_per_site + noise) {
            std::ostringstream os;
            os << "ground energy rose from " << prev.energy_per_site << " to " << r.energy_per_site
               << " when n_max grew to " << next.n_max;
            throw ConsistencyError(os.str());
        }
        if (std::abs(r.energy_per_site - prev.energy_per_site) < energy_tol) {
            r.nmax_converged = true;
            return r;
        }
        prev = r;
        cur = next;
    }
}

double ed_superradiance_indicator(const EDResult& r, const EDResult& baseline) {
    if (r.n_spins != baseline.n_spins || r.n_max != baseline.n_max)
        throw ParamError("superradiance indicator needs a baseline at the same (N, n_max)");
    return r.quad_fluct - baseline.quad_fluct;
}

}  // namespace phasekit
