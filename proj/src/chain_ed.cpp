#include "phasekit/chain_ed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "phasekit/model.hpp"

namespace phasekit {

namespace {

std::uint32_t rotate(std::uint32_t s, int n) {
    return (s >> 1) | ((s & 1u) << (n - 1));
}

// Smallest cyclic rotation and the number of distinct rotations.
std::pair<std::uint32_t, int> representative(std::uint32_t s, int n) {
    std::uint32_t rep = s;
    std::uint32_t t = s;
    int period = n;
    for (int k = 1; k < n; ++k) {
        t = rotate(t, n);
        if (t == s) {
            period = k;
            break;
        }
        rep = std::min(rep, t);
    }
    return {rep, period};
}

double spin(std::uint32_t s, int i) { return ((s >> i) & 1u) ? 0.5 : -0.5; }

}  // namespace

ChainSector::ChainSector(int n_sites) : n_(n_sites) {
    if (n_sites < 2 || n_sites > 24) throw ParamError("chain sector size out of range");
    const std::uint32_t full = 1u << n_;
    for (std::uint32_t s = 0; s < full; ++s) {
        const auto [rep, period] = representative(s, n_);
        if (rep == s) {
            reps_.push_back(s);
            period_.push_back(period);
        }
    }

    const auto d = dim();
    sz_.resize(d);
    zz_.resize(d);
    stag2_.resize(d);
    for (Eigen::Index a = 0; a < d; ++a) {
        const std::uint32_t s = reps_[a];
        double mz = 0.0, zz = 0.0, st = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double zi = spin(s, i);
            mz += zi;
            zz += zi * spin(s, (i + 1) % n_);
            st += (i % 2 == 0 ? zi : -zi);
        }
        sz_(a) = mz;
        zz_(a) = zz;
        stag2_(a) = st * st;
    }

    // <b~| sum_i s^x_i |a~> collects 1/2 sqrt(R_a / R_b) per flip of a landing in the orbit of b.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(d) * n_);
    for (Eigen::Index a = 0; a < d; ++a) {
        const std::uint32_t s = reps_[a];
        for (int i = 0; i < n_; ++i) {
            const auto [rep, period] = representative(s ^ (1u << i), n_);
            const auto it = std::lower_bound(reps_.begin(), reps_.end(), rep);
            const auto b = static_cast<Eigen::Index>(it - reps_.begin());
            triplets.emplace_back(b, a, 0.5 * std::sqrt(static_cast<double>(period_[a]) / period));
        }
    }
    sx_.resize(d, d);
    sx_.setFromTriplets(triplets.begin(), triplets.end());
    sx_.makeCompressed();
}

const ChainSector& chain_sector(int n_sites) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<ChainSector>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n_sites];
    if (!slot) slot = std::make_unique<ChainSector>(n_sites);
    return *slot;
}

void validate_chain(const ChainParams& c) {
    if (c.n_sites < 4 || c.n_sites > 20 || c.n_sites % 2 != 0)
        throw ParamError("n_sites must be even with 4 <= n_sites <= 20");
    if (!std::isfinite(c.eps) || !std::isfinite(c.j) || !std::isfinite(c.h))
        throw ParamError("chain parameters must be finite");
}

ChainResult ed_chain_ground(const ChainParams& c, const LanczosOptions& opts) {
    validate_chain(c);
    const ChainSector& sec = chain_sector(c.n_sites);
    const double n = c.n_sites;
    const Eigen::VectorXd diag = c.eps * sec.sz_total() - 4.0 * c.j * sec.zz_bonds();

    Eigen::VectorXd psi;
    ChainResult out;
    if (c.h == 0.0) {
        const double emin = diag.minCoeff();
        psi = Eigen::VectorXd::Zero(sec.dim());
        int count = 0;
        for (Eigen::Index a = 0; a < sec.dim(); ++a) {
            if (diag(a) - emin <= 1e-12 * std::max(1.0, std::abs(emin))) {
                psi(a) = 1.0;
                count += sec.periods()[static_cast<std::size_t>(a)];
            }
        }
        psi.normalize();
        out.degenerate = count > 1;  // counted in the full 2^N space
        out.residual = 0.0;
    } else {
        const auto& sx = sec.sx_total();
        const double h = c.h;
        LinearOperator op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
            y.noalias() = diag.cwiseProduct(x);
            y.noalias() -= h * (sx * x);
        };
        Eigenpair ep = lanczos_lowest(op, sec.dim(), opts);
        if (!ep.converged)
            throw ConvergenceError("chain Lanczos did not converge, residual " + std::to_string(ep.residual));
        psi = std::move(ep.vector);
        out.residual = ep.residual;
    }

    const Eigen::VectorXd prob = psi.cwiseAbs2();
    const double e_diag = prob.dot(diag);
    const double x_expect = psi.dot(sec.sx_total() * psi);
    out.energy = (e_diag - c.h * x_expect) / n;
    out.mx = x_expect / n;
    out.mz = prob.dot(sec.sz_total()) / n;
    out.s_pi = prob.dot(sec.stag_sq()) / (n * n);
    return out;
}

}  // namespace phasekit
