#include "phasekit/lanczos.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "phasekit/model.hpp"

namespace phasekit {

namespace {

void project_out(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
    for (const auto& b : basis) v -= b.dot(v) * b;
}

}  // namespace

Eigenpair lanczos_lowest(const LinearOperator& op, Eigen::Index dim, const LanczosOptions& opts,
                         const std::vector<Eigen::VectorXd>& deflate) {
    if (dim <= 0) throw ParamError("operator dimension must be positive");
    if (static_cast<Eigen::Index>(deflate.size()) >= dim) throw ParamError("deflation space fills the whole space");

    Eigenpair out;
    Eigen::VectorXd start = Eigen::VectorXd::Ones(dim);
    project_out(start, deflate);
    project_out(start, deflate);
    if (start.norm() < 1e-8) {
        // all-ones lies in the deflation space; fall back to a fixed ramp
        start = Eigen::VectorXd::LinSpaced(dim, 1.0, 2.0);
        project_out(start, deflate);
        project_out(start, deflate);
    }
    start.normalize();

    const int m_max = static_cast<int>(std::min<Eigen::Index>(opts.krylov_dim, dim - static_cast<Eigen::Index>(deflate.size())));
    Eigen::MatrixXd basis(dim, m_max);
    Eigen::VectorXd w(dim);

    // lowest Ritz vector of the leading m x m block of the tridiagonal matrix
    auto ritz_coeffs = [](const std::vector<double>& alpha, const std::vector<double>& beta, int m) {
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1))
                                    : Eigen::VectorXd();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        return Eigen::VectorXd(tri.eigenvectors().col(0));
    };

    for (int restart = 0; restart <= opts.max_restarts; ++restart) {
        std::vector<double> alpha, beta;
        basis.col(0) = start;
        bool invariant = false;

        for (int k = 0; k < m_max; ++k) {
            op(basis.col(k), w);
            ++out.matvecs;
            const double a = basis.col(k).dot(w);
            alpha.push_back(a);
            // full reorthogonalization, two passes
            for (int pass = 0; pass < 2; ++pass) {
                project_out(w, deflate);
                const auto v = basis.leftCols(k + 1);
                w.noalias() -= v * (v.transpose() * w);
            }
            const double b = w.norm();
            if (k + 1 == m_max) break;
            if (b < 1e-14 * std::max(1.0, std::abs(a))) {
                invariant = true;
                break;
            }
            beta.push_back(b);
            basis.col(k + 1) = w / b;
            // residual estimate of the lowest Ritz pair is b |s_last|
            if (k >= 4 && k % 4 == 0) {
                const Eigen::VectorXd s = ritz_coeffs(alpha, beta, k + 1);
                if (b * std::abs(s(k)) < 0.1 * opts.residual_tol) break;
            }
        }

        const int m = static_cast<int>(alpha.size());
        const Eigen::VectorXd s = ritz_coeffs(alpha, beta, m);
        Eigen::VectorXd ritz = basis.leftCols(m) * s;
        project_out(ritz, deflate);
        ritz.normalize();

        op(ritz, w);
        ++out.matvecs;
        const double theta = ritz.dot(w);
        const double residual = (w - theta * ritz).norm();

        out.value = theta;
        out.vector = ritz;
        out.residual = residual;
        if (residual < opts.residual_tol || (invariant && residual < 1e3 * opts.residual_tol)) {
            out.converged = true;
            return out;
        }
        start = ritz;
    }
    return out;
}

}  // namespace phasekit
