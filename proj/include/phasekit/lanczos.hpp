#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace phasekit {

/// y = H x for a real symmetric operator. y is pre-sized, contents unspecified.
using LinearOperator = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct LanczosOptions {
    double residual_tol{1e-10};  // ||H v - lambda v|| target
    int krylov_dim{60};          // basis size between restarts
    int max_restarts{200};
};

struct Eigenpair {
    double value{0.0};
    Eigen::VectorXd vector;
    double residual{0.0};
    int matvecs{0};
    bool converged{false};
};

/// Lowest eigenpair by explicitly restarted Lanczos with full
/// reorthogonalization. The start vector is the normalized all-ones vector
/// (projected off `deflate`), so results are deterministic. Vectors in
/// `deflate` must be orthonormal; the search is restricted to their
/// complement, which yields the next eigenpair.
Eigenpair lanczos_lowest(const LinearOperator& op, Eigen::Index dim, const LanczosOptions& opts = {},
                         const std::vector<Eigen::VectorXd>& deflate = {});

}  // namespace phasekit
