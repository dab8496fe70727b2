#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "phasekit/lanczos.hpp"

using namespace phasekit;

namespace {

Eigen::MatrixXd random_symmetric(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) a(i, k) = d(rng);
    return 0.5 * (a + a.transpose());
}

LinearOperator dense_op(const Eigen::MatrixXd& m) {
    return [&m](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = m * x; };
}

}  // namespace

TEST_CASE("lowest eigenpair of a dense random matrix") {
    const Eigen::MatrixXd m = random_symmetric(300, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    LanczosOptions o;
    o.residual_tol = 1e-11;
    const Eigenpair ep = lanczos_lowest(dense_op(m), m.rows(), o);
    REQUIRE(ep.converged);
    CHECK(std::abs(ep.value - es.eigenvalues()(0)) < 1e-9);
    CHECK((m * ep.vector - ep.value * ep.vector).norm() < 1e-10);
    CHECK(ep.vector.norm() == doctest::Approx(1.0));
}

TEST_CASE("deflation yields the next eigenvalue") {
    const Eigen::MatrixXd m = random_symmetric(200, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    LanczosOptions o;
    o.residual_tol = 1e-11;
    const Eigenpair e0 = lanczos_lowest(dense_op(m), m.rows(), o);
    const Eigenpair e1 = lanczos_lowest(dense_op(m), m.rows(), o, {e0.vector});
    REQUIRE(e1.converged);
    CHECK(std::abs(e1.value - es.eigenvalues()(1)) < 1e-9);
    CHECK(std::abs(e1.vector.dot(e0.vector)) < 1e-10);
}

TEST_CASE("results are bit-reproducible") {
    const Eigen::MatrixXd m = random_symmetric(120, 3);
    const Eigenpair a = lanczos_lowest(dense_op(m), m.rows());
    const Eigenpair b = lanczos_lowest(dense_op(m), m.rows());
    CHECK(a.value == b.value);
    CHECK(a.vector == b.vector);
}

TEST_CASE("tiny and diagonal operators") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(5, 5);
    d.diagonal() << 3, -1, 2, 7, 0.5;
    const Eigenpair ep = lanczos_lowest(dense_op(d), 5);
    CHECK(ep.value == doctest::Approx(-1.0));
    Eigen::MatrixXd one(1, 1);
    one << 4.0;
    CHECK(lanczos_lowest(dense_op(one), 1).value == doctest::Approx(4.0));
}
