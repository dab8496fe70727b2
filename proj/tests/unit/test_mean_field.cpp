#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "phasekit/mean_field.hpp"

using namespace phasekit;

namespace {

constexpr double kPi = std::numbers::pi;

double expectation_oracle(const ModelParams& p, const MeanFieldAnsatz& a) {
    return oracle::mean_field_expectation(p.omega, p.eps, p.g, p.j, a.alpha, a.theta_a, a.theta_b);
}

// Alpha eliminated in closed form from the expectation value; used for dense scans.
double reduced_oracle(const ModelParams& p, double ta, double tb) {
    const double s = std::sin(ta) + std::sin(tb);
    return -p.g * p.g * s * s / (4.0 * p.omega) + 0.25 * p.eps * (std::cos(ta) + std::cos(tb)) -
           p.j * std::cos(ta) * std::cos(tb);
}

struct DenseMin {
    double energy, ta, tb;
};

DenseMin dense_scan(const ModelParams& p, double step) {
    DenseMin best{1e300, 0, 0};
    const int n = static_cast<int>(std::ceil(2.0 * kPi / step));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double ta = -kPi + i * step, tb = -kPi + k * step;
            const double e = reduced_oracle(p, ta, tb);
            if (e < best.energy) best = {e, ta, tb};
        }
    return best;
}

double analytic_afm_instability(double omega, double eps, double j) {
    return std::sqrt(4.0 * omega * (j * j / 4.0 - eps * eps / 64.0) / std::abs(j));
}

}  // namespace

TEST_CASE("mean-field energy matches the N=4 expectation-value oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0), angle(-kPi, kPi), sym(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const ModelParams p{0.2 + 2.0 * u01(rng), 2.0 * u01(rng), 1.5 * u01(rng), sym(rng)};
        const MeanFieldAnsatz a{sym(rng), angle(rng), angle(rng)};
        CHECK(std::abs(mf_energy(p, a) - expectation_oracle(p, a)) < 1e-8);
    }
}

TEST_CASE("mean-field energy worked values") {
    CHECK(mf_energy({1, 1, 0, 0}, {0, kPi, kPi}) == doctest::Approx(-0.5));
    CHECK(mf_energy({1, 1, 0, -0.5}, {0, 0, kPi}) == doctest::Approx(-0.5));
    CHECK(mf_energy({1, 1, 0.5, 0.2}, {0.1, kPi / 2, kPi / 2}) == doctest::Approx(0.11));
    CHECK(std::abs(mf_energy({1, 1, 0.5, 0.2}, {0.1, kPi / 2, kPi / 2}) -
                   expectation_oracle({1, 1, 0.5, 0.2}, {0.1, kPi / 2, kPi / 2})) < 1e-8);
}

TEST_CASE("optimal photon amplitude") {
    CHECK(mf_alpha_opt({1, 1, 0, 0}, 0.3, 1.2) == 0.0);
    CHECK(mf_alpha_opt({1, 1, 0.5, 0}, kPi / 2, kPi / 2) == doctest::Approx(-0.5));
    CHECK(std::abs(mf_alpha_opt({1, 1, 0.8, 0.3}, 0.0, kPi)) < 1e-15);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(-kPi, kPi), u(0.1, 2.0);
    for (int i = 0; i < 100; ++i) {
        const ModelParams p{u(rng), u(rng), u(rng), u(rng) - 1.0};
        const double ta = angle(rng), tb = angle(rng);
        const double a = mf_alpha_opt(p, ta, tb);
        const double e0 = mf_energy(p, {a, ta, tb});
        CHECK(e0 <= mf_energy(p, {a + 1e-3, ta, tb}));
        CHECK(e0 <= mf_energy(p, {a - 1e-3, ta, tb}));
        CHECK(mf_reduced_energy(p, ta, tb) == doctest::Approx(e0).epsilon(1e-14));
    }
}

TEST_CASE("parity and sublattice exchange are exact symmetries") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> angle(-kPi, kPi), u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const ModelParams p{1.0 + u(rng) * 0.5, 1.0 + u(rng) * 0.5, std::abs(u(rng)), u(rng)};
        const MeanFieldAnsatz a{u(rng), angle(rng), angle(rng)};
        CHECK(mf_energy(p, a) == mf_energy(p, {-a.alpha, -a.theta_a, -a.theta_b}));
        CHECK(mf_energy(p, a) == mf_energy(p, {a.alpha, a.theta_b, a.theta_a}));
    }
}

TEST_CASE("zero coupling reproduces the classical ground state") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const ToleranceSet t;
    for (int i = 0; i < 20; ++i) {
        const ModelParams p{1, 1, 0, u(rng)};
        const auto sol = mf_minimize(p, t);
        const auto cg = classical_ground(p);
        CHECK(std::abs(sol.energy - cg.energy) < 1e-10);
        CHECK(sol.label == cg.label);
    }
}

TEST_CASE("minimizer agrees with dense scans of the reduced energy") {
    const ToleranceSet t;
    SUBCASE("J=0, below threshold") {
        const ModelParams p{1, 1, 0.3, 0};
        const auto sol = mf_minimize(p, t);
        // one-angle scan on the uniform section at 1e-4 resolution
        double best = 1e300;
        for (double th = -kPi; th <= kPi; th += 1e-4) best = std::min(best, reduced_oracle(p, th, th));
        CHECK(sol.label == PhaseLabel::PM_N);
        CHECK(sol.ansatz.alpha == 0.0);
        CHECK(std::abs(std::abs(sol.ansatz.theta_a) - kPi) < 1e-8);
        CHECK(std::abs(std::abs(sol.ansatz.theta_b) - kPi) < 1e-8);
        CHECK(sol.energy <= best + 1e-12);
        CHECK(sol.energy == doctest::Approx(-0.5));
    }
    SUBCASE("J=0, above threshold") {
        const ModelParams p{1, 1, 0.7, 0};
        const auto sol = mf_minimize(p, t);
        double best = 1e300;
        for (double th = -kPi; th <= kPi; th += 1e-4) best = std::min(best, reduced_oracle(p, th, th));
        CHECK(sol.label == PhaseLabel::PM_S);
        CHECK(sol.ansatz.alpha < -1e-2);
        CHECK(sol.energy <= best + 1e-12);
        CHECK(sol.energy > best - 1e-7);  // scan resolution bound
    }
    SUBCASE("antiferromagnetic side, weak coupling") {
        const ModelParams p{1, 1, 0.05, -0.5};
        const auto sol = mf_minimize(p, t);
        const DenseMin dense = dense_scan(p, 1e-3);
        CHECK(sol.label == PhaseLabel::AFM_N);
        CHECK(std::abs(sol.ansatz.alpha) < 1e-12);
        CHECK(std::abs(std::abs(sol.orders.m_stag) - 0.5) < 1e-10);
        CHECK(sol.energy <= dense.energy + 1e-12);
        CHECK(sol.energy > dense.energy - 1e-5);
    }
}

TEST_CASE("minimizer is global on random parameters") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ToleranceSet t;
    for (int i = 0; i < 25; ++i) {
        const ModelParams p{1, 1, 1.2 * u(rng), -1.0 + 2.0 * u(rng)};
        const auto sol = mf_minimize(p, t);
        const DenseMin dense = dense_scan(p, 2e-2);
        CHECK(sol.energy <= dense.energy + 1e-12);
        // gauge fixing
        CHECK(sol.ansatz.alpha <= 0.0);
        CHECK(sol.ansatz.theta_a >= sol.ansatz.theta_b);
        CHECK(sol.ansatz.theta_a <= kPi);
        CHECK(sol.ansatz.theta_b > -kPi);
        // orders follow the ansatz
        CHECK(sol.orders.mx == doctest::Approx(0.25 * (std::sin(sol.ansatz.theta_a) + std::sin(sol.ansatz.theta_b))));
        CHECK(sol.label == classify_orders(sol.orders, t));
    }
}

TEST_CASE("minimizer is deterministic and validates its start grid") {
    const ToleranceSet t;
    const ModelParams p{1, 1, 0.62, -0.45};
    const auto a = mf_minimize(p, t), b = mf_minimize(p, t);
    CHECK(a.energy == b.energy);
    CHECK(a.ansatz.theta_a == b.ansatz.theta_a);
    CHECK(a.ansatz.theta_b == b.ansatz.theta_b);
    CHECK_THROWS_AS(mf_minimize(p, t, 4), ParamError);
}

TEST_CASE("J=0 superradiant threshold by bisection") {
    const ToleranceSet t;
    const TransitionPoint tp = mf_boundary_bisect({1, 1, 0, 0}, 0.3, 0.7, t);
    CHECK(std::abs(tp.g_c - 0.5) < 1e-4);
    CHECK(tp.order == TransitionOrder::Second);
    CHECK(tp.below == PhaseLabel::PM_N);
    CHECK(tp.above == PhaseLabel::PM_S);
    CHECK(tp.bracket_width <= 1e-6);
    // threshold scales as sqrt(omega eps) / 2
    const TransitionPoint tp2 = mf_boundary_bisect({4, 1, 0, 0}, 0.6, 1.4, t);
    CHECK(std::abs(tp2.g_c - 1.0) < 1e-4);
    CHECK_THROWS_AS(mf_boundary_bisect({1, 1, 0, 0}, 0.1, 0.2, t), BracketError);
}

TEST_CASE("classical boundary by J-bisection") {
    const ToleranceSet t;
    const TransitionPoint tp = mf_boundary_bisect_j({1, 1, 0, 0}, -0.5, 0.0, t, 1e-10);
    CHECK(std::abs(tp.j - (-0.25)) < 1e-10);
    CHECK(tp.bracket_width <= 1e-10);
}

TEST_CASE("continuous onset of superradiance inside the antiferromagnet") {
    const ToleranceSet t;
    for (double j : {-0.3, -0.5}) {
        CAPTURE(j);
        const double g1 = analytic_afm_instability(1, 1, j);
        const TransitionPoint tp = mf_boundary_bisect({1, 1, 0, j}, g1 - 0.05, g1 + 0.01, t);
        CHECK(tp.below == PhaseLabel::AFM_N);
        CHECK(tp.above == PhaseLabel::AFM_S);
        CHECK(std::abs(tp.g_c - g1) < 1e-6);
        CHECK(tp.jump < 1e-3);
        CHECK(tp.order == TransitionOrder::Second);
        // dense scans on both sides confirm the located boundary
        const ModelParams lo{1, 1, tp.g_c - 5e-3, j}, hi{1, 1, tp.g_c + 5e-3, j};
        CHECK(mf_minimize(lo, t).energy <= dense_scan(lo, 2e-3).energy + 1e-12);
        CHECK(mf_minimize(hi, t).energy <= dense_scan(hi, 2e-3).energy + 1e-12);
        const DenseMin d_hi = dense_scan(hi, 2e-3);
        CHECK(std::abs(std::sin(d_hi.ta) + std::sin(d_hi.tb)) > 1e-3);  // canted on the superradiant side
    }
}

TEST_CASE("intermediate AFM-S window") {
    const ToleranceSet t;
    const auto w3 = mf_intermediate_window({1, 1, 0, -0.3}, t);
    REQUIRE(w3.has_value());
    CHECK(w3->g_c1 < w3->g_c2);
    CHECK(std::isfinite(w3->g_c2));
    CHECK(w3->lower.jump < 1e-3);

    // fine label scan at dg = 1e-4 around the window
    double first_s = -1, last_afm_s = -1;
    for (double g = w3->g_c1 - 0.01; g < w3->g_c2 + 0.01; g += 1e-4) {
        const auto l = mf_minimize({1, 1, g, -0.3}, t).label;
        if (l == PhaseLabel::AFM_S) {
            if (first_s < 0) first_s = g;
            last_afm_s = g;
        }
    }
    CHECK(std::abs(first_s - w3->g_c1) < 2e-4);
    CHECK(std::abs(last_afm_s - w3->g_c2) < 2e-4);

    CHECK_FALSE(mf_intermediate_window({1, 1, 0, 0}, t).has_value());

    const auto w5 = mf_intermediate_window({1, 1, 0, -0.5}, t);
    const auto w26 = mf_intermediate_window({1, 1, 0, -0.26}, t);
    REQUIRE(w5.has_value());
    REQUIRE(w26.has_value());
    const double width5 = w5->g_c2 - w5->g_c1, width26 = w26->g_c2 - w26->g_c1;
    MESSAGE("window widths: J=-0.26 " << width26 << ", J=-0.3 " << (w3->g_c2 - w3->g_c1) << ", J=-0.5 " << width5);
    CHECK(width26 > 0.0);
    CHECK(width5 > 0.0);
}
