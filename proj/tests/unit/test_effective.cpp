#include <doctest.h>

#include <boost/math/special_functions/ellint_2.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "phasekit/effective.hpp"
#include "phasekit/free_fermion.hpp"
#include "phasekit/mean_field.hpp"

using namespace phasekit;

namespace {

// Closed-form free-fermion energy per site for J, Gamma >= 0 (Gamma = h / 2).
double elliptic_energy(double j, double h) {
    const double gamma = 0.5 * std::abs(h);
    j = std::abs(j);
    if (j + gamma == 0.0) return 0.0;
    const double k = std::min(1.0, 2.0 * std::sqrt(j * gamma) / (j + gamma));
    return -(2.0 / M_PI) * (j + gamma) * boost::math::ellint_2(k);
}

double elliptic_eff(double omega, double g, double j, double h) {
    return elliptic_energy(j, h) + omega * h * h / (16.0 * g * g);
}

struct DenseMin {
    double h, e;
};

DenseMin dense_scan(double omega, double g, double j, double h_max, double dh) {
    DenseMin best{0.0, elliptic_eff(omega, g, j, 0.0)};
    for (double h = dh; h <= h_max; h += dh) {
        const double e = elliptic_eff(omega, g, j, h);
        if (e < best.e) best = {h, e};
    }
    return best;
}

// Independent spins in a transverse field: e_chain = -sqrt(eps^2 + h^2) / 2.
double free_spin_h_star(double omega, double eps, double g) {
    const double r = 4.0 * g * g / omega;  // sqrt(eps^2 + h^2) at the minimum
    return r > eps ? std::sqrt(r * r - eps * eps) : 0.0;
}

}  // namespace

TEST_CASE("effective energy composes chain energy and photon cost") {
    const ModelParams p{1.0, 0.0, 0.5, 0.25};
    CHECK(effective_energy(p, 0.0, Backend::free_fermion()) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(effective_energy(p, 0.4, Backend::free_fermion()) ==
          doctest::Approx(elliptic_energy(0.25, 0.4) + 0.04).epsilon(1e-11));

    const ModelParams q{1.0, 1.0, 0.4, -0.3};
    const double e0 = effective_energy(q, 0.0, Backend::chain_ed(8));
    CHECK(e0 == doctest::Approx(oracle::lowest_eigenvalue(oracle::chain_hamiltonian(8, 1.0, -0.3, 0.0)) / 8.0));
    const double h = 0.7;
    CHECK(effective_energy(q, h, Backend::chain_ed(8)) ==
          doctest::Approx(oracle::lowest_eigenvalue(oracle::chain_hamiltonian(8, 1.0, -0.3, h)) / 8.0 +
                          h * h / (16.0 * 0.16))
              .epsilon(1e-10));
}

TEST_CASE("backend and coupling admissibility") {
    CHECK_THROWS_AS(effective_energy({1.0, 1.0, 0.5, 0.25}, 0.1, Backend::free_fermion()), ParamError);
    CHECK_THROWS_AS(effective_energy({1.0, 0.0, 0.0, 0.25}, 0.1, Backend::free_fermion()), ParamError);
    CHECK_THROWS_AS(effective_energy({1.0, 1.0, 0.5, 0.25}, 0.1, Backend::chain_ed(7)), ParamError);
    CHECK_THROWS_AS(ChainLandscape(0.5, 0.1, Backend::free_fermion()), ParamError);
    CHECK(default_h_max({1.0, 1.0, 0.5, 0.25}) == doctest::Approx(4.0));
    CHECK(default_h_max({1.0, 0.5, 2.0, 0.0}) == doctest::Approx(32.0));
}

TEST_CASE("J = 0 reduces to independent spins with threshold 0.5") {
    const ToleranceSet t;
    for (const Backend& b : {Backend::chain_ed(8), Backend::chain_ed(12)}) {
        const auto below = minimize_h({1.0, 1.0, 0.3, 0.0}, b, t);
        CHECK(below.h_star == 0.0);
        CHECK(below.label == PhaseLabel::PM_N);
        CHECK(below.energy == doctest::Approx(-0.5).epsilon(1e-10));

        const auto above = minimize_h({1.0, 1.0, 0.7, 0.0}, b, t);
        CHECK(above.residual < 1e-6);
        CHECK(above.label == PhaseLabel::PM_S);
        CHECK(above.h_star == doctest::Approx(free_spin_h_star(1.0, 1.0, 0.7)).epsilon(1e-7));

        // photon amplitude matches the mean-field solution, where the product ansatz is exact
        const auto mf = mf_minimize({1.0, 1.0, 0.7, 0.0}, t);
        CHECK(std::abs(above.orders.photon_displacement) ==
              doctest::Approx(std::abs(mf.orders.photon_displacement)).epsilon(1e-6));
        CHECK(above.energy == doctest::Approx(mf.energy).epsilon(1e-8));
    }
}

TEST_CASE("g = 0 pins the induced field to zero") {
    const ToleranceSet t;
    const auto s = minimize_h({1.0, 1.0, 0.0, -0.5}, Backend::chain_ed(8), t);
    CHECK(s.h_star == 0.0);
    CHECK(s.energy == doctest::Approx(-0.5));
    CHECK(s.label == PhaseLabel::AFM_N);
}

TEST_CASE("stationarity identity holds at every reported minimum") {
    const ToleranceSet t;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> gd(0.2, 1.2), jd(-0.6, 0.6);
    for (int i = 0; i < 6; ++i) {
        const ModelParams p{1.0, 1.0, gd(rng), jd(rng)};
        const auto s = minimize_h(p, Backend::chain_ed(8), t);
        CHECK(s.residual < 1e-6);
        for (const auto& m : s.minima) CHECK(m.energy >= s.energy - 1e-14);
    }
}

TEST_CASE("first-order jump at eps = 0 agrees with a dense h scan") {
    const ToleranceSet t;
    const ModelParams tmpl{1.0, 0.0, 0.0, 0.5};
    const TransitionPoint tp = locate_transition_g(tmpl, Backend::free_fermion(), t);
    REQUIRE(tp.order == TransitionOrder::First);
    CHECK(tp.jump > t.tol_jump);
    CHECK(tp.coexistent);
    CHECK(tp.coexistence_gap < 1e-8);

    for (double dg : {-2e-3, 2e-3}) {
        const double g = tp.g_c + dg;
        const auto s = minimize_h(tmpl.with_g(g), Backend::free_fermion(), t);
        const DenseMin d = dense_scan(1.0, g, 0.5, 6.0, 1e-4);
        CHECK(std::abs(s.h_star - d.h) <= 1e-4);
        CHECK(s.energy <= d.e + 1e-12);
        CHECK(s.energy == doctest::Approx(d.e).epsilon(1e-8));
        CHECK_FALSE(s.coexistent);
        if (dg < 0) CHECK(s.h_star == 0.0);
        else CHECK(s.h_star > 0.5 * tp.jump);
    }

    // at the crossing both minima are present and degenerate
    const auto at = minimize_h(tmpl.with_g(tp.g_c), Backend::free_fermion(), t);
    CHECK(at.coexistent);
    REQUIRE(at.minima.size() >= 2);
    CHECK(at.minima.front().h == 0.0);
    CHECK(std::abs(at.minima.back().h - at.minima.front().h) > t.tol_jump);
}

TEST_CASE("spinodal coupling") {
    // chi = 1 / (8J) for the ordered free-fermion chain gives g_sp = sqrt(omega J)
    for (double j : {0.25, 0.5, 0.75, 1.0}) {
        CHECK(spinodal_g(1.0, j) == doctest::Approx(std::sqrt(j)).epsilon(1e-5));
        CHECK(spinodal_g(4.0, j) == doctest::Approx(2.0 * spinodal_g(1.0, j)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(spinodal_g(1.0, 0.0), ParamError);
    CHECK_THROWS_AS(spinodal_g(0.0, 0.5), ParamError);
}

TEST_CASE("first-order transitions precede the spinodal") {
    const ToleranceSet t;
    for (double j : {0.5, 0.75, 1.0}) {
        const TransitionPoint tp = locate_transition_g({1.0, 0.0, 0.0, j}, Backend::free_fermion(), t);
        CHECK(tp.order == TransitionOrder::First);
        CHECK(tp.g_c < spinodal_g(1.0, j) - 1e-3);
        CHECK(tp.backend == "free-fermion");
    }
}

TEST_CASE("chain-ED threshold at J = 0 is second order near 0.5") {
    const ToleranceSet t;
    LocateOptions opts;
    opts.trend_sizes = {8, 12};
    const TransitionPoint tp = locate_transition_g({1.0, 1.0, 0.0, 0.0}, Backend::chain_ed(12), t, 0.3, 0.7, opts);
    CHECK(tp.g_c == doctest::Approx(0.5).epsilon(0.02));
    CHECK(tp.order == TransitionOrder::Second);
    CHECK(tp.below == PhaseLabel::PM_N);
    CHECK(tp.above == PhaseLabel::PM_S);
    CHECK(tp.bracket_width <= 1e-6);
    REQUIRE(tp.jump_trend.size() == 2);
    CHECK(tp.jump_trend[0].first == 8);
    CHECK(tp.jump_trend[1].first == 12);
}

TEST_CASE("weak ferromagnetic coupling stays second order at finite size") {
    const ToleranceSet t;
    LocateOptions opts;
    opts.trend_sizes = {8, 12};
    const TransitionPoint tp = locate_transition_g({1.0, 1.0, 0.0, 0.25}, Backend::chain_ed(12), t, opts);
    CHECK(tp.order == TransitionOrder::Second);
    CHECK(tp.jump < t.tol_jump);
    REQUIRE(tp.jump_trend.size() == 2);
    for (const auto& [n, jump] : tp.jump_trend) {
        CAPTURE(n);
        CHECK(jump < t.tol_jump);
    }
}

TEST_CASE("a label-preserving g bracket is rejected") {
    const ToleranceSet t;
    CHECK_THROWS_AS(locate_transition_g({1.0, 1.0, 0.0, 0.0}, Backend::chain_ed(8), t, 0.1, 0.2), BracketError);
    CHECK_THROWS_AS(locate_transition_g({1.0, 1.0, 0.0, 0.0}, Backend::chain_ed(8), t, 0.4, 0.3), BracketError);
}

TEST_CASE("multicritical bracket with both ends second order reports its probes") {
    const ToleranceSet t;
    try {
        (void)locate_multicritical({1.0, 1.0, 0.0, 0.0}, Backend::chain_ed(8), 0.05, 0.2, t);
        FAIL("expected a bracket error");
    } catch (const MulticriticalBracketError& e) {
        REQUIRE(e.probes().size() == 2);
        for (const auto& tp : e.probes()) CHECK(tp.order == TransitionOrder::Second);
        CHECK(e.probes()[0].j == 0.05);
        CHECK(e.probes()[1].j == 0.2);
    }
}

TEST_CASE("e_eff is even in h") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> jd(0.05, 1.0), hd(0.0, 3.0), gd(0.2, 1.5);
    for (int i = 0; i < 20; ++i) {
        const ModelParams p{1.0, 0.0, gd(rng), jd(rng)};
        const double h = hd(rng);
        CHECK(std::abs(effective_energy(p, h, Backend::free_fermion()) -
                       effective_energy(p, -h, Backend::free_fermion())) < 1e-10);
    }
    std::uniform_real_distribution<double> js(-0.6, 0.6);
    for (int i = 0; i < 5; ++i) {
        const ModelParams p{1.0, 1.0, gd(rng), js(rng)};
        const double h = hd(rng);
        CHECK(std::abs(effective_energy(p, h, Backend::chain_ed(8)) - effective_energy(p, -h, Backend::chain_ed(8))) <
              1e-9);
    }
}

TEST_CASE("h = 0 is stationary for both backends") {
    for (double j : {-0.7, -0.2, 0.3, 0.9}) {
        CHECK(ChainLandscape(0.0, j, Backend::free_fermion()).at(0.0).mx == 0.0);
        CHECK(ChainLandscape(1.0, j, Backend::chain_ed(8)).at(0.0).mx == 0.0);
    }
}

TEST_CASE("sublattice mapping J -> -J at eps = 0") {
    const ToleranceSet t;
    for (double j : {0.3, 0.6}) {
        for (double g : {0.4, 0.9}) {
            const auto fp = minimize_h({1.0, 0.0, g, j}, Backend::free_fermion(), t);
            const auto fm = minimize_h({1.0, 0.0, g, -j}, Backend::free_fermion(), t);
            CHECK(fp.h_star == fm.h_star);
            CHECK(fp.energy == fm.energy);

            const auto ep = minimize_h({1.0, 0.0, g, j}, Backend::chain_ed(8), t);
            const auto em = minimize_h({1.0, 0.0, g, -j}, Backend::chain_ed(8), t);
            CHECK(ep.h_star == doctest::Approx(em.h_star).epsilon(1e-7));
            CHECK(ep.energy == doctest::Approx(em.energy).epsilon(1e-10));
        }
    }
}

TEST_CASE("landscape grid reproduces e_eff and its minima") {
    const ToleranceSet t;
    const ModelParams p{1.0, 0.0, 0.66, 0.5};
    ChainLandscape land(0.0, 0.5, Backend::free_fermion());
    const EffectiveLandscape l = effective_landscape(p, land, t);
    REQUIRE(l.h_grid.size() == l.e_values.size());
    CHECK(l.h_grid.back() >= default_h_max(p) - 1e-12);
    CHECK(l.h_grid[1] - l.h_grid[0] <= 1e-2);
    for (std::size_t i = 0; i < l.h_grid.size(); i += 37) {
        CHECK(std::isfinite(l.e_values[i]));
        CHECK(l.e_values[i] == doctest::Approx(elliptic_eff(1.0, 0.66, 0.5, l.h_grid[i])).epsilon(1e-10));
    }
    for (double e : l.e_values) CHECK(e >= l.global.energy - 1e-12);
    CHECK(l.e_values.back() > l.e_values[l.e_values.size() - 2]);
}

TEST_CASE("antiferromagnetic structure threshold") {
    CHECK(afm_structure_threshold(16) == doctest::Approx(5.0 / 64.0));
    // an uncorrelated paramagnet sits at 1/(4N); the classical Neel state is far above the threshold
    const ChainLandscape land(1.0, -0.5, Backend::chain_ed(8));
    CHECK(land.at(0.0).s_pi > afm_structure_threshold(8));
    CHECK(land.at(0.0).m_stag == doctest::Approx(0.5));
    const ChainLandscape pm(0.0, 0.0, Backend::chain_ed(8));
    CHECK(pm.at(1.0).s_pi == doctest::Approx(1.0 / 32.0));
}
