#pragma once

// Two-sublattice mean-field treatment: coherent photon state |sqrt(N) alpha>
// times a product state whose A and B sublattice spins point along polar
// angles theta_a, theta_b in the x-z plane, <s^z> = cos(theta)/2 and
// <s^x> = sin(theta)/2. The photon amplitude alpha is real since the
// coupling involves only (a + a^dag) and s^x.

#include <optional>
#include <vector>

#include "phasekit/model.hpp"
#include "phasekit/transition.hpp"

namespace phasekit {

struct MeanFieldAnsatz {
    double alpha{0.0};
    double theta_a{0.0};
    double theta_b{0.0};
};

struct MeanFieldSolution {
    MeanFieldAnsatz ansatz;
    double energy{0.0};
    OrderParams orders;
    PhaseLabel label{PhaseLabel::PM_N};
    int n_starts_agreeing{0};
    int n_starts{0};
    // Set when a distinct local minimum lies within tol_energy of the
    // global one (suspected first-order coexistence).
    bool coexistent{false};
    std::optional<MeanFieldAnsatz> competing;
    double competing_energy{0.0};
};

struct IntermediateWindow {
    double g_c1{0.0};  // AFM-N -> AFM-S
    double g_c2{0.0};  // AFM-S -> PM-S
    TransitionPoint lower;
    TransitionPoint upper;
};

/// Energy per site of the ansatz:
///   omega alpha^2 + (eps/4)(cos ta + cos tb) + g alpha (sin ta + sin tb) - J cos ta cos tb
double mf_energy(const ModelParams& p, const MeanFieldAnsatz& a);

/// Stationary photon amplitude for fixed spin angles.
double mf_alpha_opt(const ModelParams& p, double theta_a, double theta_b);

/// mf_energy with alpha eliminated through mf_alpha_opt.
double mf_reduced_energy(const ModelParams& p, double theta_a, double theta_b);

OrderParams mf_orders(const MeanFieldAnsatz& a);

/// Canonical representative under parity and sublattice exchange:
/// alpha <= 0 (sin ta + sin tb >= 0) and theta_a >= theta_b, angles in (-pi, pi].
MeanFieldAnsatz mf_canonicalize(const ModelParams& p, MeanFieldAnsatz a);

/// Global minimum from an n_starts x n_starts grid of (theta_a, theta_b)
/// starting points plus the polarized, Neel and x-polarized states, each
/// refined by damped Newton descent to gradient norm 1e-10.
MeanFieldSolution mf_minimize(const ModelParams& p, const ToleranceSet& t, int n_starts = 8);

/// Bisection in g at fixed J between two couplings with different labels.
/// The default bracket target is tighter than 1e-6 so that a continuous
/// onset shows a jump well below tol_jump.
TransitionPoint mf_boundary_bisect(const ModelParams& tmpl, double g_lo, double g_hi, const ToleranceSet& t,
                                   double width = 1e-9);

/// Bisection in J at fixed g.
TransitionPoint mf_boundary_bisect_j(const ModelParams& tmpl, double j_lo, double j_hi, const ToleranceSet& t,
                                     double width = 1e-10);

/// Labels along g = 0, dg, 2 dg, ... until PM-S is reached (or g_max).
std::vector<std::pair<double, PhaseLabel>> mf_label_scan(const ModelParams& tmpl, const ToleranceSet& t, double dg,
                                                         double g_max);

/// Boundaries of the AFM-S window at fixed J. Returns nullopt when the g = 0
/// state is not antiferromagnetic or when no AFM-S point is found. Throws
/// ConsistencyError if the label sequence is not AFM-N -> [AFM-S ->] PM-S.
std::optional<IntermediateWindow> mf_intermediate_window(const ModelParams& tmpl, const ToleranceSet& t,
                                                         double dg = 1e-3, double g_max = 10.0);

}  // namespace phasekit
