#pragma once

// Photon elimination. In the thermodynamic limit the cavity field is a
// classical coherent amplitude, alpha = -h / (4g), and the spins see an
// induced transverse field h. The energy per site of the coupled problem is
//
//   e_eff(h) = e_chain(h; eps, J) + omega h^2 / (16 g^2),
//
// minimized over h >= 0 (e_eff is even). Its stationarity condition is the
// self-consistency h = (8 g^2 / omega) m_x(h). e_chain comes either from the
// exact free-fermion solution (eps = 0 only) or from finite-chain ED.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "phasekit/chain_ed.hpp"
#include "phasekit/model.hpp"
#include "phasekit/transition.hpp"

namespace phasekit {

struct Backend {
    enum class Kind { FreeFermion, ChainEd };
    Kind kind{Kind::FreeFermion};
    int n_sites{16};

    static Backend free_fermion() { return {Kind::FreeFermion, 0}; }
    static Backend chain_ed(int n) { return {Kind::ChainEd, n}; }
    std::string name() const;
};

/// e_chain and chain observables at one induced field.
struct ChainPoint {
    double h{0.0};
    double energy{0.0};
    double mx{0.0};
    double mz{0.0};
    double s_pi{0.0};
    double m_stag{0.0};   // staggered order estimate, 0 when not antiferromagnetic
};

/// e_chain(h) for fixed (eps, J, backend). Values are independent of g and
/// omega, so one instance serves a whole g-scan. Grid values sit at
/// h = i * kGridStep and every evaluation is memoized. Safe to share across
/// threads.
class ChainLandscape {
public:
    static constexpr double kGridStep = 1.0 / 128.0;

    ChainLandscape(double eps, double j, Backend backend);

    double eps() const { return eps_; }
    double j() const { return j_; }
    const Backend& backend() const { return backend_; }

    ChainPoint at(double h) const;
    ChainPoint grid(long i) const { return at(kGridStep * static_cast<double>(i)); }

    /// chi = -d^2 e_chain / dh^2 at h = 0, from Richardson-extrapolated m_x(d) / d.
    double susceptibility() const;

    /// Fills grid points [0, n] (in parallel when threads > 1).
    void prefetch(long n, int threads = 1) const;

    std::size_t evaluations() const;

private:
    ChainPoint evaluate(double h) const;

    double eps_, j_;
    Backend backend_;
    mutable std::mutex mutex_;
    mutable std::map<double, ChainPoint> memo_;
    mutable std::optional<double> chi_;
};

struct HMinimum {
    double h{0.0};
    double energy{0.0};  // e_eff
};

struct EffectiveLandscape {
    std::vector<double> h_grid;
    std::vector<double> e_values;
    std::vector<HMinimum> minimizers;
    HMinimum global;
    bool degenerate{false};
    double h_max{0.0};
};

struct SelfConsistentSolution {
    double h_star{0.0};
    double energy{0.0};    // e_eff at h_star
    double residual{0.0};  // |h - (8 g^2 / omega) m_x(h)| at h_star
    OrderParams orders;
    PhaseLabel label{PhaseLabel::PM_N};
    double s_pi{0.0};
    bool coexistent{false};
    std::vector<HMinimum> minima;
    double h_max{0.0};
};

/// Backend-admissibility check: the free-fermion backend needs eps = 0.
void check_backend(const ModelParams& p, const Backend& b);

/// e_eff(h) per site. Requires g > 0.
double effective_energy(const ModelParams& p, double h, const Backend& b);

/// Default scan edge 4 max(eps, 4|J|, 2 g^2 / omega).
double default_h_max(const ModelParams& p);

/// Coarse grid (step 1/128) plus golden-section refinement of every local
/// minimum to 1e-8, polished on the Hellmann-Feynman derivative. h_max
/// doubles until e_eff rises at the edge; ConvergenceError after 8 doublings.
SelfConsistentSolution minimize_h(const ModelParams& p, const ChainLandscape& land, const ToleranceSet& t);
SelfConsistentSolution minimize_h(const ModelParams& p, const Backend& b, const ToleranceSet& t);

/// Grid values and refined minima of e_eff for inspection and plotting.
EffectiveLandscape effective_landscape(const ModelParams& p, const ChainLandscape& land, const ToleranceSet& t);

/// sqrt(omega / (8 chi)) with chi from second differences of
/// ff_ground_energy (step 1e-4, Richardson). eps = 0 free-fermion only.
double spinodal_g(double omega, double j);

/// Coupling where h = 0 loses local stability, sqrt(omega / (8 chi)), any backend.
double normal_instability_g(double omega, const ChainLandscape& land);

struct LocateOptions {
    double width{1e-6};                        // label bisection target
    double min_width{1e-13};                   // floor when shrinking a steep continuous onset
    std::vector<int> trend_sizes{8, 12, 16};   // chain-ED sizes for the jump trend
    bool record_trend{true};
    int threads{1};
};

/// Locates the first label change in g at fixed J, with g_lo normal and g_hi
/// superradiant. A first-order point is refined to the crossing of the two
/// competing minima. For chain-ED the jump is taken at backend.n_sites and
/// the trend over trend_sizes recorded.
TransitionPoint locate_transition_g(const ModelParams& tmpl, const Backend& b, const ToleranceSet& t, double g_lo,
                                    double g_hi, const LocateOptions& opts = {});

/// Same, with the bracket derived from the normal-state instability.
TransitionPoint locate_transition_g(const ModelParams& tmpl, const Backend& b, const ToleranceSet& t,
                                    const LocateOptions& opts = {});

struct MulticriticalResult {
    double j_mc{0.0};
    double j_lo{0.0};  // second-order side
    double j_hi{0.0};  // first-order side
    std::vector<TransitionPoint> probes;
};

class MulticriticalBracketError : public BracketError {
public:
    MulticriticalBracketError(const std::string& what, std::vector<TransitionPoint> probes)
        : BracketError(what), probes_(std::move(probes)) {}
    const std::vector<TransitionPoint>& probes() const { return probes_; }

private:
    std::vector<TransitionPoint> probes_;
};

/// Bisection over J on the transition order to bracket width `width`.
/// Throws MulticriticalBracketError when both ends have the same order.
MulticriticalResult locate_multicritical(const ModelParams& tmpl, const Backend& b, double j_lo, double j_hi,
                                         const ToleranceSet& t, double width = 0.02, const LocateOptions& opts = {});

/// Finite-chain antiferromagnetic criterion: s_pi at least five times the
/// uncorrelated paramagnet value 1/(4N).
double afm_structure_threshold(int n_sites);

}  // namespace phasekit
