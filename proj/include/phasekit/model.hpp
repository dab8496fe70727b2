#pragma once

// Dicke-Ising chain
//
//   H = omega a^dag a + eps sum_i s^z_i + (2g / sqrt(N)) sum_i s^x_i (a + a^dag)
//       - 4J sum_<ij> s^z_i s^z_j
//
// with spin-1/2 operators s = sigma / 2 on a periodic chain.
//
// Sign convention: J > 0 is ferromagnetic (the -4J s^z s^z term rewards
// aligned neighbours), J < 0 is antiferromagnetic. Every module in phasekit
// uses this convention; the antiferromagnetic analysis therefore lives at
// negative J and the ferromagnetic multicritical point at positive J.

#include <stdexcept>
#include <string>
#include <string_view>

namespace phasekit {

class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelParams {
    double omega{1.0};  // photon frequency, > 0
    double eps{1.0};    // longitudinal field, >= 0
    double g{0.0};      // light-matter coupling, >= 0
    double j{0.0};      // Ising coupling, J > 0 ferromagnetic

    ModelParams with_g(double value) const { auto p = *this; p.g = value; return p; }
    ModelParams with_j(double value) const { auto p = *this; p.j = value; return p; }
};

/// Per-site order parameters. photon_displacement is alpha = <a> / sqrt(N)
/// in a symmetry-broken state.
struct OrderParams {
    double photon_displacement{0.0};
    double mx{0.0};
    double mz{0.0};
    double m_stag{0.0};
};

enum class PhaseLabel { PM_N, PM_S, AFM_N, AFM_S };

std::string_view to_string(PhaseLabel label);
PhaseLabel phase_label_from_string(std::string_view text);

inline bool is_superradiant(PhaseLabel l) { return l == PhaseLabel::PM_S || l == PhaseLabel::AFM_S; }
inline bool is_antiferro(PhaseLabel l) { return l == PhaseLabel::AFM_N || l == PhaseLabel::AFM_S; }

struct ToleranceSet {
    double tol_order_param{1e-5};
    double tol_energy{1e-8};
    double tol_jump{1e-2};

    void validate() const;
};

/// Throws ParamError naming the violated invariant; returns p unchanged otherwise.
const ModelParams& validate_params(const ModelParams& p);

struct ClassicalGround {
    double energy{0.0};       // per site
    PhaseLabel label{PhaseLabel::PM_N};
    bool degenerate{false};   // polarized and Neel energies tie
};

/// Exact ground state at g = 0, where H is diagonal in the s^z product basis.
/// Competes the fully polarized state (-eps/2 - J per site) against the Neel
/// state (+J per site); ties resolve to PM-N with the degeneracy flag set.
ClassicalGround classical_ground(const ModelParams& p);

/// Labels a state from its order parameters. Throws ConsistencyError when
/// a coherent field shows up without any transverse polarization.
PhaseLabel classify_orders(const OrderParams& o, const ToleranceSet& t);

}  // namespace phasekit
