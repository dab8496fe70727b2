#pragma once

// Exact diagonalization of the complete Dicke-Ising Hamiltonian with the
// photon Fock space truncated to occupations 0..n_max. The basis is the
// product of the s^z configuration and the Fock number, index n * 2^N + s.
//
// A finite parity-symmetric ground state has <a + a^dag> = 0 identically,
// so superradiance shows up here only through the photon density
// <a^dag a>/N and the quadrature fluctuation <(a + a^dag)^2>/N.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "phasekit/lanczos.hpp"
#include "phasekit/model.hpp"

namespace phasekit {

struct EDConfig {
    int n_spins{8};
    int n_max{16};
    double eig_tol{1e-10};
    // Real shift alpha (per sqrt(N)) applied as a -> a + sqrt(N) alpha before truncation.
    std::optional<double> displaced_frame;
    std::int64_t dim_cap{std::int64_t{1} << 22};
    bool compute_gap{true};
};

struct EDResult {
    double energy_per_site{0.0};
    double photon_density{0.0};  // <a^dag a> / N
    double quad_fluct{0.0};      // <(a + a^dag)^2> / N
    double quad_mean{0.0};       // <a + a^dag> / sqrt(N), zero without symmetry breaking
    double s_pi{0.0};            // <(sum (-1)^i s^z_i)^2> / N^2
    double mx{0.0};              // <sum s^x> / N
    double mz{0.0};              // <sum s^z> / N
    double mx_rms{0.0};          // sqrt(<(sum s^x)^2>) / N, nonzero despite parity
    double parity{0.0};          // <(-1)^{a^dag a} prod_i 2 s^z_i>; NaN in a displaced frame
    double gap{0.0};             // E_1 - E_0, NaN if not computed
    double residual{0.0};
    int n_spins{0};
    int n_max{0};
    bool nmax_converged{false};
};

/// Throws ParamError unless the spin count is even in [4, 12], n_max >= 8
/// and the Hilbert dimension stays under the cap.
void validate_ed_config(const EDConfig& c);

std::int64_t ed_dimension(const EDConfig& c);

/// y = H x, matrix-free, for the truncated full Hamiltonian.
void apply_full_hamiltonian(const ModelParams& p, const EDConfig& c, const Eigen::VectorXd& x, Eigen::VectorXd& y);

EDResult ed_full_ground(const ModelParams& p, const EDConfig& c);

/// Doubles n_max from c.n_max until successive ground energies per site
/// differ by less than energy_tol and returns the larger truncation. Throws ConsistencyError if an energy
/// rises with n_max beyond solver noise. Returns the last result with
/// nmax_converged = false if the dimension cap is reached first.
EDResult converge_nmax(const ModelParams& p, const EDConfig& c, double energy_tol);

/// quad_fluct of r minus that of a baseline run near g = 0. Throws
/// ParamError when the two runs used different (N, n_max).
double ed_superradiance_indicator(const EDResult& r, const EDResult& baseline);

}  // namespace phasekit
