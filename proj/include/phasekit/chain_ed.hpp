#pragma once

// Exact diagonalization of the finite periodic chain
//
//   H_chain = eps sum s^z_i - 4J sum s^z_i s^z_{i+1} - h sum s^x_i
//
// in the zero-momentum sector. For h != 0 the operator is stoquastic in the
// s^z basis and every configuration is connected by single spin flips, so
// the ground state is unique, positive and translation invariant; it lives
// in the k = 0 sector. At h = 0 the Hamiltonian is diagonal and degenerate
// minima are combined into their symmetric superposition.

#include <Eigen/SparseCore>

#include <cstdint>
#include <vector>

#include "phasekit/lanczos.hpp"

namespace phasekit {

struct ChainParams {
    double eps{0.0};
    double j{0.0};
    double h{0.0};
    int n_sites{8};
};

struct ChainResult {
    double energy{0.0};  // per site
    double mx{0.0};      // <sum s^x> / N
    double mz{0.0};      // <sum s^z> / N
    double s_pi{0.0};    // <(sum (-1)^i s^z_i)^2> / N^2
    bool degenerate{false};
    double residual{0.0};
};

/// Translation-invariant (k = 0) basis for a periodic chain of n spins.
class ChainSector {
public:
    explicit ChainSector(int n_sites);

    int n_sites() const { return n_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(reps_.size()); }

    const std::vector<std::uint32_t>& representatives() const { return reps_; }
    const std::vector<int>& periods() const { return period_; }  // orbit size of each representative
    const Eigen::VectorXd& sz_total() const { return sz_; }     // sum s^z
    const Eigen::VectorXd& zz_bonds() const { return zz_; }     // sum s^z_i s^z_{i+1}
    const Eigen::VectorXd& stag_sq() const { return stag2_; }   // (sum (-1)^i s^z_i)^2
    const Eigen::SparseMatrix<double>& sx_total() const { return sx_; }  // sum s^x

private:
    int n_;
    std::vector<std::uint32_t> reps_;
    std::vector<int> period_;
    Eigen::VectorXd sz_, zz_, stag2_;
    Eigen::SparseMatrix<double> sx_;
};

/// Shared, immutable sector for n spins; built on first use.
const ChainSector& chain_sector(int n_sites);

/// Throws ParamError unless n_sites is even and 4 <= n_sites <= 20.
void validate_chain(const ChainParams& c);

ChainResult ed_chain_ground(const ChainParams& c, const LanczosOptions& opts = {});

}  // namespace phasekit
