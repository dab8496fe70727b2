#pragma once

// Exact solution of the eps = 0 chain
//
//   H_chain = -4J sum s^z_i s^z_{i+1} - h sum s^x_i  =  -J sum sz sz - Gamma sum sx  (Pauli, Gamma = h/2)
//
// by Jordan-Wigner fermionization, in the thermodynamic limit.

namespace phasekit {

/// Single-mode energy 2 sqrt(J^2 + Gamma^2 - 2 J Gamma cos k), Gamma = h / 2.
double ff_dispersion(double j, double h, double k);

/// Ground-state energy per site -(1 / 2pi) int_0^pi eps_k dk. Throws
/// ConvergenceError if the adaptive quadrature misses 1e-10 absolute error.
double ff_ground_energy(double j, double h);

/// Transverse magnetization per site, m_x = -d e / d h, by differentiating
/// under the integral.
double ff_mx(double j, double h);

/// Spontaneous order parameter of the ordered phase, (1/2)(1 - (Gamma/J)^2)^(1/8)
/// for |Gamma| < |J|, zero otherwise. Ferromagnetic for J > 0, staggered for J < 0.
double ff_order_parameter(double j, double h);

}  // namespace phasekit
