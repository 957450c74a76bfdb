// wigner.hpp: generalized phase-space transforms for the quadratic
// ordering-kernel family.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "mk/errors.hpp"
#include "mk/fock.hpp"

namespace mk::wigner {

using Matrix = Eigen::MatrixXcd;

// Ordering kernel exp(chi) with chi(eta, xi) = a (hbar/4)(eta^2/w + w xi^2).
// a = 0 is the symmetric transform; a = -1 weights toward normal ordering,
// a = +1 toward antinormal. chi must be a real even quadratic vanishing at
// the origin, which keeps every transformed field real.
struct OrderingKernel {
  double a = 0.0;
  double omega0 = 1.0;
  double hbar = 1.0;
  std::function<double(double, double)> chi;
};

OrderingKernel ordering_kernel(double a, double omega0, double hbar);

// Uniform rectangle with node j at q_min + j dq, upper edge exclusive.
// Extents must be generous enough that any field handled on the grid decays
// below 1e-10 of its peak at the boundary; the transforms check.
struct PhaseGrid {
  double q_min = 0.0, q_max = 0.0;
  double p_min = 0.0, p_max = 0.0;
  int n_q = 0, n_p = 0;  // even; powers of two keep the transforms fast

  double dq() const { return (q_max - q_min) / n_q; }
  double dp() const { return (p_max - p_min) / n_p; }
  double q(int j) const { return q_min + j * dq(); }
  double p(int j) const { return p_min + j * dp(); }
  void validate() const;
};

// Fourier-dual grid in the transform variables (eta, xi). Zero frequency
// lands on a node, so discrete sums reproduce traces exactly.
PhaseGrid dual_grid(const PhaseGrid& grid);

struct PhaseSpaceField {
  PhaseGrid grid;
  double a = 0.0;          // ordering label the field was produced with
  Eigen::MatrixXd values;  // values(i, j) = field(q_i, p_j)

  double integral() const;  // Riemann sum times the cell area
};

// Fock matrix of exp(z a+ - z* a), filled diagonal by diagonal with stable
// degree recurrences.
Matrix displacement_operator(const fock::FockBasis& basis,
                             std::complex<double> z);

// chi_rho(eta, xi) = Tr(rho exp(i(eta q + xi p))) sampled on sigma_grid,
// whose axes are read as (eta, xi). The grid must cover the state: the dual
// window is checked against the occupancy-based radius and the sigma extent
// against the support of the highest relevant level.
Eigen::MatrixXcd characteristic_function(const fock::DensityMatrix& rho,
                                         const PhaseGrid& sigma_grid);

// Transform of chi_rho / Omega onto the phase grid. Real by involutivity;
// the residual imaginary part is checked and discarded. Division by Omega
// must leave a decaying integrand, otherwise KernelDivergence.
PhaseSpaceField generalized_wigner(const fock::DensityMatrix& rho,
                                   const OrderingKernel& kernel,
                                   const PhaseGrid& grid);

// Round-trip partner of generalized_wigner: back to the transform side,
// multiply by Omega, then contract with the operator Fourier kernel.
fock::DensityMatrix inverse_transform(const PhaseSpaceField& field,
                                      const OrderingKernel& kernel,
                                      const fock::FockBasis& basis);

// Closed-form action of the ordering correction on a field:
//   -(a hbar / 4) (c_qq d2/dq2 + c_pp d2/dp2).
struct PsiCorrection {
  double a = 0.0;
  double hbar = 1.0;
  double c_qq = 0.0;
  double c_pp = 0.0;

  // Second-order central differences; samples beyond the boundary are taken
  // as zero, which costs nothing for fields obeying the decay invariant.
  PhaseSpaceField apply(const PhaseSpaceField& field) const;
};

// Extracts the second-derivative coefficients from the kernel exponent and
// rejects anything outside the quadratic family.
PsiCorrection psi_correction(const OrderingKernel& kernel);

}  // namespace mk::wigner
