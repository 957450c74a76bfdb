// fock.hpp: truncated Fock-space operators and thermal states.
#pragma once

#include <Eigen/Dense>
#include <utility>

#include "mk/errors.hpp"

namespace mk::fock {

using Matrix = Eigen::MatrixXcd;

struct FockBasis {
  int dim = 2;           // truncation
  double hbar = 1.0;     // action scale, tunable for classical-limit sweeps
  double omega0 = 1.0;   // oscillator frequency

  void validate() const {
    if (dim < 2) throw DomainError("Fock truncation must be at least 2");
    if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
    if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");
  }
  bool operator==(const FockBasis&) const = default;
};

struct DensityMatrix {
  FockBasis basis;
  Matrix rho;
};

// Lowering operator a with a[n-1, n] = sqrt(n); a_dag is its adjoint.
std::pair<Matrix, Matrix> ladder_operators(const FockBasis& basis);

// q = sqrt(hbar/2w)(a + a+), p = -i sqrt(hbar w/2)(a - a+); both Hermitian.
std::pair<Matrix, Matrix> position_momentum(const FockBasis& basis);

// diag(hbar w n). The additive zero-point constant is dropped; it cancels in
// every commutator.
Matrix system_hamiltonian(const FockBasis& basis);

// Gibbs state on the truncated space. The discarded tail must be below 1e-12.
DensityMatrix thermal_state(const FockBasis& basis, double beta);

double mean_occupancy(const DensityMatrix& state);

// Largest violation among Hermiticity, unit trace, and eigenvalue floor.
struct DensityCheck {
  double hermiticity_defect;
  double trace_defect;
  double min_eigenvalue;
  bool ok;
};
DensityCheck check_density(const DensityMatrix& state,
                           double herm_tol = 1e-12, double trace_tol = 1e-12,
                           double eig_floor = -1e-10);

}  // namespace mk::fock
