#include "mk/fock.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace mk::fock {

std::pair<Matrix, Matrix> ladder_operators(const FockBasis& basis) {
  basis.validate();
  Matrix a = Matrix::Zero(basis.dim, basis.dim);
  for (int n = 1; n < basis.dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return {a, a.adjoint()};
}

std::pair<Matrix, Matrix> position_momentum(const FockBasis& basis) {
  const auto [a, adag] = ladder_operators(basis);
  const double cq = std::sqrt(basis.hbar / (2.0 * basis.omega0));
  const double cp = std::sqrt(basis.hbar * basis.omega0 / 2.0);
  const std::complex<double> i(0.0, 1.0);
  Matrix q = cq * (a + adag);
  Matrix p = -i * cp * (a - adag);
  return {q, p};
}

Matrix system_hamiltonian(const FockBasis& basis) {
  basis.validate();
  Matrix h = Matrix::Zero(basis.dim, basis.dim);
  for (int n = 0; n < basis.dim; ++n) h(n, n) = basis.hbar * basis.omega0 * n;
  return h;
}

DensityMatrix thermal_state(const FockBasis& basis, double beta) {
  basis.validate();
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  const double x = beta * basis.hbar * basis.omega0;
  const double tail = std::exp(-x * basis.dim);
  if (tail > 1e-12)
    throw TruncationTooSmall(
        "thermal tail exp(-beta hbar omega0 dim) = " + std::to_string(tail) +
        " exceeds 1e-12; raise dim above " + std::to_string(12.0 * std::log(10.0) / x));
  Matrix rho = Matrix::Zero(basis.dim, basis.dim);
  // Normalized against the truncated sum, a geometric series.
  const double z = (1.0 - std::exp(-x * basis.dim)) / (1.0 - std::exp(-x));
  for (int n = 0; n < basis.dim; ++n) rho(n, n) = std::exp(-x * n) / z;
  return {basis, std::move(rho)};
}

double mean_occupancy(const DensityMatrix& state) {
  double mean = 0.0;
  for (int n = 0; n < state.basis.dim; ++n)
    mean += n * state.rho(n, n).real();
  return mean;
}

DensityCheck check_density(const DensityMatrix& state, double herm_tol,
                           double trace_tol, double eig_floor) {
  const Matrix& rho = state.rho;
  DensityCheck out{};
  out.hermiticity_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  out.trace_defect = std::abs(rho.trace() - std::complex<double>(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  out.ok = out.hermiticity_defect <= herm_tol && out.trace_defect <= trace_tol &&
           out.min_eigenvalue >= eig_floor;
  return out;
}

}  // namespace mk::fock
