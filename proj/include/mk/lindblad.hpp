// lindblad.hpp: quantum generators on the truncated Fock space.
//
// Three routes to the damped oscillator: the oscillator master equation in
// ladder form, the general friction/diffusion equation it embeds into, and
// the non-secular second-order generator whose rotating-frame average
// recovers the first. Evolution, stationary states, and relative entropy
// round out the H-theorem diagnostics.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "mk/bath.hpp"
#include "mk/errors.hpp"
#include "mk/fock.hpp"

namespace mk::lindblad {

using Matrix = Eigen::MatrixXcd;

// Linear map on dim x dim matrices, kept as a sum of sandwich terms
// X -> sum_i left[i] X right[i] when the structure allows it; maps that are
// not of product form (the secular average) carry a custom action instead.
// Generators annihilate the trace and preserve Hermiticity.
struct Superoperator {
  fock::FockBasis basis;
  std::vector<std::pair<Matrix, Matrix>> terms;
  std::function<Matrix(const Matrix&)> custom;

  Matrix apply(const Matrix& x) const;
  // Column-major matrix on vectorized inputs, dim^2 x dim^2.
  Matrix dense() const;
};

// Friction and diffusion coefficients of the general equation. The
// Hamiltonian flow carries the renormalized prefactor h_scale; the model
// embedding sets it to 1 - lambda^2 delta / omega0.
struct LindbladCoefficients {
  double d1 = 0.0;       // momentum-direction diffusion
  double d2 = 0.0;       // position-direction diffusion
  double d = 0.0;        // cross diffusion
  double lam = 0.0;      // friction
  double kappa = 0.0;    // friction anisotropy
  double omega0 = 1.0;
  double hbar = 1.0;
  double h_scale = 1.0;
};

// Ladder-form master equation of the damped oscillator. Requires a quantum
// spec with omega0 interior to its domain; the frequency shift comes from the
// principal-value integral and may propagate QuadratureFailure.
Superoperator oscillator_generator(const fock::FockBasis& basis,
                                   const bath::BathSpec& spec, double lambda);

// General friction/diffusion generator, verbatim coefficients.
Superoperator general_generator(const fock::FockBasis& basis,
                                const LindbladCoefficients& coeffs);

// Coefficients that make general_generator reproduce oscillator_generator.
LindbladCoefficients coefficients_from_model(const bath::BathSpec& spec,
                                             double lambda, double omega0,
                                             double beta, double hbar);

struct FormCheck {
  bool ok = false;
  std::array<double, 2> eigenvalues{};  // of the 2x2 diffusion form, ascending
};
// Nonnegativity of [[d1, i hbar lam/2 - d], [-i hbar lam/2 - d, d2]] / hbar^2;
// boundary (zero eigenvalue) accepted.
FormCheck lindblad_form_check(const LindbladCoefficients& coeffs);

// Imaginary parts (j+, j-) of the half-range resonance integrals entering the
// non-secular generator. Their sum is minus the oscillator frequency shift.
std::pair<double, double> resonance_shifts(const bath::BathSpec& spec,
                                           double beta, double hbar,
                                           double omega0);

// Non-secular second-order generator: same ingredients as the oscillator
// equation but with the Bohr-frequency-mixing terms kept. Not of Lindblad
// form; the thermal state is not stationary under it.
Superoperator redfield_generator(const fock::FockBasis& basis,
                                 const bath::BathSpec& spec, double lambda);

// Infinite-time average over the free evolution of a diagonal Hamiltonian:
// zeroes every element connecting Bohr-frequency-mismatched pairs. Exact
// projection (idempotent); throws NonDiagonalHamiltonian otherwise.
Superoperator secular_average(const Superoperator& op,
                              const Matrix& hamiltonian);

struct Trajectory {
  std::vector<double> times;
  std::vector<fock::DensityMatrix> states;
};

// Classical RK4 on d rho/dt = L(rho) with re-Hermitization each step. The
// trace is left to drift as a diagnostic. Throws StepTooLarge when dt exceeds
// the stability bound estimated from the generator's spectral radius.
Trajectory evolve(const Superoperator& op, const fock::DensityMatrix& rho0,
                  double t_max, double dt, int store_stride = 1);

// Normalized Hermitian PSD null vector of the dense generator; the null space
// must be one-dimensional (probed by deflated inverse iteration).
fock::DensityMatrix stationary_state(const Superoperator& op);

// Tr rho (ln rho - ln sigma) with the 0 ln 0 convention; sigma must be full
// rank on the truncated space.
double relative_entropy(const fock::DensityMatrix& rho,
                        const fock::DensityMatrix& sigma);

// Sum of singular values (sum of |eigenvalues| for Hermitian arguments).
double trace_norm(const Matrix& x);

}  // namespace mk::lindblad
