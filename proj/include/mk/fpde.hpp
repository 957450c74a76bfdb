// fpde.hpp: drift-diffusion operators on the oscillator phase plane and
// their finite-volume evolution.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "mk/bath.hpp"
#include "mk/lindblad.hpp"
#include "mk/wigner.hpp"

namespace mk::fpde {

using wigner::PhaseGrid;
using wigner::PhaseSpaceField;

// The drift-diffusion families build() knows how to assemble. classical and
// gme are synthesized from a bath spec; general takes explicit friction and
// diffusion coefficients; quantum_ps is general with the ordering shift of
// the phase-space transform folded into the diffusion matrix.
enum class Variant { classical, gme, general, quantum_ps };

// d_t f = d_q(A_q f) + d_p(A_p f)
//         + D_qq d2f/dq2 + 2 D_qp d2f/dqdp + D_pp d2f/dp2
// with affine drift components A_q, A_p and a constant symmetric diffusion
// matrix indexed (q, p). Every consumer asserts the affinity by probing.
struct FPOperator {
  Variant variant = Variant::classical;
  std::function<double(double, double)> drift_q;  // A_q(q, p)
  std::function<double(double, double)> drift_p;  // A_p(q, p)
  Eigen::Matrix2d diffusion = Eigen::Matrix2d::Zero();
  double renorm_factor = 1.0;  // frequency renormalization carried by drift
};

struct BuildParams {
  double lambda = 0.0;  // system-bath coupling strength
  double omega0 = 1.0;
  double hbar = 1.0;  // quantum_ps only; general reads it off coefficients
  double a = 0.0;     // ordering parameter, sets the diffusion shift
  std::optional<bath::BathSpec> spec;  // classical, gme, quantum_ps
  std::optional<lindblad::LindbladCoefficients> coefficients;  // general
};

FPOperator build(Variant variant, const BuildParams& params);

// Normalized exp(-beta(p^2/2 + omega0^2 q^2/2)), with the discrete sum as
// the normalization so the Riemann integral is exactly one. The grid must
// reach six thermal widths on each axis and resolve one width per cell.
PhaseSpaceField mb_distribution(double beta, double omega0,
                                const PhaseGrid& grid);

struct FieldTrajectory {
  std::vector<double> times;
  std::vector<PhaseSpaceField> fields;
};

// Fixed-step RK4 over conservative second-order stencils; operators whose
// friction balances their diffusion against a Gaussian reference are
// discretized in flux form relative to that reference, which makes their
// stationary Gaussian stationary on the grid too. dt must respect the
// diffusive and advective step bounds (CFLViolation). Mass drift or field
// values reaching the walls abort with BoundaryLeak. Snapshots are stored
// at t = 0, every store_stride-th step, and the final step.
FieldTrajectory evolve_field(const FPOperator& op, const PhaseSpaceField& f0,
                             double t_max, double dt, int store_stride = 1);

// l1 norm of one operator application over the l1 norm of the field, with
// exactly the stencils evolve_field steps with.
double stationarity_residual(const FPOperator& op,
                             const PhaseSpaceField& field);

// Closed moment dynamics of the affine-drift operator, x = (q, p):
//   d<x>/dt = drift <x> + offset,  dS/dt = drift S + S drift^T + 2 diffusion.
// stationary_covariance solves the algebraic Lyapunov equation, which needs
// the drift matrix Hurwitz; a neutrally stable drift (pure rotation) throws
// NonHurwitzDrift.
struct MomentData {
  Eigen::Matrix2d drift = Eigen::Matrix2d::Zero();
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  Eigen::Matrix2d diffusion = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d stationary_covariance = Eigen::Matrix2d::Zero();
};

MomentData moments(const FPOperator& op);

// Dimensionless oscillator coordinates x1 = sqrt(omega0/(2 hbar)) q,
// x2 = p / sqrt(2 hbar omega0). Fields pick up the cell Jacobian 2 hbar and
// keep their normalization; operators transform covariantly, so nodes map
// to nodes and structure like the argmax is preserved exactly.
// coherent_unrescale inverts the map.
FPOperator coherent_rescale(const FPOperator& op, double hbar, double omega0);
PhaseSpaceField coherent_rescale(const PhaseSpaceField& field, double hbar,
                                 double omega0);
FPOperator coherent_unrescale(const FPOperator& op, double hbar,
                              double omega0);
PhaseSpaceField coherent_unrescale(const PhaseSpaceField& field, double hbar,
                                   double omega0);

}  // namespace mk::fpde
