// chain.hpp: classical harmonic chain plus oscillator, the Monte-Carlo
// oracle for the bath correlation functions and relaxation predictions.
//
// The full system is linear: oscillator (Q, P) at frequency omega0 coupled
// through lambda * Q * sum_k eps_k q_k to a chain with stiffness h. All
// dynamics run in the chain's normal-mode coordinates, where the stiffness
// is diagonal and one velocity-Verlet step costs O(K) per trajectory.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mk/bath.hpp"
#include "mk/errors.hpp"

namespace mk::chain {

struct ChainConfig {
  int n_modes = 0;           // K
  Eigen::MatrixXd h_matrix;  // symmetric positive definite stiffness
  Eigen::VectorXd epsilons;  // site couplings eps_k
  double beta = 1.0;
  double lambda = 0.0;
  double omega0 = 1.0;

  void validate() const;
};

// Periodic nearest-neighbor stiffness: h(k,k) = h0, h(k,k+-1) = h1, with
// wraparound. Dispersion h0 + 2 h1 cos(theta) must stay positive.
ChainConfig nn_config(int n_modes, double h0, double h1);

// Site-space Gaussian bump of the couplings, periodic distance to center.
// A nonzero wavenumber modulates the bump so its spectral weight sits at
// the matching point of the dispersion instead of the band bottom.
Eigen::VectorXd gaussian_epsilons(int n_modes, double center, double width,
                                  double amplitude, double wavenumber = 0.0);

// One phase point per sample column; chain stored in site coordinates.
struct PhasePoints {
  Eigen::RowVectorXd osc_q, osc_p;  // 1 x S
  Eigen::MatrixXd site_q, site_p;   // K x S
  std::uint64_t seed = 0;
};

// Chain in canonical equilibrium: momenta i.i.d. N(0, 1/beta), coordinates
// jointly Gaussian with covariance (beta h)^{-1}; the oscillator starts at
// the given deterministic point for every sample.
PhasePoints gibbs_sample(const ChainConfig& config, int n_samples,
                         std::uint64_t seed, double osc_q = 0.0,
                         double osc_p = 0.0);

// Observables stored every store_stride steps; trajectories are never kept
// whole. bath_w rows hold W = sum_k eps_k q_k per sample, energy rows the
// full-system Hamiltonian per sample.
struct TrajectoryEnsemble {
  std::vector<double> times;
  Eigen::MatrixXd osc_q, osc_p;  // n_frames x S
  Eigen::MatrixXd bath_w;        // n_frames x S
  Eigen::MatrixXd energy;        // n_frames x S
  double time_step = 0.0;
  std::uint64_t seed = 0;
};

TrajectoryEnsemble integrate(const ChainConfig& config,
                             const PhasePoints& initial, double t_max,
                             double dt, int store_stride = 1);

struct CorrelationEstimate {
  std::vector<double> s;
  Eigen::VectorXd mean;
  Eigen::VectorXd stderror;
};

// Monte-Carlo <W(origin) W(origin + s)> over the stored frames; the ensemble
// must have evolved freely (lambda = 0) for the estimate to target h(s).
CorrelationEstimate empirical_correlation(const ChainConfig& config,
                                          const TrajectoryEnsemble& ensemble,
                                          const std::vector<double>& s_grid,
                                          double origin = 0.0);

// Exact discrete-mode sum h(s) = sum_j c_j^2 cos(omega_j s)/(beta omega_j^2)
// with c the couplings rotated into the normal-mode basis.
double discrete_correlation(const ChainConfig& config, double s);

// Bin the discrete mode weights c_j^2 into a tabulated one-sided coupling
// u^2(omega) so the continuum formulas can run on the chain's spectrum.
bath::BathSpec effective_bath(const ChainConfig& config, int n_bins);

struct RelaxationCurve {
  std::vector<double> times;
  Eigen::VectorXd mean_energy;    // oscillator energy, ensemble mean
  Eigen::VectorXd stderr_energy;  // its standard error
  double rate = 0.0;              // fitted exponential decay rate
  double rate_stderr = 0.0;
  double equilibrium = 0.0;       // fitted asymptote
};

// Ensemble-averaged oscillator energy under the given coupling, fitted to
// equilibrium + amplitude * exp(-rate * t) on t >= fit_start by weighted
// Gauss-Newton. A curve flat within noise reports rate 0.
RelaxationCurve relaxation_experiment(const ChainConfig& config, double lambda,
                                      double t_max, int n_samples,
                                      std::uint64_t seed, double osc_q0,
                                      double osc_p0, double dt = 0.02,
                                      int store_stride = 25,
                                      double fit_start = 0.0);

}  // namespace mk::chain
