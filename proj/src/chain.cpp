#include "mk/chain.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "mk/rng.hpp"

namespace mk::chain {
namespace {

constexpr double pi = 3.141592653589793238462643383279502884;

struct Modes {
  Eigen::MatrixXd basis;     // columns are normal modes of h
  Eigen::VectorXd omega_sq;  // eigenvalues of h
  Eigen::VectorXd c;         // couplings rotated into the mode basis
};

Modes normal_modes(const ChainConfig& config) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(config.h_matrix);
  if (solver.info() != Eigen::Success)
    throw DomainError("stiffness eigendecomposition failed");
  if (solver.eigenvalues().minCoeff() <= 0.0)
    throw DomainError("stiffness matrix has a nonpositive normal mode");
  Modes m;
  m.basis = solver.eigenvectors();
  m.omega_sq = solver.eigenvalues();
  m.c = m.basis.transpose() * config.epsilons;
  return m;
}

// Stiffest normal mode of the coupled system; same spectrum as the full
// site-space stiffness by orthogonal similarity.
double coupled_omega_max(const ChainConfig& config, const Modes& m,
                         double lambda) {
  const int k = config.n_modes;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(k + 1, k + 1);
  full(0, 0) = config.omega0 * config.omega0;
  full.block(1, 0, k, 1) = lambda * m.c;
  full.block(0, 1, 1, k) = lambda * m.c.transpose();
  full.block(1, 1, k, k) = m.omega_sq.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(full);
  const double top = solver.eigenvalues().maxCoeff();
  if (top <= 0.0)
    throw DomainError("coupled system is not oscillatory; check lambda");
  return std::sqrt(top);
}

// Weighted fit of y ~ equil + amp exp(-rate t) by Gauss-Newton with step
// halving; a curve flat within noise reports rate 0.
void fit_exponential(const std::vector<double>& t, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& se, double& rate,
                     double& rate_stderr, double& equil) {
  const auto n = static_cast<Eigen::Index>(t.size());
  const double floor =
      std::max(1e-12 * y.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w[i] = 1.0 / std::pow(std::max(se[i], floor), 2);

  const Eigen::Index head = std::max<Eigen::Index>(1, n / 4);
  const double y0 = y.head(head).mean();
  const double yinf = y.tail(head).mean();
  // The relative floor absorbs the integrator's bounded energy wobble on
  // otherwise conserved curves.
  const double noise = se.maxCoeff() / std::sqrt(double(head)) +
                       1e-4 * y.cwiseAbs().maxCoeff();
  if (std::abs(y0 - yinf) <= 3.0 * noise) {
    rate = 0.0;
    rate_stderr = 0.0;
    equil = (w.array() * y.array()).sum() / w.sum();
    return;
  }

  double c = yinf;
  double a = y0 - c;
  const double span = t.back() - t.front();
  double g = std::log(2.0) * 3.0 / std::max(span, 1e-12);
  const double ymid = y.segment(n / 2, head).mean();
  if ((ymid - c) / a > 1e-3)
    g = std::log(a / (ymid - c)) / (t[n / 2] - t.front());
  if (!(g > 0.0)) g = 1.0 / std::max(span, 1e-12);

  Eigen::MatrixXd jac(n, 3);
  Eigen::VectorXd resid(n);
  auto sse = [&](double cc, double aa, double gg) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = y[i] - (cc + aa * std::exp(-gg * (t[i] - t.front())));
      s += w[i] * r * r;
    }
    return s;
  };
  double best = sse(c, a, g);
  for (int iter = 0; iter < 60; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = std::exp(-g * (t[i] - t.front()));
      jac(i, 0) = 1.0;
      jac(i, 1) = e;
      jac(i, 2) = -a * (t[i] - t.front()) * e;
      resid[i] = y[i] - (c + a * e);
    }
    Eigen::Matrix3d ata = jac.transpose() * w.asDiagonal() * jac;
    Eigen::Vector3d atb = jac.transpose() * (w.array() * resid.array()).matrix();
    Eigen::Vector3d step = ata.ldlt().solve(atb);
    double scale = 1.0;
    for (int halve = 0; halve < 20; ++halve) {
      const double trial = sse(c + scale * step[0], a + scale * step[1],
                               g + scale * step[2]);
      if (trial <= best) {
        c += scale * step[0];
        a += scale * step[1];
        g += scale * step[2];
        best = trial;
        break;
      }
      scale *= 0.5;
    }
    if (step.cwiseAbs().maxCoeff() * scale < 1e-12 * (1.0 + std::abs(g)))
      break;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = std::exp(-g * (t[i] - t.front()));
    jac(i, 0) = 1.0;
    jac(i, 1) = e;
    jac(i, 2) = -a * (t[i] - t.front()) * e;
    resid[i] = y[i] - (c + a * e);
  }
  Eigen::Matrix3d ata = jac.transpose() * w.asDiagonal() * jac;
  const double chi2 = (w.array() * resid.array().square()).sum();
  const double dof = std::max<double>(1.0, double(n) - 3.0);
  const double inflate = std::max(1.0, chi2 / dof);
  Eigen::Matrix3d cov = ata.inverse();
  rate = g;
  rate_stderr = std::sqrt(std::max(0.0, cov(2, 2) * inflate));
  equil = c;
}

}  // namespace

void ChainConfig::validate() const {
  if (n_modes < 1) throw DomainError("chain needs at least one mode");
  if (h_matrix.rows() != n_modes || h_matrix.cols() != n_modes)
    throw DomainError("stiffness matrix shape does not match n_modes");
  const double scale = 1.0 + h_matrix.cwiseAbs().maxCoeff();
  if ((h_matrix - h_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("stiffness matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(h_matrix);
  if (llt.info() != Eigen::Success)
    throw DomainError("stiffness matrix must be positive definite");
  if (epsilons.size() != n_modes)
    throw DomainError("epsilons length does not match n_modes");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");
}

ChainConfig nn_config(int n_modes, double h0, double h1) {
  if (n_modes < 2) throw DomainError("periodic chain needs n_modes >= 2");
  ChainConfig config;
  config.n_modes = n_modes;
  config.h_matrix = Eigen::MatrixXd::Zero(n_modes, n_modes);
  for (int k = 0; k < n_modes; ++k) {
    config.h_matrix(k, k) = h0;
    config.h_matrix(k, (k + 1) % n_modes) += h1;
    config.h_matrix(k, (k + n_modes - 1) % n_modes) += h1;
  }
  for (int j = 0; j < n_modes; ++j) {
    const double disp = h0 + 2.0 * h1 * std::cos(2.0 * pi * j / n_modes);
    if (disp <= 0.0)
      throw DomainError("dispersion h0 + 2 h1 cos(theta) reaches " +
                        std::to_string(disp) + "; chain has a soft mode");
  }
  config.epsilons = Eigen::VectorXd::Zero(n_modes);
  return config;
}

Eigen::VectorXd gaussian_epsilons(int n_modes, double center, double width,
                                  double amplitude, double wavenumber) {
  if (n_modes < 1) throw DomainError("need at least one mode");
  if (!(width > 0.0)) throw DomainError("width must be positive");
  Eigen::VectorXd eps(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    double d = std::abs(double(k) - center);
    d = std::min(d, double(n_modes) - d);
    eps[k] = amplitude * std::exp(-d * d / (2.0 * width * width)) *
             std::cos(wavenumber * d);
  }
  return eps;
}

PhasePoints gibbs_sample(const ChainConfig& config, int n_samples,
                         std::uint64_t seed, double osc_q, double osc_p) {
  config.validate();
  if (n_samples < 1) throw DomainError("need at least one sample");
  const int k = config.n_modes;
  Eigen::LLT<Eigen::MatrixXd> llt(config.h_matrix);

  PhasePoints points;
  points.seed = seed;
  points.osc_q = Eigen::RowVectorXd::Constant(n_samples, osc_q);
  points.osc_p = Eigen::RowVectorXd::Constant(n_samples, osc_p);
  points.site_q.resize(k, n_samples);
  points.site_p.resize(k, n_samples);

  const double root_beta = std::sqrt(config.beta);
  for (int s = 0; s < n_samples; ++s) {
    Rng rng(seed, static_cast<std::uint64_t>(s));
    for (int i = 0; i < k; ++i) points.site_q(i, s) = rng.normal();
    for (int i = 0; i < k; ++i) points.site_p(i, s) = rng.normal() / root_beta;
  }
  // Coordinates: cov (beta h)^{-1} from h = L L^T via q = L^{-T} z / sqrt(beta).
  points.site_q = llt.matrixU().solve(points.site_q) / root_beta;
  return points;
}

TrajectoryEnsemble integrate(const ChainConfig& config,
                             const PhasePoints& initial, double t_max,
                             double dt, int store_stride) {
  config.validate();
  if (!(t_max > 0.0) || !(dt > 0.0))
    throw DomainError("t_max and dt must be positive");
  if (store_stride < 1) throw DomainError("store_stride must be >= 1");
  const int k = config.n_modes;
  const auto n_samples = initial.site_q.cols();
  if (initial.site_q.rows() != k || initial.site_p.rows() != k ||
      initial.site_p.cols() != n_samples ||
      initial.osc_q.cols() != n_samples || initial.osc_p.cols() != n_samples)
    throw DomainError("initial phase points do not match the chain size");

  const Modes m = normal_modes(config);
  const double omega_top = coupled_omega_max(config, m, config.lambda);
  if (dt * omega_top >= 2.0)
    throw UnstableStep("dt = " + std::to_string(dt) +
                       " is at or above the stability bound 2/omega_max = " +
                       std::to_string(2.0 / omega_top));

  const auto n_steps = static_cast<long>(std::llround(t_max / dt));
  if (n_steps < 1) throw DomainError("t_max shorter than one step");
  const long n_frames = n_steps / store_stride + 1;

  TrajectoryEnsemble ens;
  ens.time_step = dt;
  ens.seed = initial.seed;
  ens.times.resize(static_cast<std::size_t>(n_frames));
  ens.osc_q.resize(n_frames, n_samples);
  ens.osc_p.resize(n_frames, n_samples);
  ens.bath_w.resize(n_frames, n_samples);
  ens.energy.resize(n_frames, n_samples);

  // All dynamics in mode coordinates; W and the energy never need sites.
  Eigen::MatrixXd mq = m.basis.transpose() * initial.site_q;
  Eigen::MatrixXd mv = m.basis.transpose() * initial.site_p;
  Eigen::RowVectorXd q = initial.osc_q;
  Eigen::RowVectorXd p = initial.osc_p;

  const double lambda = config.lambda;
  const double osq = config.omega0 * config.omega0;
  Eigen::MatrixXd ma(k, n_samples);
  Eigen::RowVectorXd oa(n_samples), w(n_samples);

  auto force = [&]() {
    w.noalias() = m.c.transpose() * mq;
    oa = -osq * q - lambda * w;
    ma.noalias() = -(m.omega_sq.asDiagonal() * mq);
    if (lambda != 0.0) ma.noalias() -= lambda * (m.c * q);
  };
  auto store = [&](long frame, long step) {
    ens.times[static_cast<std::size_t>(frame)] = double(step) * dt;
    ens.osc_q.row(frame) = q;
    ens.osc_p.row(frame) = p;
    ens.bath_w.row(frame) = w;
    ens.energy.row(frame) =
        0.5 * (p.array().square() + osq * q.array().square()) +
        0.5 * (mv.array().square().colwise().sum() +
               (mq.array().square().colwise() * m.omega_sq.array())
                   .colwise()
                   .sum()) +
        lambda * (q.array() * w.array());
  };

  force();
  store(0, 0);
  const double half = 0.5 * dt;
  for (long step = 1; step <= n_steps; ++step) {
    p += half * oa;
    mv += half * ma;
    q += dt * p;
    mq += dt * mv;
    force();
    p += half * oa;
    mv += half * ma;
    if (step % store_stride == 0) store(step / store_stride, step);
  }
  return ens;
}

CorrelationEstimate empirical_correlation(const ChainConfig& config,
                                          const TrajectoryEnsemble& ensemble,
                                          const std::vector<double>& s_grid,
                                          double origin) {
  config.validate();
  const auto n_frames = ensemble.bath_w.rows();
  const auto n_samples = ensemble.bath_w.cols();
  if (n_frames < 1 || n_samples < 2)
    throw DomainError("ensemble too small for a correlation estimate");
  const double frame_dt =
      n_frames > 1 ? ensemble.times[1] - ensemble.times[0] : 1.0;

  auto frame_index = [&](double t) {
    const auto i = static_cast<long>(std::llround(t / frame_dt));
    if (i < 0 || i >= n_frames ||
        std::abs(ensemble.times[static_cast<std::size_t>(i)] - t) >
            1e-9 * std::max(1.0, std::abs(t)))
      throw DomainError("requested lag is not on the stored time grid");
    return i;
  };

  const long i0 = frame_index(origin);
  CorrelationEstimate est;
  est.s = s_grid;
  est.mean.resize(static_cast<Eigen::Index>(s_grid.size()));
  est.stderror.resize(static_cast<Eigen::Index>(s_grid.size()));
  const Eigen::ArrayXd w0 = ensemble.bath_w.row(i0).transpose().array();
  for (std::size_t j = 0; j < s_grid.size(); ++j) {
    const long is = frame_index(origin + s_grid[j]);
    const Eigen::ArrayXd prod =
        w0 * ensemble.bath_w.row(is).transpose().array();
    const double mean = prod.mean();
    const double var = (prod - mean).square().sum() / double(n_samples - 1);
    est.mean[static_cast<Eigen::Index>(j)] = mean;
    est.stderror[static_cast<Eigen::Index>(j)] =
        std::sqrt(var / double(n_samples));
  }
  return est;
}

double discrete_correlation(const ChainConfig& config, double s) {
  config.validate();
  const Modes m = normal_modes(config);
  double sum = 0.0;
  for (int j = 0; j < config.n_modes; ++j)
    sum += m.c[j] * m.c[j] * std::cos(std::sqrt(m.omega_sq[j]) * s) /
           (config.beta * m.omega_sq[j]);
  return sum;
}

bath::BathSpec effective_bath(const ChainConfig& config, int n_bins) {
  config.validate();
  if (n_bins < 4) throw DomainError("need at least four bins");
  const Modes m = normal_modes(config);
  const Eigen::ArrayXd omegas = m.omega_sq.array().sqrt();
  const double lo = omegas.minCoeff();
  const double hi = omegas.maxCoeff();
  if (hi - lo < 1e-12)
    throw DomainError("spectrum has no width to bin into a coupling density");
  const double width = (hi - lo) / n_bins;

  std::vector<double> grid(static_cast<std::size_t>(n_bins));
  std::vector<double> u(static_cast<std::size_t>(n_bins), 0.0);
  for (int b = 0; b < n_bins; ++b)
    grid[static_cast<std::size_t>(b)] = lo + (b + 0.5) * width;
  // Linear assignment between the two nearest centers; a plain histogram
  // leaves a sawtooth in the density when only a few modes land per bin.
  for (int j = 0; j < config.n_modes; ++j) {
    const double x = (omegas[j] - lo) / width - 0.5;
    const int b = std::min(std::max(static_cast<int>(std::floor(x)), 0),
                           n_bins - 2);
    const double f = std::min(std::max(x - b, 0.0), 1.0);
    const double mass = m.c[j] * m.c[j] / width;
    u[static_cast<std::size_t>(b)] += (1.0 - f) * mass;
    u[static_cast<std::size_t>(b + 1)] += f * mass;
  }
  for (auto& v : u) v = std::sqrt(v);

  auto spec =
      bath::tabulated_spec(grid, u, bath::Domain::symmetric, config.beta);
  spec.one_sided = true;  // mode sum runs over positive frequencies only
  return spec;
}

RelaxationCurve relaxation_experiment(const ChainConfig& config, double lambda,
                                      double t_max, int n_samples,
                                      std::uint64_t seed, double osc_q0,
                                      double osc_p0, double dt,
                                      int store_stride, double fit_start) {
  ChainConfig coupled = config;
  coupled.lambda = lambda;
  auto initial = gibbs_sample(coupled, n_samples, seed, osc_q0, osc_p0);
  auto ens = integrate(coupled, initial, t_max, dt, store_stride);

  const auto n_frames = ens.osc_q.rows();
  const double osq = config.omega0 * config.omega0;
  RelaxationCurve curve;
  curve.times = ens.times;
  curve.mean_energy.resize(n_frames);
  curve.stderr_energy.resize(n_frames);
  for (Eigen::Index f = 0; f < n_frames; ++f) {
    const Eigen::ArrayXd e =
        0.5 * (ens.osc_p.row(f).transpose().array().square() +
               osq * ens.osc_q.row(f).transpose().array().square());
    const double mean = e.mean();
    const double var =
        n_samples > 1 ? (e - mean).square().sum() / double(n_samples - 1)
                      : 0.0;
    curve.mean_energy[f] = mean;
    curve.stderr_energy[f] = std::sqrt(var / double(n_samples));
  }

  std::vector<double> t_fit;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index f = 0; f < n_frames; ++f)
    if (curve.times[static_cast<std::size_t>(f)] >= fit_start) {
      t_fit.push_back(curve.times[static_cast<std::size_t>(f)]);
      idx.push_back(f);
    }
  if (t_fit.size() < 4)
    throw DomainError("not enough stored frames beyond fit_start");
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  Eigen::VectorXd se(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = curve.mean_energy[idx[i]];
    se[static_cast<Eigen::Index>(i)] = curve.stderr_energy[idx[i]];
  }
  fit_exponential(t_fit, y, se, curve.rate, curve.rate_stderr,
                  curve.equilibrium);
  return curve;
}

}  // namespace mk::chain
