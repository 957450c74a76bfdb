#include <cmath>

#include "doctest.h"
#include "mk/bath.hpp"
#include "mk/errors.hpp"
#include "mk/fpde.hpp"

using namespace mk;
using namespace mk::fpde;

namespace {

double gauss_u(double w) { return w * w * std::exp(-w * w); }

PhaseGrid square_grid(double half, int n) {
  return PhaseGrid{-half, half, -half, half, n, n};
}

BuildParams classical_params(double lambda, double beta) {
  BuildParams p;
  p.lambda = lambda;
  p.omega0 = 1.0;
  p.spec = bath::classical_spec(gauss_u, beta);
  return p;
}

// Normalized Gaussian sampled on the grid nodes.
PhaseSpaceField gaussian_field(const PhaseGrid& grid,
                               const Eigen::Vector2d& mean,
                               const Eigen::Matrix2d& cov) {
  const Eigen::Matrix2d prec = cov.inverse();
  PhaseSpaceField f;
  f.grid = grid;
  f.values.resize(grid.n_q, grid.n_p);
  for (int j = 0; j < grid.n_p; ++j) {
    for (int i = 0; i < grid.n_q; ++i) {
      Eigen::Vector2d d(grid.q(i) - mean(0), grid.p(j) - mean(1));
      f.values(i, j) = std::exp(-0.5 * d.dot(prec * d));
    }
  }
  f.values /= f.values.sum() * grid.dq() * grid.dp();
  return f;
}

void discrete_moments(const PhaseSpaceField& f, Eigen::Vector2d& mean,
                      Eigen::Matrix2d& cov) {
  const double cell = f.grid.dq() * f.grid.dp();
  double mass = 0.0;
  mean.setZero();
  for (int j = 0; j < f.grid.n_p; ++j)
    for (int i = 0; i < f.grid.n_q; ++i) {
      const double w = f.values(i, j) * cell;
      mass += w;
      mean += w * Eigen::Vector2d(f.grid.q(i), f.grid.p(j));
    }
  mean /= mass;
  cov.setZero();
  for (int j = 0; j < f.grid.n_p; ++j)
    for (int i = 0; i < f.grid.n_q; ++i) {
      Eigen::Vector2d d(f.grid.q(i) - mean(0), f.grid.p(j) - mean(1));
      cov += (f.values(i, j) * cell / mass) * d * d.transpose();
    }
}

// Reference moment dynamics integrated with small RK4 steps.
void integrate_moments(const MomentData& md, Eigen::Vector2d& mean,
                       Eigen::Matrix2d& cov, double t_max, double dt) {
  auto dmu = [&md](const Eigen::Vector2d& m) {
    return Eigen::Vector2d(md.drift * m + md.offset);
  };
  auto dS = [&md](const Eigen::Matrix2d& s) {
    return Eigen::Matrix2d(md.drift * s + s * md.drift.transpose() +
                           2.0 * md.diffusion);
  };
  const long n = std::llround(t_max / dt);
  for (long k = 0; k < n; ++k) {
    const Eigen::Vector2d m1 = dmu(mean);
    const Eigen::Vector2d m2 = dmu(mean + 0.5 * dt * m1);
    const Eigen::Vector2d m3 = dmu(mean + 0.5 * dt * m2);
    const Eigen::Vector2d m4 = dmu(mean + dt * m3);
    const Eigen::Matrix2d s1 = dS(cov);
    const Eigen::Matrix2d s2 = dS(cov + 0.5 * dt * s1);
    const Eigen::Matrix2d s3 = dS(cov + 0.5 * dt * s2);
    const Eigen::Matrix2d s4 = dS(cov + dt * s3);
    mean += (dt / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    cov += (dt / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
  }
}

// Action of the operator on a sampled Gaussian, in closed form. With
// y = P (x - mean), P the precision matrix, second derivatives of the
// Gaussian are (y y^T - P) f and the drift divergence contributes the
// Jacobian trace.
PhaseSpaceField analytic_action(const FPOperator& op,
                                const PhaseSpaceField& f,
                                const Eigen::Vector2d& mean,
                                const Eigen::Matrix2d& cov) {
  const Eigen::Matrix2d prec = cov.inverse();
  const double jac_tr = (op.drift_q(1.0, 0.0) - op.drift_q(0.0, 0.0)) +
                        (op.drift_p(0.0, 1.0) - op.drift_p(0.0, 0.0));
  PhaseSpaceField out = f;
  for (int j = 0; j < f.grid.n_p; ++j) {
    for (int i = 0; i < f.grid.n_q; ++i) {
      const double q = f.grid.q(i), p = f.grid.p(j);
      const Eigen::Vector2d y = prec * Eigen::Vector2d(q - mean(0),
                                                       p - mean(1));
      const Eigen::Matrix2d hess = y * y.transpose() - prec;
      const double diff = (op.diffusion.array() * hess.array()).sum();
      const double adv =
          -op.drift_q(q, p) * y(0) - op.drift_p(q, p) * y(1) + jac_tr;
      out.values(i, j) = f.values(i, j) * (adv + diff);
    }
  }
  return out;
}

// One RK4 step with a step small enough that the discrete operator action
// dominates the truncation of the time expansion.
PhaseSpaceField discrete_action(const FPOperator& op,
                                const PhaseSpaceField& f) {
  const double dt = 1e-6;
  auto traj = evolve_field(op, f, dt, dt);
  PhaseSpaceField out = f;
  out.values = (traj.fields.back().values - f.values) / dt;
  return out;
}

}  // namespace

TEST_CASE("classical operator balances friction against diffusion") {
  auto p = classical_params(0.3, 1.0);
  auto op = build(Variant::classical, p);

  // lambda^2 pi u^2(1) / 2 for this coupling, and the detailed-balance pair
  const double fric = 0.019132574921443635;
  const double renorm = 1.0016906289169569;
  CHECK(op.diffusion(1, 1) == doctest::Approx(fric).epsilon(1e-12));
  CHECK(op.diffusion(0, 0) == doctest::Approx(fric).epsilon(1e-12));
  CHECK(op.diffusion(0, 1) == 0.0);
  CHECK(op.renorm_factor == doctest::Approx(renorm).epsilon(1e-12));
  CHECK(op.drift_q(0.0, 1.0) == doctest::Approx(-renorm).epsilon(1e-12));
  CHECK(op.drift_q(1.0, 0.0) == doctest::Approx(fric).epsilon(1e-12));
  CHECK(op.drift_p(1.0, 0.0) == doctest::Approx(renorm).epsilon(1e-12));
  CHECK(op.drift_p(0.0, 1.0) == doctest::Approx(fric).epsilon(1e-12));

  // colder bath: same friction, diffusion scaled down by beta
  auto cold = build(Variant::classical, classical_params(0.3, 2.0));
  CHECK(cold.diffusion(1, 1) == doctest::Approx(fric / 2.0).epsilon(1e-12));
  CHECK(cold.drift_p(0.0, 1.0) == doctest::Approx(fric).epsilon(1e-12));

  BuildParams bare;
  CHECK_THROWS_AS(build(Variant::classical, bare), MissingBathQuantity);
}

TEST_CASE("defective operator transcribes the printed kinetic coefficients") {
  auto p = classical_params(0.3, 1.0);
  auto op = build(Variant::gme, p);

  CHECK(op.diffusion(1, 1) ==
        doctest::Approx(0.038265149842887270).epsilon(1e-12));
  CHECK(op.diffusion(0, 1) ==
        doctest::Approx(-0.015790412961756307).epsilon(1e-10));
  CHECK(op.diffusion(0, 0) == 0.0);
  CHECK(op.diffusion.determinant() < 0.0);

  // position equation keeps the bare flow; double-strength friction sits on
  // the momentum axis only
  CHECK(op.drift_q(0.0, 1.0) == -1.0);
  CHECK(op.drift_q(1.0, 0.0) == 0.0);
  CHECK(op.drift_p(0.0, 1.0) ==
        doctest::Approx(0.076530299685774539).epsilon(1e-12));
  CHECK(op.drift_p(1.0, 0.0) ==
        doctest::Approx(1.0016906289169569).epsilon(1e-12));

  auto qspec = bath::quantum_spec([](double w) { return std::exp(-w * w); },
                                  [](double) { return 1.0; }, 1.0);
  BuildParams qp;
  qp.lambda = 0.3;
  qp.spec = qspec;
  CHECK_THROWS_AS(build(Variant::gme, qp), MissingBathQuantity);
}

TEST_CASE("general operator shifts the diffusion with the ordering") {
  lindblad::LindbladCoefficients c;
  c.d1 = 0.3;
  c.d2 = 0.12;
  c.d = 0.02;
  c.lam = 0.25;
  c.kappa = 0.05;
  c.omega0 = 2.0;
  c.hbar = 0.5;
  c.h_scale = 0.9;

  BuildParams p;
  p.coefficients = c;

  p.a = 0.0;
  auto mid = build(Variant::general, p);
  CHECK(mid.diffusion(1, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(mid.diffusion(0, 0) == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(mid.diffusion(0, 1) == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(mid.drift_q(0.0, 1.0) == doctest::Approx(-0.9).epsilon(1e-15));
  CHECK(mid.drift_q(1.0, 0.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(mid.drift_p(1.0, 0.0) == doctest::Approx(3.6).epsilon(1e-15));
  CHECK(mid.drift_p(0.0, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(mid.renorm_factor == doctest::Approx(0.9).epsilon(1e-15));

  p.a = 1.0;
  auto anti = build(Variant::general, p);
  CHECK(anti.diffusion(1, 1) == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(anti.diffusion(0, 0) == doctest::Approx(0.145).epsilon(1e-15));

  p.a = -1.0;
  auto normal = build(Variant::general, p);
  CHECK(normal.diffusion(1, 1) == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(normal.diffusion(0, 0) == doctest::Approx(0.095).epsilon(1e-15));

  // without hbar the three orderings coincide exactly
  c.hbar = 0.0;
  p.coefficients = c;
  p.a = 1.0;
  auto flat_anti = build(Variant::general, p);
  p.a = -1.0;
  auto flat_normal = build(Variant::general, p);
  CHECK(flat_anti.diffusion == flat_normal.diffusion);

  BuildParams bare;
  CHECK_THROWS_AS(build(Variant::general, bare), MissingBathQuantity);
}

TEST_CASE("quantum_ps agrees with general built from model coefficients") {
  auto qspec =
      bath::quantum_spec([](double w) { return w * std::exp(-w * w / 2.0); },
                         [](double) { return 1.0; }, 1.0);
  BuildParams p;
  p.lambda = 0.2;
  p.omega0 = 1.0;
  p.hbar = 1.0;
  p.a = 0.5;
  p.spec = qspec;
  auto direct = build(Variant::quantum_ps, p);

  BuildParams g;
  g.a = 0.5;
  g.coefficients =
      lindblad::coefficients_from_model(qspec, 0.2, 1.0, 1.0, 1.0);
  auto routed = build(Variant::general, g);

  CHECK((direct.diffusion - routed.diffusion).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(direct.drift_q(0.3, -0.7) ==
        doctest::Approx(routed.drift_q(0.3, -0.7)).epsilon(1e-14));
  CHECK(direct.drift_p(0.3, -0.7) ==
        doctest::Approx(routed.drift_p(0.3, -0.7)).epsilon(1e-14));
  CHECK(direct.renorm_factor ==
        doctest::Approx(routed.renorm_factor).epsilon(1e-14));

  BuildParams bare;
  CHECK_THROWS_AS(build(Variant::quantum_ps, bare), MissingBathQuantity);
}

TEST_CASE("thermal field is normalized and rejects thin grids") {
  auto grid = square_grid(8.0, 128);
  auto mb = mb_distribution(1.0, 1.0, grid);
  CHECK(mb.integral() == doctest::Approx(1.0).epsilon(1e-13));

  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
  discrete_moments(mb, mean, cov);
  CHECK(std::abs(mean(0)) < 1e-12);
  CHECK(std::abs(mean(1)) < 1e-12);
  CHECK(cov(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(cov(0, 1)) < 1e-12);

  // a stiffer trap narrows the position axis
  auto stiff = mb_distribution(1.0, 2.0, square_grid(8.0, 192));
  discrete_moments(stiff, mean, cov);
  CHECK(cov(0, 0) == doctest::Approx(0.25).epsilon(1e-8));

  CHECK_THROWS_AS(mb_distribution(1.0, 1.0, square_grid(4.0, 64)),
                  GridUnderResolved);
  CHECK_THROWS_AS(mb_distribution(1.0, 1.0, square_grid(10.0, 16)),
                  GridUnderResolved);
  CHECK_THROWS_AS(mb_distribution(-1.0, 1.0, grid), DomainError);
}

TEST_CASE("equilibrium is discretely stationary only when balanced") {
  auto grid = square_grid(8.0, 128);
  auto mb = mb_distribution(1.0, 1.0, grid);
  auto cl = build(Variant::classical, classical_params(0.3, 1.0));
  auto gme = build(Variant::gme, classical_params(0.3, 1.0));

  const double res_cl = stationarity_residual(cl, mb);
  const double res_gme = stationarity_residual(gme, mb);
  CHECK(res_cl < 1e-12);
  CHECK(res_gme > 1e-3);
  CHECK(res_gme > 1e4 * res_cl);

  PhaseSpaceField zero = mb;
  zero.values.setZero();
  CHECK_THROWS_AS(stationarity_residual(cl, zero), DomainError);
}

TEST_CASE("heat kernel spreads at the diffusion rate") {
  lindblad::LindbladCoefficients c;
  c.d1 = 0.05;
  c.d2 = 0.05;
  c.h_scale = 0.0;  // no flow at all, pure diffusion
  c.hbar = 0.0;
  BuildParams p;
  p.coefficients = c;
  auto op = build(Variant::general, p);

  auto grid = square_grid(6.0, 128);
  auto f0 = gaussian_field(grid, Eigen::Vector2d::Zero(),
                           0.25 * Eigen::Matrix2d::Identity());
  auto traj = evolve_field(op, f0, 1.0, 0.05, 20);
  REQUIRE(traj.fields.size() == 2);

  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
  discrete_moments(traj.fields.back(), mean, cov);
  CHECK(cov(0, 0) == doctest::Approx(0.35).epsilon(0.01));
  CHECK(cov(1, 1) == doctest::Approx(0.35).epsilon(0.01));
  CHECK(traj.fields.back().integral() ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(traj.fields.back().values.maxCoeff() < f0.values.maxCoeff());
}

TEST_CASE("gaussian evolution follows the closed moment dynamics") {
  auto op = build(Variant::classical, classical_params(0.3, 1.0));
  auto grid = square_grid(8.0, 160);
  Eigen::Vector2d mean0(1.0, 0.3);
  Eigen::Matrix2d cov0;
  cov0 << 0.5, 0.0, 0.0, 0.8;
  auto f0 = gaussian_field(grid, mean0, cov0);

  auto traj = evolve_field(op, f0, 2.0, 0.01, 200);
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
  discrete_moments(traj.fields.back(), mean, cov);

  Eigen::Vector2d mean_ref = mean0;
  Eigen::Matrix2d cov_ref = cov0;
  integrate_moments(moments(op), mean_ref, cov_ref, 2.0, 1e-4);

  CHECK((mean - mean_ref).cwiseAbs().maxCoeff() < 4e-3);
  CHECK((cov - cov_ref).cwiseAbs().maxCoeff() < 4e-3);
}

TEST_CASE("moment data solves the stationary covariance") {
  auto op = build(Variant::classical, classical_params(0.3, 2.0));
  // omega0 = 1, beta = 2: equipartition gives diag(1/2, 1/2)
  auto md = moments(op);
  CHECK(md.stationary_covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(md.stationary_covariance(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(md.stationary_covariance(0, 1)) < 1e-14);
  CHECK(md.offset.cwiseAbs().maxCoeff() < 1e-14);

  // the model route lands on the occupancy-shifted equipartition
  auto qspec =
      bath::quantum_spec([](double w) { return w * std::exp(-w * w / 2.0); },
                         [](double) { return 1.0; }, 1.0);
  BuildParams qp;
  qp.lambda = 0.2;
  qp.omega0 = 1.0;
  qp.hbar = 1.0;
  qp.a = 0.0;
  qp.spec = qspec;
  auto qop = build(Variant::quantum_ps, qp);
  auto qmd = moments(qop);
  const double nu = 1.0819767068693265;  // 1/(e - 1) + 1/2
  CHECK(qmd.stationary_covariance(0, 0) == doctest::Approx(nu).epsilon(1e-12));
  CHECK(qmd.stationary_covariance(1, 1) == doctest::Approx(nu).epsilon(1e-12));

  // the defective operator is still damped, so its Lyapunov solve closes
  auto gme = build(Variant::gme, classical_params(0.3, 1.0));
  auto gmd = moments(gme);
  const Eigen::Matrix2d res = gmd.drift * gmd.stationary_covariance +
                              gmd.stationary_covariance *
                                  gmd.drift.transpose() +
                              2.0 * gmd.diffusion;
  CHECK(res.cwiseAbs().maxCoeff() < 1e-13);

  // undamped rotation has no stationary covariance
  lindblad::LindbladCoefficients c;
  c.d1 = 0.1;
  c.d2 = 0.1;
  BuildParams rot;
  rot.coefficients = c;
  CHECK_THROWS_AS(moments(build(Variant::general, rot)), NonHurwitzDrift);

  FPOperator bent = op;
  bent.drift_q = [](double q, double p) { return q * q - p; };
  CHECK_THROWS_AS(moments(bent), DomainError);
}

TEST_CASE("evolution guards reject bad steps and leaking fields") {
  auto op = build(Variant::classical, classical_params(0.3, 1.0));
  auto grid = square_grid(8.0, 128);
  auto mb = mb_distribution(1.0, 1.0, grid);

  CHECK_THROWS_AS(evolve_field(op, mb, 1.0, 10.0), CFLViolation);
  CHECK_THROWS_AS(evolve_field(op, mb, 1.0, -0.1), DomainError);
  CHECK_THROWS_AS(evolve_field(op, mb, 1.0, 0.01, 0), DomainError);

  auto hugging = gaussian_field(grid, Eigen::Vector2d(6.5, 0.0),
                                0.25 * Eigen::Matrix2d::Identity());
  CHECK_THROWS_AS(evolve_field(op, hugging, 1.0, 0.01), BoundaryLeak);

  // snapshot bookkeeping: t = 0, strided interior, and the final step
  auto traj = evolve_field(op, mb, 0.1, 0.01, 3);
  REQUIRE(traj.times.size() == 5);
  CHECK(traj.times[1] == doctest::Approx(0.03));
  CHECK(traj.times.back() == doctest::Approx(0.1));
}

TEST_CASE("relative entropy decreases along the balanced flow") {
  auto op = build(Variant::classical, classical_params(0.3, 1.0));
  auto grid = square_grid(8.0, 128);
  auto mb = mb_distribution(1.0, 1.0, grid);
  auto f0 = gaussian_field(grid, Eigen::Vector2d(1.5, 0.0),
                           Eigen::Matrix2d::Identity());

  const int stride = 10;
  auto traj = evolve_field(op, f0, 3.0, 0.01, stride);
  const double cell = grid.dq() * grid.dp();
  std::vector<double> h_vals;
  for (const auto& f : traj.fields) {
    double h = 0.0;
    for (int j = 0; j < grid.n_p; ++j)
      for (int i = 0; i < grid.n_q; ++i) {
        const double v = f.values(i, j);
        if (v > 0.0) h += v * std::log(v / mb.values(i, j)) * cell;
      }
    h_vals.push_back(h);
  }
  // KL of a displaced equilibrium Gaussian is half the squared displacement
  // in thermal units, and the displacement damps at the friction rate
  const double fric = 0.019132574921443635;
  CHECK(h_vals.front() == doctest::Approx(1.125).epsilon(1e-3));
  CHECK(h_vals.back() ==
        doctest::Approx(1.125 * std::exp(-2.0 * fric * 3.0)).epsilon(1e-2));
  for (std::size_t k = 1; k < h_vals.size(); ++k)
    CHECK(h_vals[k] <= h_vals[k - 1] + 1e-8 * stride);
  CHECK(h_vals.back() >= -1e-12);
}

TEST_CASE("stencils are second order against the analytic action") {
  const Eigen::Vector2d mean(0.6, -0.4);
  Eigen::Matrix2d cov;
  cov << 0.3025, 0.05, 0.05, 0.3025;

  for (auto variant : {Variant::classical, Variant::gme}) {
    auto op = build(variant, classical_params(0.3, 1.0));
    double err[2];
    for (int lvl = 0; lvl < 2; ++lvl) {
      auto grid = square_grid(4.0, lvl == 0 ? 96 : 192);
      auto f = gaussian_field(grid, mean, cov);
      auto exact = analytic_action(op, f, mean, cov);
      auto approx = discrete_action(op, f);
      err[lvl] = (approx.values - exact.values).cwiseAbs().maxCoeff();
    }
    const double ratio = err[0] / err[1];
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }
}

TEST_CASE("defective diffusion drives a tight state negative") {
  const double beta = 25.0;
  auto cl = build(Variant::classical, classical_params(0.9, beta));
  auto gme = build(Variant::gme, classical_params(0.9, beta));

  // the equilibrium-width Gaussian sits inside the collapse regime of the
  // indefinite diffusion: its covariance shrinks through zero
  auto md = moments(gme);
  Eigen::Vector2d mean(0.1, 0.0);
  Eigen::Matrix2d cov = (1.0 / beta) * Eigen::Matrix2d::Identity();
  Eigen::Vector2d m = mean;
  Eigen::Matrix2d s = cov;
  double first_bad = -1.0;
  for (int k = 0; k < 600; ++k) {
    integrate_moments(md, m, s, 1e-3, 1e-3);
    const double mineig =
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(s).eigenvalues()(0);
    if (mineig < 0.0) {
      first_bad = (k + 1) * 1e-3;
      break;
    }
  }
  REQUIRE(first_bad > 0.0);
  CHECK(first_bad < 0.4);

  auto grid = square_grid(2.1, 192);
  auto f0 = gaussian_field(grid, mean, cov);

  // The indefinite matrix acts as a backward heat flow along its negative
  // eigendirection, so structure near the grid scale is amplified, not
  // smoothed. Seed a fine ripple under a tight envelope and watch the
  // defective flow take the field negative; the balanced twin evolves the
  // bare state and stays positive.
  auto probe = f0;
  const double kk = 3.14159265358979323846 / (2.0 * grid.dq());
  const double seed = 1e-10 * f0.values.maxCoeff();
  for (int j = 0; j < grid.n_p; ++j)
    for (int i = 0; i < grid.n_q; ++i) {
      const double q = grid.q(i), p = grid.p(j);
      const double envelope = std::exp(-(q * q + p * p) / 0.32);
      probe.values(i, j) += seed * envelope * std::cos(kk * q) * std::cos(kk * p);
    }

  PhaseSpaceField running = probe;
  double worst = 0.0;
  for (int chunk = 0; chunk < 25 && worst > -1e-4; ++chunk) {
    auto bad = evolve_field(gme, running, 0.02, 1e-3, 20);
    running = bad.fields.back();
    worst = std::min(worst,
                     running.values.minCoeff() / running.values.maxCoeff());
  }
  CHECK(worst < -1e-4);

  auto good = evolve_field(cl, f0, 0.6, 5e-3, 40);
  for (const auto& f : good.fields) {
    CHECK(f.values.minCoeff() >= -1e-8 * f.values.maxCoeff());
    CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("coherent rescaling preserves structure") {
  lindblad::LindbladCoefficients c;
  c.d1 = 0.3;
  c.d2 = 0.12;
  c.d = 0.02;
  c.lam = 0.25;
  c.kappa = 0.05;
  c.omega0 = 2.0;
  c.hbar = 0.5;
  c.h_scale = 0.9;
  BuildParams p;
  p.coefficients = c;
  auto op = build(Variant::general, p);

  // sq^2 = 2 hbar / omega0 = 0.5, sp^2 = 2 hbar omega0 = 2, sq sp = 2 hbar
  auto scaled = coherent_rescale(op, 0.5, 2.0);
  CHECK(scaled.diffusion(0, 0) == doctest::Approx(0.24).epsilon(1e-14));
  CHECK(scaled.diffusion(1, 1) == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(scaled.diffusion(0, 1) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(scaled.drift_q(0.0, 1.0) == doctest::Approx(-1.8).epsilon(1e-14));

  auto back = coherent_unrescale(scaled, 0.5, 2.0);
  CHECK((back.diffusion - op.diffusion).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.drift_q(0.7, -0.2) ==
        doctest::Approx(op.drift_q(0.7, -0.2)).epsilon(1e-13));
  CHECK(back.drift_p(0.7, -0.2) ==
        doctest::Approx(op.drift_p(0.7, -0.2)).epsilon(1e-13));

  auto grid = square_grid(8.0, 128);
  auto mb = mb_distribution(1.0, 1.0, grid);
  auto mb_scaled = coherent_rescale(mb, 0.5, 2.0);
  CHECK(mb_scaled.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mb_scaled.grid.q_max == doctest::Approx(8.0 / std::sqrt(0.5)));
  int i0, j0, i1, j1;
  mb.values.maxCoeff(&i0, &j0);
  mb_scaled.values.maxCoeff(&i1, &j1);
  CHECK(i0 == i1);
  CHECK(j0 == j1);

  auto mb_back = coherent_unrescale(mb_scaled, 0.5, 2.0);
  CHECK((mb_back.values - mb.values).cwiseAbs().maxCoeff() <
        1e-14 * mb.values.maxCoeff());
  CHECK(mb_back.grid.q_max == doctest::Approx(8.0).epsilon(1e-14));

  CHECK_THROWS_AS(coherent_rescale(op, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(coherent_rescale(mb, 1.0, -2.0), DomainError);
}
