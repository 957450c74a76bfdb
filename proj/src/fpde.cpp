// fpde.cpp: builders for the phase-plane drift-diffusion operators and a
// conservative finite-volume integrator.
//
// The discretization plays two roles that pull in different directions. For
// the dissipative variants the interesting questions are asymptotic (is the
// Gaussian the solver relaxes to the analytic one, does the H functional
// decrease), which demands that the analytic stationary state be stationary
// on the grid, not just up to truncation error. For the defective variant
// the interesting signal is precisely its failure to hold a stationary
// Gaussian, so nothing may be rebalanced there. apply() therefore detects
// whether the operator's friction is in detailed balance with its diffusion
// against some Gaussian reference M: if so, fluxes are written in g = f/M
// (they vanish identically when f is proportional to M); otherwise plain
// central stencils transcribe the operator as given.

#include "mk/fpde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mk/errors.hpp"

namespace mk::fpde {

namespace {

constexpr double pi = 3.14159265358979323846;

struct Affine {
  double c0 = 0.0;  // value at the origin
  double cq = 0.0;  // slope along q
  double cp = 0.0;  // slope along p
};

// Reads the three coefficients off a drift component and rejects anything
// that fails superposition at a fourth probe point.
Affine probe_affine(const std::function<double(double, double)>& f,
                    const char* which) {
  if (!f) throw DomainError(std::string(which) + " drift function is unset");
  Affine out;
  out.c0 = f(0.0, 0.0);
  out.cq = f(1.0, 0.0) - out.c0;
  out.cp = f(0.0, 1.0) - out.c0;
  const double probed = f(2.0, 3.0);
  const double expected = out.c0 + 2.0 * out.cq + 3.0 * out.cp;
  const double scale = std::abs(out.c0) + std::abs(out.cq) +
                       std::abs(out.cp) + std::abs(probed) + 1e-30;
  if (std::abs(probed - expected) > 1e-9 * scale)
    throw DomainError(std::string(which) + " drift is not affine in (q, p)");
  return out;
}

struct DriftData {
  Affine q;  // A_q = q.c0 + q.cq q + q.cp p
  Affine p;  // A_p = p.c0 + p.cq q + p.cp p
};

DriftData probe_drift(const FPOperator& op) {
  return {probe_affine(op.drift_q, "q"), probe_affine(op.drift_p, "p")};
}

// Gaussian reference M = exp(-bref (wref2 q^2 + p^2) / 2) against which the
// operator is a gradient flow: axis frictions in detailed balance with the
// axis diffusions, rotation leaving M invariant, no cross diffusion, drift
// centered on the origin. bref = 0 (reference identically one) covers pure
// diffusion with optional rotation.
struct Balance {
  bool ok = false;
  double bref = 0.0;
  double wref2 = 1.0;
};

Balance detect_balance(const DriftData& d, const Eigen::Matrix2d& D) {
  const double dqq = D(0, 0), dpp = D(1, 1), dqp = D(0, 1);
  const double fric_q = d.q.cq, fric_p = d.p.cp;
  const double rot_q = -d.q.cp;  // A_q carries -rot_q p
  const double rot_p = d.p.cq;   // A_p carries +rot_p q
  const double dscale = std::abs(dqq) + std::abs(dpp) + 1e-300;
  const double ascale = std::abs(fric_q) + std::abs(fric_p) +
                        std::abs(rot_q) + std::abs(rot_p) + 1e-300;

  Balance out;
  if (std::abs(dqp) > 1e-13 * dscale) return out;
  if (std::abs(d.q.c0) + std::abs(d.p.c0) > 1e-13 * ascale) return out;

  if (fric_p > 0.0 && dpp > 0.0) {
    out.bref = fric_p / dpp;
    if (fric_q > 0.0 && dqq > 0.0) {
      out.wref2 = fric_q / (out.bref * dqq);
    } else if (std::abs(fric_q) <= 1e-13 * ascale && dqq <= 1e-13 * dscale) {
      // Kinetic form: no q dissipation, the rotation pins the reference.
      out.wref2 = (std::abs(rot_q) > 1e-13 * ascale) ? rot_p / rot_q : 1.0;
    } else {
      return out;  // friction without diffusion on q, or the reverse
    }
    if (!(out.wref2 > 0.0)) return out;
    if (std::abs(rot_p - rot_q * out.wref2) >
        1e-11 * (std::abs(rot_p) + std::abs(rot_q * out.wref2) + 1e-300))
      return out;
    out.ok = true;
    return out;
  }

  if (std::abs(fric_p) <= 1e-13 * ascale &&
      std::abs(fric_q) <= 1e-13 * ascale) {
    out.bref = 0.0;  // frictionless: plain diffusion plus rotation
    out.wref2 = 1.0;
    out.ok = true;
  }
  return out;
}

// Grid geometry, probed coefficients, and precomputed reference weights.
// apply() is the single stencil used by the integrator and the residual.
struct Stencil {
  int nq = 0, np = 0;
  double hq = 0.0, hp = 0.0;
  std::vector<double> qs, ps;
  DriftData drift;
  Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
  Balance bal;
  Eigen::MatrixXd M;       // node weights
  Eigen::MatrixXd Mfq;     // q-face weights, (nq + 1) x np, walls zero
  Eigen::MatrixXd Mfp;     // p-face weights, nq x (np + 1), walls zero
  Eigen::MatrixXd Mnorm;   // M / sum(M), the mass-projection direction
  mutable Eigen::MatrixXd g, Gq, Gp;  // scratch

  void apply(const Eigen::MatrixXd& f, Eigen::MatrixXd& out) const;
};

Stencil make_stencil(const FPOperator& op, const PhaseGrid& grid) {
  grid.validate();
  Stencil s;
  s.nq = grid.n_q;
  s.np = grid.n_p;
  s.hq = grid.dq();
  s.hp = grid.dp();
  s.qs.resize(s.nq);
  s.ps.resize(s.np);
  for (int i = 0; i < s.nq; ++i) s.qs[i] = grid.q(i);
  for (int j = 0; j < s.np; ++j) s.ps[j] = grid.p(j);
  s.drift = probe_drift(op);
  s.D = op.diffusion;
  if (std::abs(s.D(0, 1) - s.D(1, 0)) >
      1e-13 * (std::abs(s.D(0, 1)) + std::abs(s.D(1, 0)) + 1e-300))
    throw DomainError("diffusion matrix must be symmetric");
  s.bal = detect_balance(s.drift, s.D);

  if (s.bal.ok) {
    auto weight = [&s](double q, double p) {
      const double e = -0.5 * s.bal.bref * (s.bal.wref2 * q * q + p * p);
      return std::max(std::exp(e), 1e-300);
    };
    s.M.resize(s.nq, s.np);
    s.Mfq = Eigen::MatrixXd::Zero(s.nq + 1, s.np);
    s.Mfp = Eigen::MatrixXd::Zero(s.nq, s.np + 1);
    for (int j = 0; j < s.np; ++j)
      for (int i = 0; i < s.nq; ++i) s.M(i, j) = weight(s.qs[i], s.ps[j]);
    for (int j = 0; j < s.np; ++j)
      for (int i = 1; i < s.nq; ++i)
        s.Mfq(i, j) = weight(s.qs[i] - 0.5 * s.hq, s.ps[j]);
    for (int j = 1; j < s.np; ++j)
      for (int i = 0; i < s.nq; ++i)
        s.Mfp(i, j) = weight(s.qs[i], s.ps[j] - 0.5 * s.hp);
    s.Mnorm = s.M / s.M.sum();
    s.g.resize(s.nq, s.np);
  } else {
    s.Gq = Eigen::MatrixXd::Zero(s.nq + 1, s.np);
    s.Gp = Eigen::MatrixXd::Zero(s.nq, s.np + 1);
  }
  return s;
}

// Gradient-flow route. Axis fluxes D M d(g)/dx vanish identically on
// f = const M; the rotation term, written against the same reference, does
// too, but being non-conservative it leaks mass at second order, which the
// rank-one projection along M removes without touching the balance.
void apply_balanced(const Stencil& s, const Eigen::MatrixXd& f,
                    Eigen::MatrixXd& out) {
  const int nq = s.nq, np = s.np;
  const double dqq = s.D(0, 0), dpp = s.D(1, 1);
  const double rot_q = -s.drift.q.cp;
  const double rot_p = s.drift.p.cq;
  s.g = f.cwiseQuotient(s.M);
  const Eigen::MatrixXd& g = s.g;

  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < nq; ++i) {
      // divergence of the axis fluxes, walls held at zero flux
      double div = 0.0;
      if (dqq > 0.0) {
        const double fl = (i > 0) ? s.Mfq(i, j) * (g(i, j) - g(i - 1, j)) : 0.0;
        const double fr =
            (i + 1 < nq) ? s.Mfq(i + 1, j) * (g(i + 1, j) - g(i, j)) : 0.0;
        div += dqq * (fr - fl) / (s.hq * s.hq);
      }
      if (dpp > 0.0) {
        const double fl = (j > 0) ? s.Mfp(i, j) * (g(i, j) - g(i, j - 1)) : 0.0;
        const double fr =
            (j + 1 < np) ? s.Mfp(i, j + 1) * (g(i, j + 1) - g(i, j)) : 0.0;
        div += dpp * (fr - fl) / (s.hp * s.hp);
      }
      // rotation, central in g with mirrored ghosts
      const double gqm = (i > 0) ? g(i - 1, j) : g(0, j);
      const double gqp = (i + 1 < nq) ? g(i + 1, j) : g(nq - 1, j);
      const double gpm = (j > 0) ? g(i, j - 1) : g(i, 0);
      const double gpp = (j + 1 < np) ? g(i, j + 1) : g(i, np - 1);
      const double skew =
          -rot_q * s.ps[j] * s.M(i, j) * (gqp - gqm) / (2.0 * s.hq) +
          rot_p * s.qs[i] * s.M(i, j) * (gpp - gpm) / (2.0 * s.hp);
      out(i, j) = div + skew;
    }
  }
  out -= out.sum() * s.Mnorm;
}

// Literal route: flux-form central differences for the full operator,
//   d_t f = d_q G_q + d_p G_p,
//   G_q = A_q f + D_qq d_q f + D_qp d_p f   (G_p by symmetry),
// evaluated on faces. Zero-flux walls make the step conservative, and no
// part of the operator is rebalanced, so a defective diffusion matrix shows
// its indefiniteness undisturbed.
void apply_plain(const Stencil& s, const Eigen::MatrixXd& f,
                 Eigen::MatrixXd& out) {
  const int nq = s.nq, np = s.np;
  const double dqq = s.D(0, 0), dpp = s.D(1, 1), dqp = s.D(0, 1);
  auto aq = [&s](double q, double p) {
    return s.drift.q.c0 + s.drift.q.cq * q + s.drift.q.cp * p;
  };
  auto ap = [&s](double q, double p) {
    return s.drift.p.c0 + s.drift.p.cq * q + s.drift.p.cp * p;
  };

  Eigen::MatrixXd& Gq = s.Gq;
  Eigen::MatrixXd& Gp = s.Gp;
  for (int j = 0; j < np; ++j) {
    for (int i = 1; i < nq; ++i) {
      const double face = aq(s.qs[i] - 0.5 * s.hq, s.ps[j]);
      double flux = face * 0.5 * (f(i - 1, j) + f(i, j)) +
                    dqq * (f(i, j) - f(i - 1, j)) / s.hq;
      if (dqp != 0.0) {
        const double up = (j + 1 < np) ? f(i - 1, j + 1) + f(i, j + 1)
                                       : f(i - 1, j) + f(i, j);
        const double dn = (j > 0) ? f(i - 1, j - 1) + f(i, j - 1)
                                  : f(i - 1, j) + f(i, j);
        flux += dqp * (up - dn) / (4.0 * s.hp);
      }
      Gq(i, j) = flux;
    }
  }
  for (int j = 1; j < np; ++j) {
    for (int i = 0; i < nq; ++i) {
      const double face = ap(s.qs[i], s.ps[j] - 0.5 * s.hp);
      double flux = face * 0.5 * (f(i, j - 1) + f(i, j)) +
                    dpp * (f(i, j) - f(i, j - 1)) / s.hp;
      if (dqp != 0.0) {
        const double up = (i + 1 < nq) ? f(i + 1, j - 1) + f(i + 1, j)
                                       : f(i, j - 1) + f(i, j);
        const double dn = (i > 0) ? f(i - 1, j - 1) + f(i - 1, j)
                                  : f(i, j - 1) + f(i, j);
        flux += dqp * (up - dn) / (4.0 * s.hq);
      }
      Gp(i, j) = flux;
    }
  }
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < nq; ++i)
      out(i, j) = (Gq(i + 1, j) - Gq(i, j)) / s.hq +
                  (Gp(i, j + 1) - Gp(i, j)) / s.hp;
}

void Stencil::apply(const Eigen::MatrixXd& f, Eigen::MatrixXd& out) const {
  if (bal.ok)
    apply_balanced(*this, f, out);
  else
    apply_plain(*this, f, out);
}

double max_abs_drift_on_corners(const Affine& a, const PhaseGrid& grid) {
  double worst = 0.0;
  for (double q : {grid.q_min, grid.q_max})
    for (double p : {grid.p_min, grid.p_max})
      worst = std::max(worst, std::abs(a.c0 + a.cq * q + a.cp * p));
  return worst;
}

double boundary_max(const Eigen::MatrixXd& f) {
  double worst = 0.0;
  const int nq = static_cast<int>(f.rows()), np = static_cast<int>(f.cols());
  for (int i = 0; i < nq; ++i)
    worst = std::max({worst, std::abs(f(i, 0)), std::abs(f(i, np - 1))});
  for (int j = 0; j < np; ++j)
    worst = std::max({worst, std::abs(f(0, j)), std::abs(f(nq - 1, j))});
  return worst;
}

}  // namespace

FPOperator build(Variant variant, const BuildParams& params) {
  if (!(params.omega0 > 0.0)) throw DomainError("omega0 must be positive");
  const double w0 = params.omega0;
  const double l2 = params.lambda * params.lambda;
  FPOperator op;
  op.variant = variant;

  if (variant == Variant::classical || variant == Variant::gme) {
    if (!params.spec)
      throw MissingBathQuantity(
          "classical and gme operators need a bath spec");
    params.spec->validate();
    const double beta = params.spec->beta;
    const auto shifts = bath::frequency_shifts(*params.spec, w0);
    const double renorm = 1.0 - l2 * shifts.delta / w0;
    op.renorm_factor = renorm;

    if (variant == Variant::classical) {
      // Friction fixed by detailed balance against the diffusion pair, so
      // exp(-beta H) is stationary; the renormalization multiplies the
      // whole oscillator flow.
      const double fric = l2 * bath::classical_rate(*params.spec, w0);
      const double dpp = fric / beta;
      op.diffusion << dpp / (w0 * w0), 0.0, 0.0, dpp;
      op.drift_q = [renorm, fric](double q, double p) {
        return -renorm * p + fric * q;
      };
      op.drift_p = [renorm, fric, w0](double q, double p) {
        return renorm * w0 * w0 * q + fric * p;
      };
      return op;
    }

    // gme: transcribed with its defects intact. Momentum friction is twice
    // the detailed-balance value, the position equation keeps the bare
    // flow, and the chi shift enters as an indefinite cross diffusion.
    if (params.spec->domain != bath::Domain::symmetric)
      throw MissingBathQuantity("gme needs a classical two-sided bath spec");
    const double u2 = params.spec->coupling_sq(w0);
    const double dpp = l2 * pi * u2 / (beta * w0 * w0);
    const double dqp = l2 * shifts.chi / (2.0 * w0);
    const double fric_p = 2.0 * beta * dpp;
    op.diffusion << 0.0, dqp, dqp, dpp;
    op.drift_q = [](double, double p) { return -p; };
    op.drift_p = [renorm, fric_p, w0](double q, double p) {
      return renorm * w0 * w0 * q + fric_p * p;
    };
    return op;
  }

  // general and quantum_ps share the drift family; they differ in where
  // the coefficients come from and in how the ordering shift is sourced.
  lindblad::LindbladCoefficients c;
  double hbar = params.hbar;
  double shift_qq = 0.0, shift_pp = 0.0;
  if (variant == Variant::general) {
    if (!params.coefficients)
      throw MissingBathQuantity(
          "general operators need explicit friction and diffusion "
          "coefficients");
    c = *params.coefficients;
    hbar = c.hbar;
    shift_qq = params.a * hbar * (c.lam - c.kappa) / (2.0 * c.omega0);
    shift_pp = params.a * hbar * (c.lam + c.kappa) * c.omega0 / 2.0;
  } else {
    if (!params.spec)
      throw MissingBathQuantity("quantum_ps operators need a bath spec");
    params.spec->validate();
    c = lindblad::coefficients_from_model(*params.spec, params.lambda, w0,
                                          params.spec->beta, hbar);
    // The shift geometry is read off the transform-side correction so the
    // two stay in lockstep by construction.
    const auto corr =
        wigner::psi_correction(wigner::ordering_kernel(params.a, w0, hbar));
    shift_qq = params.a * hbar * (c.lam - c.kappa) * corr.c_qq / 2.0;
    shift_pp = params.a * hbar * (c.lam + c.kappa) * corr.c_pp / 2.0;
  }

  const double cw0 = c.omega0;
  const double fric_q = c.lam - c.kappa;
  const double fric_p = c.lam + c.kappa;
  const double hs = c.h_scale;
  op.renorm_factor = hs;
  op.diffusion << c.d2 + shift_qq, c.d, c.d, c.d1 + shift_pp;
  op.drift_q = [hs, fric_q](double q, double p) {
    return -hs * p + fric_q * q;
  };
  op.drift_p = [hs, fric_p, cw0](double q, double p) {
    return hs * cw0 * cw0 * q + fric_p * p;
  };
  return op;
}

PhaseSpaceField mb_distribution(double beta, double omega0,
                                const PhaseGrid& grid) {
  grid.validate();
  if (!(beta > 0.0) || !(omega0 > 0.0))
    throw DomainError("mb_distribution needs beta > 0 and omega0 > 0");
  const double sig_q = 1.0 / (std::sqrt(beta) * omega0);
  const double sig_p = 1.0 / std::sqrt(beta);
  const double reach_q = std::min(-grid.q_min, grid.q_max) / sig_q;
  const double reach_p = std::min(-grid.p_min, grid.p_max) / sig_p;
  if (reach_q < 6.0 || reach_p < 6.0) {
    std::ostringstream msg;
    msg << "grid reaches " << std::min(reach_q, reach_p)
        << " thermal widths from the origin; need 6";
    throw GridUnderResolved(msg.str());
  }
  if (grid.dq() > sig_q || grid.dp() > sig_p)
    throw GridUnderResolved("cell size exceeds one thermal width");

  PhaseSpaceField out;
  out.grid = grid;
  out.a = 0.0;
  out.values.resize(grid.n_q, grid.n_p);
  for (int j = 0; j < grid.n_p; ++j) {
    const double p = grid.p(j);
    for (int i = 0; i < grid.n_q; ++i) {
      const double q = grid.q(i);
      out.values(i, j) =
          std::exp(-beta * (0.5 * p * p + 0.5 * omega0 * omega0 * q * q));
    }
  }
  out.values /= out.values.sum() * grid.dq() * grid.dp();
  return out;
}

FieldTrajectory evolve_field(const FPOperator& op, const PhaseSpaceField& f0,
                             double t_max, double dt, int store_stride) {
  if (!(dt > 0.0) || !(t_max >= 0.0))
    throw DomainError("need dt > 0 and t_max >= 0");
  if (store_stride < 1) throw DomainError("store_stride must be positive");
  const Stencil s = make_stencil(op, f0.grid);

  // Parabolic bound from the largest diffusion eigenvalue, advective bound
  // from the largest drift speed on the grid corners.
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s.D);
  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  const double h2 = std::min(s.hq * s.hq, s.hp * s.hp);
  double bound = std::numeric_limits<double>::infinity();
  if (rho > 0.0) bound = h2 / (2.0 * rho);
  const double vq = max_abs_drift_on_corners(s.drift.q, f0.grid);
  const double vp = max_abs_drift_on_corners(s.drift.p, f0.grid);
  if (vq > 0.0) bound = std::min(bound, s.hq / vq);
  if (vp > 0.0) bound = std::min(bound, s.hp / vp);
  if (dt > bound) {
    std::ostringstream msg;
    msg << "dt " << dt << " exceeds the stable step " << bound
        << " for this grid and operator";
    throw CFLViolation(msg.str());
  }

  const long n_steps = std::llround(t_max / dt);
  FieldTrajectory traj;
  Eigen::MatrixXd f = f0.values;
  traj.times.push_back(0.0);
  traj.fields.push_back({f0.grid, f0.a, f});

  const double cell = s.hq * s.hp;
  const double mass0 = f.sum() * cell;
  const double mass_floor = std::max(std::abs(mass0), 1e-300);

  Eigen::MatrixXd k1(s.nq, s.np), k2(s.nq, s.np), k3(s.nq, s.np),
      k4(s.nq, s.np), stage(s.nq, s.np);
  for (long step = 1; step <= n_steps; ++step) {
    s.apply(f, k1);
    stage = f + (0.5 * dt) * k1;
    s.apply(stage, k2);
    stage = f + (0.5 * dt) * k2;
    s.apply(stage, k3);
    stage = f + dt * k3;
    s.apply(stage, k4);
    f += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!f.allFinite())
      throw UnstableStep("field lost finiteness during the step");
    const double peak = f.cwiseAbs().maxCoeff();
    if (boundary_max(f) > 1e-6 * peak)
      throw BoundaryLeak(
          "field reached the reflecting walls; enlarge the grid extents");
    if (std::abs(f.sum() * cell - mass0) > 1e-6 * mass_floor)
      throw BoundaryLeak("mass drifted by more than 1e-6 of the initial");

    if (step % store_stride == 0 || step == n_steps) {
      traj.times.push_back(step * dt);
      traj.fields.push_back({f0.grid, f0.a, f});
    }
  }
  return traj;
}

double stationarity_residual(const FPOperator& op,
                             const PhaseSpaceField& field) {
  const Stencil s = make_stencil(op, field.grid);
  const double norm = field.values.cwiseAbs().sum();
  if (norm == 0.0) throw DomainError("field is identically zero");
  Eigen::MatrixXd lf(s.nq, s.np);
  s.apply(field.values, lf);
  return lf.cwiseAbs().sum() / norm;
}

MomentData moments(const FPOperator& op) {
  const DriftData d = probe_drift(op);
  MomentData out;
  // d<q>/dt = -<A_q>, so the ODE matrix is the negated drift Jacobian.
  out.drift << -d.q.cq, -d.q.cp, -d.p.cq, -d.p.cp;
  out.offset << -d.q.c0, -d.p.c0;
  out.diffusion = op.diffusion;

  const double tr = out.drift.trace();
  const double det = out.drift.determinant();
  if (!(tr < 0.0) || !(det > 0.0))
    throw NonHurwitzDrift(
        "drift matrix has no strictly stable spectrum; no stationary "
        "covariance exists");

  // Lyapunov equation G S + S G^T + 2 D = 0 on the symmetric unknowns.
  const Eigen::Matrix2d& G = out.drift;
  Eigen::Matrix3d A;
  A << 2.0 * G(0, 0), 2.0 * G(0, 1), 0.0,
       G(1, 0), G(0, 0) + G(1, 1), G(0, 1),
       0.0, 2.0 * G(1, 0), 2.0 * G(1, 1);
  Eigen::Vector3d rhs(-2.0 * out.diffusion(0, 0), -2.0 * out.diffusion(0, 1),
                      -2.0 * out.diffusion(1, 1));
  const Eigen::Vector3d sv = A.fullPivLu().solve(rhs);
  out.stationary_covariance << sv(0), sv(1), sv(1), sv(2);
  return out;
}

namespace {

// q = sq x1, p = sp x2 with sq sp = 2 hbar, the cell Jacobian.
void rescale_factors(double hbar, double omega0, double& sq, double& sp) {
  if (!(hbar > 0.0) || !(omega0 > 0.0))
    throw DomainError("coherent rescaling needs hbar > 0 and omega0 > 0");
  sq = std::sqrt(2.0 * hbar / omega0);
  sp = std::sqrt(2.0 * hbar * omega0);
}

FPOperator map_operator(const FPOperator& op, double sq, double sp) {
  FPOperator out;
  out.variant = op.variant;
  out.renorm_factor = op.renorm_factor;
  auto aq = op.drift_q;
  auto ap = op.drift_p;
  out.drift_q = [aq, sq, sp](double x1, double x2) {
    return aq(sq * x1, sp * x2) / sq;
  };
  out.drift_p = [ap, sq, sp](double x1, double x2) {
    return ap(sq * x1, sp * x2) / sp;
  };
  out.diffusion(0, 0) = op.diffusion(0, 0) / (sq * sq);
  out.diffusion(0, 1) = op.diffusion(0, 1) / (sq * sp);
  out.diffusion(1, 0) = out.diffusion(0, 1);
  out.diffusion(1, 1) = op.diffusion(1, 1) / (sp * sp);
  return out;
}

PhaseSpaceField map_field(const PhaseSpaceField& field, double sq,
                          double sp) {
  PhaseSpaceField out;
  out.grid = field.grid;
  out.grid.q_min = field.grid.q_min / sq;
  out.grid.q_max = field.grid.q_max / sq;
  out.grid.p_min = field.grid.p_min / sp;
  out.grid.p_max = field.grid.p_max / sp;
  out.a = field.a;
  out.values = field.values * (sq * sp);
  return out;
}

}  // namespace

FPOperator coherent_rescale(const FPOperator& op, double hbar,
                            double omega0) {
  double sq, sp;
  rescale_factors(hbar, omega0, sq, sp);
  return map_operator(op, sq, sp);
}

PhaseSpaceField coherent_rescale(const PhaseSpaceField& field, double hbar,
                                 double omega0) {
  double sq, sp;
  rescale_factors(hbar, omega0, sq, sp);
  return map_field(field, sq, sp);
}

FPOperator coherent_unrescale(const FPOperator& op, double hbar,
                              double omega0) {
  double sq, sp;
  rescale_factors(hbar, omega0, sq, sp);
  return map_operator(op, 1.0 / sq, 1.0 / sp);
}

PhaseSpaceField coherent_unrescale(const PhaseSpaceField& field, double hbar,
                                   double omega0) {
  double sq, sp;
  rescale_factors(hbar, omega0, sq, sp);
  return map_field(field, 1.0 / sq, 1.0 / sp);
}

}  // namespace mk::fpde
