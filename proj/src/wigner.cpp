// Generalized phase-space transforms: characteristic functions on the
// Fourier side, ordering-kernel division, and exactly invertible discrete
// transform pairs between the two sides.
#include "mk/wigner.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <sstream>

namespace mk::wigner {

namespace {

using std::complex;
using VectorXcd = Eigen::VectorXcd;

const complex<double> kI(0.0, 1.0);

// out_j = sum_k in_k exp(sign i f_k x_j) for f_k = f0 + k df, x_j = x0 + j dx.
// Requires df dx = 2 pi / n, which dual_grid guarantees; the residual phases
// factor into one twiddle per side of a plain FFT.
VectorXcd axis_transform(const VectorXcd& in, double x0, double dx, double f0,
                         double df, int sign, Eigen::FFT<double>& fft) {
  const int n = static_cast<int>(in.size());
  VectorXcd tmp(n);
  for (int k = 0; k < n; ++k)
    tmp[k] = in[k] * std::exp(kI * (sign * df * x0 * k));
  VectorXcd out(n);
  if (sign < 0) {
    fft.fwd(out, tmp);
  } else {
    fft.inv(out, tmp);
    out *= static_cast<double>(n);
  }
  for (int j = 0; j < n; ++j)
    out[j] *= std::exp(kI * (sign * f0 * (x0 + j * dx)));
  return out;
}

// 2-D version over values(k_eta, k_xi) -> out(j_q, j_p) when sign = -1 and
// the reverse assignment of grids when sign = +1.
Eigen::MatrixXcd grid_transform(const Eigen::MatrixXcd& in,
                                const PhaseGrid& out_grid,
                                const PhaseGrid& in_grid, int sign) {
  Eigen::FFT<double> fft;
  Eigen::MatrixXcd work = in;
  for (int c = 0; c < work.cols(); ++c)
    work.col(c) = axis_transform(work.col(c), out_grid.q_min, out_grid.dq(),
                                 in_grid.q_min, in_grid.dq(), sign, fft);
  for (int r = 0; r < work.rows(); ++r)
    work.row(r) = axis_transform(work.row(r).transpose(), out_grid.p_min,
                                 out_grid.dp(), in_grid.p_min, in_grid.dp(),
                                 sign, fft)
                      .transpose();
  return work;
}

double boundary_max(const Eigen::MatrixXd& m) {
  return std::max({m.row(0).cwiseAbs().maxCoeff(),
                   m.row(m.rows() - 1).cwiseAbs().maxCoeff(),
                   m.col(0).cwiseAbs().maxCoeff(),
                   m.col(m.cols() - 1).cwiseAbs().maxCoeff()});
}

double boundary_max(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXd a = m.cwiseAbs();
  return boundary_max(a);
}

// Fills <m|D(z)|n> for the untruncated displacement, walking each diagonal
// m - n = const with the degree recurrence of the associated polynomials.
// Along a diagonal the wanted solution is first dominant, then oscillatory,
// never receding, so the recurrence keeps near-full relative accuracy where
// a two-index ladder recurrence cancels catastrophically (|z|^2 comparable
// to the dimension). Extended precision buys the rest of the margin.
void displacement_fill(Matrix& disp, complex<double> z_in) {
  using Cl = complex<long double>;
  const int d = static_cast<int>(disp.rows());
  const Cl z(z_in.real(), z_in.imag());
  const long double x = std::norm(z);
  const long double damp = std::exp(-0.5L * x);
  Cl zlow(1.0L, 0.0L);   // z^alpha
  Cl zupp(1.0L, 0.0L);   // (-conj z)^alpha
  long double s0 = 1.0L; // 1/sqrt(alpha!)
  for (int alpha = 0; alpha < d; ++alpha) {
    if (alpha > 0) {
      zlow *= z;
      zupp *= -std::conj(z);
      s0 /= std::sqrt(static_cast<long double>(alpha));
    }
    long double lprev = 0.0L;  // degree n - 1
    long double lcur = 1.0L;   // degree n
    long double s = s0;        // sqrt(n!/(n+alpha)!)
    for (int n = 0; n + alpha < d; ++n) {
      if (n > 0) {
        const long double lnext = ((2.0L * n - 1.0L + alpha - x) * lcur -
                                   (n - 1.0L + alpha) * lprev) /
                                  static_cast<long double>(n);
        lprev = lcur;
        lcur = lnext;
        s *= std::sqrt(static_cast<long double>(n) / (n + alpha));
      }
      const long double base = s * damp * lcur;
      const Cl lower = zlow * base;
      disp(n + alpha, n) = complex<double>(static_cast<double>(lower.real()),
                                           static_cast<double>(lower.imag()));
      if (alpha > 0) {
        const Cl upper = zupp * base;
        disp(n, n + alpha) = complex<double>(static_cast<double>(upper.real()),
                                             static_cast<double>(upper.imag()));
      }
    }
  }
}

void require_even_exponent(const OrderingKernel& kernel,
                           const PhaseGrid& sigma) {
  if (!kernel.chi) throw DomainError("ordering kernel has no exponent");
  const double pts[3][2] = {{sigma.q_min, sigma.p_min},
                            {sigma.q_min / 3.0, -sigma.p_min / 2.0},
                            {1.0, 1.0}};
  for (const auto& pt : pts) {
    const double fwd = kernel.chi(pt[0], pt[1]);
    const double rev = kernel.chi(-pt[0], -pt[1]);
    if (std::abs(fwd - rev) > 1e-12 * std::max(1.0, std::abs(fwd)))
      throw DomainError("ordering kernel exponent must be even in sigma");
  }
  if (std::abs(kernel.chi(0.0, 0.0)) > 1e-14)
    throw DomainError("ordering kernel must be 1 at sigma = 0");
}

}  // namespace

OrderingKernel ordering_kernel(double a, double omega0, double hbar) {
  if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");
  if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
  OrderingKernel kernel;
  kernel.a = a;
  kernel.omega0 = omega0;
  kernel.hbar = hbar;
  kernel.chi = [a, omega0, hbar](double eta, double xi) {
    return a * (hbar / 4.0) * (eta * eta / omega0 + omega0 * xi * xi);
  };
  return kernel;
}

void PhaseGrid::validate() const {
  if (n_q < 2 || n_p < 2 || n_q % 2 != 0 || n_p % 2 != 0)
    throw DomainError("grid sizes must be positive and even");
  if (!(q_max > q_min) || !(p_max > p_min))
    throw DomainError("grid extents must be ordered");
  if (!std::isfinite(q_min) || !std::isfinite(q_max) ||
      !std::isfinite(p_min) || !std::isfinite(p_max))
    throw DomainError("grid extents must be finite");
}

PhaseGrid dual_grid(const PhaseGrid& grid) {
  grid.validate();
  const double deta = 2.0 * M_PI / (grid.n_q * grid.dq());
  const double dxi = 2.0 * M_PI / (grid.n_p * grid.dp());
  PhaseGrid dual;
  dual.n_q = grid.n_q;
  dual.n_p = grid.n_p;
  dual.q_min = -0.5 * grid.n_q * deta;
  dual.q_max = 0.5 * grid.n_q * deta;
  dual.p_min = -0.5 * grid.n_p * dxi;
  dual.p_max = 0.5 * grid.n_p * dxi;
  return dual;
}

double PhaseSpaceField::integral() const {
  return values.sum() * grid.dq() * grid.dp();
}

Matrix displacement_operator(const fock::FockBasis& basis,
                             std::complex<double> z) {
  basis.validate();
  Matrix disp(basis.dim, basis.dim);
  displacement_fill(disp, z);
  return disp;
}

Eigen::MatrixXcd characteristic_function(const fock::DensityMatrix& rho,
                                         const PhaseGrid& sigma_grid) {
  sigma_grid.validate();
  rho.basis.validate();
  const double hbar = rho.basis.hbar;
  const double w = rho.basis.omega0;

  // The dual window pi/d_sigma is the phase-space extent the sampling can
  // represent; it must cover the state's occupancy-based radius.
  const double n_eff = std::max(0.0, fock::mean_occupancy(rho)) + 1.0;
  const double sigma_q = std::sqrt(hbar * (2.0 * n_eff + 1.0) / (2.0 * w));
  const double sigma_p = std::sqrt(hbar * w * (2.0 * n_eff + 1.0) / 2.0);
  const double window_q = M_PI / sigma_grid.dq();
  const double window_p = M_PI / sigma_grid.dp();
  if (window_q < 5.0 * sigma_q || window_p < 5.0 * sigma_p) {
    std::ostringstream msg;
    msg << "sigma spacing cannot resolve a state of occupancy "
        << (n_eff - 1.0) << ": dual window (" << window_q << ", " << window_p
        << ") vs required (" << 5.0 * sigma_q << ", " << 5.0 * sigma_p << ")";
    throw GridUnderResolved(msg.str());
  }

  const double cq = std::sqrt(hbar / (2.0 * w));
  const double cp = std::sqrt(hbar * w / 2.0);
  const int d = rho.basis.dim;
  const Matrix rho_t = rho.rho.transpose();

  Eigen::MatrixXcd out(sigma_grid.n_q, sigma_grid.n_p);
  Matrix disp(d, d);
  for (int k = 0; k < sigma_grid.n_q; ++k) {
    const double eta = sigma_grid.q(k);
    for (int l = 0; l < sigma_grid.n_p; ++l) {
      const double xi = sigma_grid.p(l);
      const complex<double> z = kI * complex<double>(cq * eta, cp * xi);
      displacement_fill(disp, z);
      out(k, l) = (rho_t.array() * disp.array()).sum();
    }
  }

  // The extent check is post-hoc: the samples themselves must have decayed
  // at the boundary, otherwise any transform of them aliases.
  if (boundary_max(out) > 1e-8 * out.cwiseAbs().maxCoeff())
    throw GridUnderResolved(
        "characteristic function has not decayed at the sigma boundary; "
        "extend the sigma grid");
  return out;
}

PhaseSpaceField generalized_wigner(const fock::DensityMatrix& rho,
                                   const OrderingKernel& kernel,
                                   const PhaseGrid& grid) {
  grid.validate();
  const PhaseGrid sigma = dual_grid(grid);
  require_even_exponent(kernel, sigma);

  Eigen::MatrixXcd f = characteristic_function(rho, sigma);
  for (int k = 0; k < sigma.n_q; ++k)
    for (int l = 0; l < sigma.n_p; ++l)
      f(k, l) *= std::exp(-kernel.chi(sigma.q(k), sigma.p(l)));

  const double peak = f.cwiseAbs().maxCoeff();
  if (boundary_max(f) > 1e-8 * peak) {
    std::ostringstream msg;
    msg << "division by the ordering kernel leaves a non-decaying transform "
           "(boundary "
        << boundary_max(f) << " vs peak " << peak << " at a = " << kernel.a
        << ")";
    throw KernelDivergence(msg.str());
  }

  Eigen::MatrixXcd w = grid_transform(f, grid, sigma, -1);
  const double measure =
      sigma.dq() * sigma.dp() / (4.0 * M_PI * M_PI);
  w *= measure;

  const double re_max = w.real().cwiseAbs().maxCoeff();
  const double im_max = w.imag().cwiseAbs().maxCoeff();
  if (im_max > 1e-10 * re_max)
    throw GridUnderResolved(
        "transformed field has a non-negligible imaginary part; enlarge the "
        "grid");

  PhaseSpaceField field;
  field.grid = grid;
  field.a = kernel.a;
  field.values = w.real();
  if (boundary_max(field.values) > 1e-10 * re_max)
    throw GridUnderResolved(
        "field does not decay at the phase grid boundary; enlarge the "
        "extents");
  return field;
}

fock::DensityMatrix inverse_transform(const PhaseSpaceField& field,
                                      const OrderingKernel& kernel,
                                      const fock::FockBasis& basis) {
  basis.validate();
  field.grid.validate();
  if (field.values.rows() != field.grid.n_q ||
      field.values.cols() != field.grid.n_p)
    throw DomainError("field values do not match the grid dimensions");
  const PhaseGrid sigma = dual_grid(field.grid);
  require_even_exponent(kernel, sigma);

  const double field_peak = field.values.cwiseAbs().maxCoeff();
  if (boundary_max(field.values) > 1e-10 * field_peak)
    throw GridUnderResolved(
        "field does not decay at the phase grid boundary; the transform "
        "would alias");

  Eigen::MatrixXcd chi =
      grid_transform(field.values.cast<complex<double>>(), sigma, field.grid,
                     +1);
  chi *= field.grid.dq() * field.grid.dp();
  for (int k = 0; k < sigma.n_q; ++k)
    for (int l = 0; l < sigma.n_p; ++l)
      chi(k, l) *= std::exp(kernel.chi(sigma.q(k), sigma.p(l)));

  if (boundary_max(chi) > 1e-4 * chi.cwiseAbs().maxCoeff())
    throw GridUnderResolved(
        "reconstructed transform does not decay at the sigma boundary");

  const double hbar = basis.hbar;
  const double w = basis.omega0;
  const double cq = std::sqrt(hbar / (2.0 * w));
  const double cp = std::sqrt(hbar * w / 2.0);
  const int d = basis.dim;
  const double measure = hbar * sigma.dq() * sigma.dp() / (2.0 * M_PI);

  Matrix rho = Matrix::Zero(d, d);
  Matrix disp(d, d);
  for (int k = 0; k < sigma.n_q; ++k) {
    const double eta = sigma.q(k);
    for (int l = 0; l < sigma.n_p; ++l) {
      const double xi = sigma.p(l);
      const complex<double> z = kI * complex<double>(cq * eta, cp * xi);
      displacement_fill(disp, z);
      rho.noalias() += (measure * chi(k, l)) * disp.adjoint();
    }
  }
  rho = 0.5 * (rho + rho.adjoint().eval());
  return {basis, rho};
}

PhaseSpaceField PsiCorrection::apply(const PhaseSpaceField& field) const {
  field.grid.validate();
  const double pref = -0.25 * a * hbar;
  const int nq = field.grid.n_q;
  const int np = field.grid.n_p;
  const double inv_dq2 = 1.0 / (field.grid.dq() * field.grid.dq());
  const double inv_dp2 = 1.0 / (field.grid.dp() * field.grid.dp());

  PhaseSpaceField out;
  out.grid = field.grid;
  out.a = field.a;
  out.values = Eigen::MatrixXd::Zero(nq, np);
  if (pref == 0.0) return out;

  const Eigen::MatrixXd& v = field.values;
  for (int i = 0; i < nq; ++i) {
    for (int j = 0; j < np; ++j) {
      const double up = i + 1 < nq ? v(i + 1, j) : 0.0;
      const double dn = i > 0 ? v(i - 1, j) : 0.0;
      const double rt = j + 1 < np ? v(i, j + 1) : 0.0;
      const double lf = j > 0 ? v(i, j - 1) : 0.0;
      const double d2q = (up - 2.0 * v(i, j) + dn) * inv_dq2;
      const double d2p = (rt - 2.0 * v(i, j) + lf) * inv_dp2;
      out.values(i, j) = pref * (c_qq * d2q + c_pp * d2p);
    }
  }
  return out;
}

PsiCorrection psi_correction(const OrderingKernel& kernel) {
  if (!kernel.chi) throw NonQuadraticKernel("ordering kernel has no exponent");
  const double a_coef = kernel.chi(1.0, 0.0);
  const double b_coef = kernel.chi(0.0, 1.0);
  const double scale = std::max(1.0, std::abs(a_coef) + std::abs(b_coef));
  const double probes[5][2] = {
      {2.0, 0.0}, {0.0, 2.0}, {1.0, 1.0}, {1.5, 0.5}, {-2.0, 1.0}};
  for (const auto& pt : probes) {
    const double expect =
        a_coef * pt[0] * pt[0] + b_coef * pt[1] * pt[1];
    if (std::abs(kernel.chi(pt[0], pt[1]) - expect) > 1e-10 * scale)
      throw NonQuadraticKernel(
          "kernel exponent is not a diagonal quadratic in (eta, xi)");
  }
  if (std::abs(kernel.chi(0.0, 0.0)) > 1e-14)
    throw NonQuadraticKernel("kernel exponent must vanish at sigma = 0");

  PsiCorrection corr;
  corr.a = kernel.a;
  corr.hbar = kernel.hbar;
  if (kernel.a != 0.0) {
    corr.c_qq = 4.0 * a_coef / (kernel.a * kernel.hbar);
    corr.c_pp = 4.0 * b_coef / (kernel.a * kernel.hbar);
  } else {
    corr.c_qq = 1.0 / kernel.omega0;
    corr.c_pp = kernel.omega0;
  }
  return corr;
}

}  // namespace mk::wigner
