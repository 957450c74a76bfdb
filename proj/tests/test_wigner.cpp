#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "mk/fock.hpp"
#include "mk/lindblad.hpp"
#include "mk/wigner.hpp"

using namespace mk;
using namespace mk::wigner;
using std::complex;

namespace {

PhaseGrid square_grid(double half_width, int n) {
  PhaseGrid g;
  g.q_min = g.p_min = -half_width;
  g.q_max = g.p_max = half_width;
  g.n_q = g.n_p = n;
  return g;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

// A hot thermal state transforms to a quickly decaying gaussian in sigma,
// which leaves room between the decay floor and the truncation-tail ripple
// that the normal-leaning kernel amplifies at the sigma corners. The extra
// basis levels past the population cutoff push that ripple well below the
// divergence guard.
fock::DensityMatrix hot_state() {
  return fock::thermal_state({72, 1.0, 1.0}, 0.5);
}

// Normalized oscillator eigenfunctions by upward recurrence.
std::vector<double> eigenfunctions(int count, double q, double omega0,
                                   double hbar) {
  const double x = std::sqrt(omega0 / hbar) * q;
  const double norm = std::pow(omega0 / (M_PI * hbar), 0.25);
  std::vector<double> psi(count);
  psi[0] = norm * std::exp(-0.5 * x * x);
  if (count > 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int n = 1; n + 1 < count; ++n)
    psi[n + 1] = std::sqrt(2.0 / (n + 1.0)) * x * psi[n] -
                 std::sqrt(n / (n + 1.0)) * psi[n - 1];
  return psi;
}

}  // namespace

TEST_CASE("ordering kernel family basics") {
  const auto kernel = ordering_kernel(1.0, 2.0, 0.5);
  CHECK(kernel.chi(0.0, 0.0) == 0.0);
  CHECK(kernel.chi(1.0, 0.0) == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(kernel.chi(0.0, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(kernel.chi(1.3, -0.4) ==
        doctest::Approx(kernel.chi(-1.3, 0.4)).epsilon(1e-14));

  const auto weyl = ordering_kernel(0.0, 2.0, 0.5);
  CHECK(weyl.chi(3.0, -1.0) == 0.0);

  CHECK_THROWS_AS(ordering_kernel(1.0, -2.0, 0.5), DomainError);
}

TEST_CASE("phase grid validation and transform duality") {
  PhaseGrid bad = square_grid(5.0, 31);
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = square_grid(5.0, 32);
  bad.q_max = bad.q_min;
  CHECK_THROWS_AS(bad.validate(), DomainError);

  const PhaseGrid g = square_grid(8.0, 64);
  const PhaseGrid dual = dual_grid(g);
  CHECK(dual.dq() * g.dq() * g.n_q == doctest::Approx(2.0 * M_PI));
  CHECK(dual.q(dual.n_q / 2) == 0.0);  // zero frequency on a node

  const PhaseGrid twice = dual_grid(dual);
  CHECK(twice.q_min == doctest::Approx(g.q_min).epsilon(1e-14));
  CHECK(twice.dq() == doctest::Approx(g.dq()).epsilon(1e-14));
}

TEST_CASE("displacement matrix elements match the closed form") {
  const fock::FockBasis basis{8, 1.0, 1.0};
  const complex<double> z(0.7, 0.2);
  const Matrix d = displacement_operator(basis, z);

  CHECK(d(3, 1).real() ==
        doctest::Approx(0.34813349021386230).epsilon(1e-13));
  CHECK(d(3, 1).imag() ==
        doctest::Approx(0.21661639391084765).epsilon(1e-13));
  CHECK(d(4, 1).real() ==
        doctest::Approx(0.14074584420148649).epsilon(1e-13));
  CHECK(d(4, 1).imag() ==
        doctest::Approx(0.15541819089430554).epsilon(1e-13));
  CHECK(d(2, 2).real() ==
        doctest::Approx(0.061721718675557591).epsilon(1e-13));
  CHECK(d(2, 2).imag() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d(0, 0).real() == doctest::Approx(std::exp(-0.265)).epsilon(1e-14));
}

TEST_CASE("displacement matrix agrees with the exponential map") {
  const fock::FockBasis basis{24, 1.0, 1.0};
  const complex<double> z(0.7, 0.2);
  const auto [a, ad] = fock::ladder_operators(basis);
  const Matrix gen = z * ad - std::conj(z) * a;
  const Matrix viaexp = gen.exp();
  const Matrix direct = displacement_operator(basis, z);
  // Compare away from the truncation edge, where both agree with the full
  // operator.
  CHECK(max_abs(viaexp.topLeftCorner(10, 10) -
                direct.topLeftCorner(10, 10)) < 1e-12);

  // Unitarity on the represented block, up to the column tails cut off by
  // the truncation.
  const Matrix product = direct.adjoint() * direct;
  CHECK(max_abs(product.topLeftCorner(10, 10) -
                Matrix::Identity(10, 10)) < 1e-10);
}

TEST_CASE("characteristic function of the vacuum is a gaussian") {
  const fock::FockBasis basis{8, 1.0, 1.0};
  Matrix rho = Matrix::Zero(8, 8);
  rho(0, 0) = 1.0;

  PhaseGrid sigma = square_grid(12.566370614359172, 64);
  const auto chi = characteristic_function({basis, rho}, sigma);
  double worst = 0.0;
  for (int k = 0; k < sigma.n_q; ++k)
    for (int l = 0; l < sigma.n_p; ++l) {
      const double eta = sigma.q(k);
      const double xi = sigma.p(l);
      const double expect = std::exp(-0.25 * (eta * eta + xi * xi));
      worst = std::max(worst, std::abs(chi(k, l) - expect));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("characteristic function is one at the origin and conjugate-even") {
  const fock::FockBasis basis{30, 1.0, 1.0};
  const auto rho = fock::thermal_state(basis, 1.0);
  const PhaseGrid sigma = square_grid(16.0, 128);
  const auto chi = characteristic_function(rho, sigma);

  CHECK(std::abs(chi(64, 64) - 1.0) < 1e-12);  // sigma = 0 node

  double worst = 0.0;
  for (int k = 1; k < sigma.n_q; ++k)
    for (int l = 1; l < sigma.n_p; ++l)
      worst = std::max(worst, std::abs(chi(sigma.n_q - k, sigma.n_p - l) -
                                       std::conj(chi(k, l))));
  CHECK(worst < 1e-12);
}

TEST_CASE("under-resolved sigma grids are rejected") {
  const fock::FockBasis basis{8, 1.0, 1.0};
  Matrix rho = Matrix::Zero(8, 8);
  rho(0, 0) = 1.0;

  // Spacing too coarse: the dual window cannot hold the state.
  PhaseGrid coarse = square_grid(8.0, 16);
  CHECK_THROWS_AS(characteristic_function({basis, rho}, coarse),
                  GridUnderResolved);

  // Spacing fine but the window too short: samples have not decayed.
  PhaseGrid narrow = square_grid(4.0, 16);
  CHECK_THROWS_AS(characteristic_function({basis, rho}, narrow),
                  GridUnderResolved);
}

TEST_CASE("symmetric transform of the vacuum is the known gaussian") {
  const fock::FockBasis basis{8, 1.0, 1.0};
  Matrix rho = Matrix::Zero(8, 8);
  rho(0, 0) = 1.0;
  const auto kernel = ordering_kernel(0.0, 1.0, 1.0);
  const PhaseGrid grid = square_grid(8.0, 128);

  const auto field = generalized_wigner({basis, rho}, kernel, grid);
  double worst = 0.0;
  for (int i = 0; i < grid.n_q; ++i)
    for (int j = 0; j < grid.n_p; ++j) {
      const double q = grid.q(i);
      const double p = grid.p(j);
      const double expect = std::exp(-(q * q + p * p)) / M_PI;
      worst = std::max(worst, std::abs(field.values(i, j) - expect));
    }
  CHECK(worst < 1e-12);
  CHECK(field.a == 0.0);
}

TEST_CASE("fields are unit-normalized for every ordering") {
  const auto rho = hot_state();
  const PhaseGrid grid = square_grid(18.85, 64);
  for (const double a : {-1.0, 0.0, 1.0}) {
    const auto kernel = ordering_kernel(a, 1.0, 1.0);
    const auto field = generalized_wigner(rho, kernel, grid);
    CHECK(field.integral() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("normal-ordered transform of the vacuum diverges") {
  const fock::FockBasis basis{8, 1.0, 1.0};
  Matrix rho = Matrix::Zero(8, 8);
  rho(0, 0) = 1.0;
  const auto kernel = ordering_kernel(-1.0, 1.0, 1.0);
  const PhaseGrid grid = square_grid(8.0, 128);
  CHECK_THROWS_AS(generalized_wigner({basis, rho}, kernel, grid),
                  KernelDivergence);
}

TEST_CASE("symmetric marginals reproduce the position density") {
  const fock::FockBasis basis{30, 1.0, 1.0};
  const auto rho = fock::thermal_state(basis, 1.0);
  const auto kernel = ordering_kernel(0.0, 1.0, 1.0);
  const PhaseGrid grid = square_grid(10.0, 128);
  const auto field = generalized_wigner(rho, kernel, grid);

  double worst = 0.0;
  for (int i = 0; i < grid.n_q; ++i) {
    const double marginal = field.values.row(i).sum() * grid.dp();
    const auto psi = eigenfunctions(basis.dim, grid.q(i), 1.0, 1.0);
    double density = 0.0;
    for (int n = 0; n < basis.dim; ++n)
      density += rho.rho(n, n).real() * psi[n] * psi[n];
    worst = std::max(worst, std::abs(marginal - density));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("transform round trips reproduce the state") {
  // Symmetric kernel on the vacuum.
  {
    const fock::FockBasis basis{16, 1.0, 1.0};
    Matrix rho = Matrix::Zero(16, 16);
    rho(0, 0) = 1.0;
    const auto kernel = ordering_kernel(0.0, 1.0, 1.0);
    const PhaseGrid grid = square_grid(8.0, 128);
    const auto field = generalized_wigner({basis, rho}, kernel, grid);
    const auto back = inverse_transform(field, kernel, basis);
    CHECK(lindblad::trace_norm(back.rho - rho) < 1e-10);
    CHECK(max_abs(Matrix(back.rho - back.rho.adjoint())) == 0.0);
  }
  // Normal-leaning kernel on a hot smooth state. The division amplifies the
  // sigma boundary, so the reach must sit between the decay floor and the
  // amplified ripple ceiling.
  {
    const auto rho = hot_state();
    const auto kernel = ordering_kernel(-1.0, 1.0, 1.0);
    const PhaseGrid grid = square_grid(18.85, 64);
    const auto field = generalized_wigner(rho, kernel, grid);
    const auto back = inverse_transform(field, kernel, rho.basis);
    CHECK(lindblad::trace_norm(back.rho - rho.rho) < 1e-9);
  }
  // Antinormal-leaning kernel: the inverse undoes the smoothing instead.
  {
    const auto rho = hot_state();
    const auto kernel = ordering_kernel(1.0, 1.0, 1.0);
    const PhaseGrid grid = square_grid(18.85, 64);
    const auto field = generalized_wigner(rho, kernel, grid);
    const auto back = inverse_transform(field, kernel, rho.basis);
    CHECK(lindblad::trace_norm(back.rho - rho.rho) < 1e-9);
  }
}

TEST_CASE("orderings are related by a gaussian filter") {
  // The finer step keeps the smoothing kernel's spectrum from aliasing into
  // the comparison; no amplifying division happens at these orderings.
  const auto rho = hot_state();
  const PhaseGrid grid = square_grid(19.5, 128);
  const auto w0 = generalized_wigner(rho, ordering_kernel(0.0, 1.0, 1.0), grid);
  const auto w1 = generalized_wigner(rho, ordering_kernel(1.0, 1.0, 1.0), grid);

  // Convolve the symmetric field with the analytic smoothing kernel.
  const double cq = 1.0 / std::sqrt(M_PI);  // hbar = omega0 = 1
  const double cp = 1.0 / std::sqrt(M_PI);
  Eigen::MatrixXd filtered = Eigen::MatrixXd::Zero(grid.n_q, grid.n_p);
  for (int i = 0; i < grid.n_q; ++i)
    for (int j = 0; j < grid.n_p; ++j) {
      double acc = 0.0;
      for (int k = 0; k < grid.n_q; ++k) {
        const double dq = grid.q(i) - grid.q(k);
        const double gq = cq * std::exp(-dq * dq);
        if (gq < 1e-18) continue;
        for (int l = 0; l < grid.n_p; ++l) {
          const double dp = grid.p(j) - grid.p(l);
          acc += w0.values(k, l) * gq * cp * std::exp(-dp * dp);
        }
      }
      filtered(i, j) = acc * grid.dq() * grid.dp();
    }
  CHECK(max_abs(filtered - w1.values) < 1e-10 * max_abs(w1.values));
}

TEST_CASE("ordering correction coefficients come from the kernel") {
  const auto corr = psi_correction(ordering_kernel(1.0, 2.0, 0.5));
  CHECK(corr.c_qq == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(corr.c_pp == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(corr.a == 1.0);
  CHECK(corr.hbar == 0.5);

  // The symmetric kernel produces the zero operator.
  const auto zero = psi_correction(ordering_kernel(0.0, 2.0, 0.5));
  PhaseSpaceField field;
  field.grid = square_grid(4.0, 16);
  field.a = 0.0;
  field.values = Eigen::MatrixXd::Random(16, 16);
  CHECK(max_abs(zero.apply(field).values) == 0.0);
}

TEST_CASE("non-quadratic kernel exponents are rejected") {
  auto quartic = ordering_kernel(1.0, 1.0, 1.0);
  quartic.chi = [](double eta, double xi) {
    return 0.1 * eta * eta * eta * eta + xi * xi;
  };
  CHECK_THROWS_AS(psi_correction(quartic), NonQuadraticKernel);

  auto crossed = ordering_kernel(1.0, 1.0, 1.0);
  crossed.chi = [](double eta, double xi) { return eta * xi; };
  CHECK_THROWS_AS(psi_correction(crossed), NonQuadraticKernel);
}

TEST_CASE("ordering correction converges at second order") {
  const auto corr = psi_correction(ordering_kernel(1.0, 1.0, 1.0));
  auto worst_error = [&](int n) {
    PhaseSpaceField field;
    field.grid = square_grid(10.0, n);
    field.values = Eigen::MatrixXd(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double q = field.grid.q(i);
        const double p = field.grid.p(j);
        field.values(i, j) = std::exp(-0.5 * (q * q + 2.0 * p * p));
      }
    const auto applied = corr.apply(field);
    double worst = 0.0;
    // Interior comparison; the stencil sees zeros beyond the boundary.
    for (int i = 1; i + 1 < n; ++i)
      for (int j = 1; j + 1 < n; ++j) {
        const double q = field.grid.q(i);
        const double p = field.grid.p(j);
        const double d2q = (q * q - 1.0) * field.values(i, j);
        const double d2p = (4.0 * p * p - 2.0) * field.values(i, j);
        const double expect = -0.25 * (corr.c_qq * d2q + corr.c_pp * d2p);
        worst = std::max(worst, std::abs(applied.values(i, j) - expect));
      }
    return worst;
  };
  const double coarse = worst_error(64);
  const double fine = worst_error(128);
  CHECK(coarse / fine > 3.5);
  CHECK(coarse / fine < 4.5);
}
