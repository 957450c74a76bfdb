#include <doctest.h>

#include <cmath>
#include <complex>

#include "mk/fock.hpp"

using namespace mk::fock;

TEST_CASE("lowering operator matches the defining matrix elements") {
  const FockBasis basis{3, 1.0, 1.0};
  const auto [a, adag] = ladder_operators(basis);
  CHECK(a(0, 1).real() == doctest::Approx(1.0));
  CHECK(a(1, 2).real() == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::abs(a(0, 0)) == 0.0);
  CHECK(std::abs(a(2, 2)) == 0.0);
  CHECK(std::abs(a(1, 0)) == 0.0);
  CHECK((adag - a.adjoint()).norm() == 0.0);

  Eigen::VectorXcd ground = Eigen::VectorXcd::Zero(3);
  ground(0) = 1.0;
  CHECK((a * ground).norm() == 0.0);
}

TEST_CASE("ladder commutator is the identity away from the truncation edge") {
  const FockBasis basis{20, 1.0, 1.0};
  const auto [a, adag] = ladder_operators(basis);
  const Matrix comm = a * adag - adag * a;
  for (int i = 0; i < 19; ++i) CHECK(comm(i, i).real() == doctest::Approx(1.0));
  CHECK(comm(19, 19).real() == doctest::Approx(1.0 - 20.0));
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      if (i != j) CHECK(std::abs(comm(i, j)) == 0.0);
}

TEST_CASE("position and momentum are Hermitian with canonical commutator") {
  const FockBasis basis{30, 0.7, 1.3};
  const auto [q, p] = position_momentum(basis);
  CHECK((q - q.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

  const Matrix comm = q * p - p * q;
  const std::complex<double> target(0.0, basis.hbar);
  for (int i = 0; i < 28; ++i) CHECK(std::abs(comm(i, i) - target) < 1e-12);
}

TEST_CASE("vacuum position variance carries hbar over two omega") {
  const FockBasis basis{10, 1.0, 1.0};
  const auto [q, p] = position_momentum(basis);
  const Matrix q2 = q * q;
  CHECK(q2(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
  const Matrix p2 = p * p;
  CHECK(p2(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("hamiltonian is the scaled number operator") {
  const FockBasis basis{3, 1.0, 2.0};
  const Matrix h = system_hamiltonian(basis);
  CHECK(h(0, 0).real() == 0.0);
  CHECK(h(1, 1).real() == doctest::Approx(2.0));
  CHECK(h(2, 2).real() == doctest::Approx(4.0));

  const FockBasis b10{10, 0.5, 1.7};
  const auto [a, adag] = ladder_operators(b10);
  const Matrix diff =
      system_hamiltonian(b10) - b10.hbar * b10.omega0 * (adag * a);
  CHECK(diff.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("thermal state reduces to the ground state at low temperature") {
  const FockBasis basis{5, 1.0, 1.0};
  const DensityMatrix rho = thermal_state(basis, 50.0);
  CHECK(std::abs(rho.rho(0, 0) - 1.0) < 1e-12);
  for (int n = 1; n < 5; ++n) CHECK(std::abs(rho.rho(n, n)) < 1e-12);
}

TEST_CASE("thermal occupancy matches the Bose function") {
  const FockBasis basis{60, 1.0, 1.0};
  const DensityMatrix rho = thermal_state(basis, 1.0);
  CHECK(mean_occupancy(rho) ==
        doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-10));
  const auto check = check_density(rho);
  CHECK(check.ok);

  // Small hbar: action-scaled occupancy approaches the classical 1/(beta w).
  const FockBasis wide{300, 0.1, 1.0};
  const DensityMatrix rho2 = thermal_state(wide, 1.0);
  CHECK(wide.hbar * mean_occupancy(rho2) ==
        doctest::Approx(0.1 / (std::exp(0.1) - 1.0)).epsilon(1e-9));
}

TEST_CASE("insufficient truncation for the requested temperature throws") {
  // At beta hbar omega0 = 0.1 the tail bound demands roughly dim > 276.
  const FockBasis basis{200, 0.1, 1.0};
  CHECK_THROWS_AS(thermal_state(basis, 1.0), mk::TruncationTooSmall);
}

TEST_CASE("basis validation rejects nonphysical parameters") {
  CHECK_THROWS_AS(ladder_operators(FockBasis{1, 1.0, 1.0}), mk::DomainError);
  CHECK_THROWS_AS(ladder_operators(FockBasis{4, 0.0, 1.0}), mk::DomainError);
  CHECK_THROWS_AS(ladder_operators(FockBasis{4, 1.0, -1.0}), mk::DomainError);
}

TEST_CASE("density check flags violations") {
  const FockBasis basis{4, 1.0, 1.0};
  DensityMatrix bad{basis, Matrix::Zero(4, 4)};
  bad.rho(0, 0) = 0.9;  // trace 0.9
  const auto c = check_density(bad);
  CHECK_FALSE(c.ok);
  CHECK(c.trace_defect == doctest::Approx(0.1));
}
