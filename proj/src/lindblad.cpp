// lindblad.cpp: generators, evolution, and stationary states on Fock space.
#include "mk/lindblad.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mk/quadrature.hpp"

namespace mk::lindblad {

namespace {

using std::complex;
const complex<double> kI(0.0, 1.0);

QuadratureOptions shift_quad() {
  QuadratureOptions opts;
  opts.rel_tol = 1e-12;
  opts.abs_tol = 1e-14;
  opts.max_intervals = 6000;
  return opts;
}

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

// Quantum spec with omega0 interior to the tabulated or analytic support.
void require_quantum_interior(const bath::BathSpec& spec, double omega0) {
  spec.validate();
  if (spec.domain != bath::Domain::positive)
    throw DomainError("generator needs a quantum spec (positive domain)");
  if (!(omega0 > 0.0) || !(omega0 < spec.omega_max))
    throw DomainError("omega0 must lie inside the spectral support");
}

// Thermal quantum number per unit action at inverse temperature beta.
double big_n(double beta, double hbar, double w) {
  return 1.0 / std::expm1(beta * hbar * w);
}

}  // namespace

// The +/- branches carry a simple pole at w = omega0; their sum telescopes to
// minus the frequency shift, which the secular average turns into the
// renormalized Hamiltonian prefactor.
std::pair<double, double> resonance_shifts(const bath::BathSpec& spec,
                                           double beta, double hbar,
                                           double omega0) {
  const auto opts = shift_quad();
  const double hi = spec.omega_max;
  auto coupling = [&spec](double w) { return spec.coupling_sq(w); };
  auto n_of = [beta, hbar](double w) { return big_n(beta, hbar, w); };

  const double j_plus =
      -integrate_pv([&](double w) { return coupling(w) * (n_of(w) + 1.0); },
                    omega0, 0.0, hi, opts) +
      integrate([&](double w) { return coupling(w) * n_of(w) / (omega0 + w); },
                0.0, hi, opts);
  const double j_minus =
      integrate_pv([&](double w) { return coupling(w) * n_of(w); }, omega0,
                   0.0, hi, opts) -
      integrate(
          [&](double w) { return coupling(w) * (n_of(w) + 1.0) / (w + omega0); },
          0.0, hi, opts);
  return {j_plus, j_minus};
}

namespace {

// Deterministic dense start vector for power and inverse iterations.
Matrix probe_matrix(int dim) {
  Matrix x(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k)
      x(j, k) = complex<double>(std::sin(1.0 + 0.7 * j + 0.3 * k),
                                std::cos(2.0 + 0.2 * j - 0.45 * k));
  return x;
}

double spectral_bound(const Superoperator& op) {
  Matrix x = probe_matrix(op.basis.dim);
  x /= x.norm();
  double bound = 0.0;
  for (int it = 0; it < 25; ++it) {
    Matrix y = op.apply(x);
    const double r = y.norm();
    if (r == 0.0) return bound;
    if (it >= 15) bound = std::max(bound, r);
    x = y / r;
  }
  return bound;
}

}  // namespace

Matrix Superoperator::apply(const Matrix& x) const {
  if (custom) return custom(x);
  Matrix y = Matrix::Zero(basis.dim, basis.dim);
  for (const auto& [left, right] : terms) y += left * x * right;
  return y;
}

Matrix Superoperator::dense() const {
  const int d = basis.dim;
  Matrix out = Matrix::Zero(d * d, d * d);
  if (!custom) {
    // Column j + d k is vec(A e_j e_k^T B), an outer product per term.
    for (const auto& [left, right] : terms)
      for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j)
          for (int n = 0; n < d; ++n)
            if (right(k, n) != 0.0)
              out.col(j + d * k).segment(n * d, d) += right(k, n) * left.col(j);
    return out;
  }
  Matrix unit = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < d; ++j) {
      unit(j, k) = 1.0;
      const Matrix y = custom(unit);
      out.col(j + d * k) = Eigen::Map<const Eigen::VectorXcd>(y.data(), d * d);
      unit(j, k) = 0.0;
    }
  return out;
}

Superoperator oscillator_generator(const fock::FockBasis& basis,
                                   const bath::BathSpec& spec, double lambda) {
  basis.validate();
  require_quantum_interior(spec, basis.omega0);

  const auto [a, ad] = fock::ladder_operators(basis);
  const Matrix h = fock::system_hamiltonian(basis);
  const Matrix id = identity(basis.dim);
  const double hbar = basis.hbar;

  Superoperator op{basis, {}, nullptr};
  if (lambda == 0.0) {
    op.terms.push_back({(-kI / hbar) * h, id});
    op.terms.push_back({(kI / hbar) * id, h});
    return op;
  }

  const auto qs = bath::quantum_spectra(spec, hbar, basis.omega0);
  const double delta = bath::frequency_shifts(spec, basis.omega0).delta;
  const double big = qs.n / hbar;
  const double scale = 1.0 - lambda * lambda * delta / basis.omega0;
  const double c_down = lambda * lambda * qs.gamma_sq * (big + 1.0);
  const double c_up = lambda * lambda * qs.gamma_sq * big;

  op.terms.push_back({(-kI * scale / hbar) * h, id});
  op.terms.push_back({(kI * scale / hbar) * id, h});
  op.terms.push_back({2.0 * c_up * ad, a});
  op.terms.push_back({-c_up * (a * ad), id});
  op.terms.push_back({-c_up * id, a * ad});
  op.terms.push_back({2.0 * c_down * a, ad});
  op.terms.push_back({-c_down * (ad * a), id});
  op.terms.push_back({-c_down * id, ad * a});
  return op;
}

Superoperator general_generator(const fock::FockBasis& basis,
                                const LindbladCoefficients& coeffs) {
  basis.validate();
  const auto [q, p] = fock::position_momentum(basis);
  const Matrix h = fock::system_hamiltonian(basis);
  const Matrix id = identity(basis.dim);
  const double hbar = basis.hbar;

  Superoperator op{basis, {}, nullptr};
  op.terms.push_back({(-kI * coeffs.h_scale / hbar) * h, id});
  op.terms.push_back({(kI * coeffs.h_scale / hbar) * id, h});

  const double fp = (coeffs.lam + coeffs.kappa) / (2.0 * hbar);
  op.terms.push_back({(-kI * fp) * (q * p), id});
  op.terms.push_back({(-kI * fp) * q, p});
  op.terms.push_back({(kI * fp) * p, q});
  op.terms.push_back({(kI * fp) * id, p * q});

  const double fq = (coeffs.lam - coeffs.kappa) / (2.0 * hbar);
  op.terms.push_back({(kI * fq) * (p * q), id});
  op.terms.push_back({(kI * fq) * p, q});
  op.terms.push_back({(-kI * fq) * q, p});
  op.terms.push_back({(-kI * fq) * id, q * p});

  const double d1 = coeffs.d1 / (hbar * hbar);
  op.terms.push_back({-d1 * (q * q), id});
  op.terms.push_back({2.0 * d1 * q, q});
  op.terms.push_back({-d1 * id, q * q});

  const double d2 = coeffs.d2 / (hbar * hbar);
  op.terms.push_back({-d2 * (p * p), id});
  op.terms.push_back({2.0 * d2 * p, p});
  op.terms.push_back({-d2 * id, p * p});

  const double dx = coeffs.d / (hbar * hbar);
  if (dx != 0.0) {
    op.terms.push_back({dx * (q * p + p * q), id});
    op.terms.push_back({dx * id, p * q + q * p});
    op.terms.push_back({-2.0 * dx * q, p});
    op.terms.push_back({-2.0 * dx * p, q});
  }
  return op;
}

LindbladCoefficients coefficients_from_model(const bath::BathSpec& spec,
                                             double lambda, double omega0,
                                             double beta, double hbar) {
  require_quantum_interior(spec, omega0);
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  // hbar = 0 yields the classical-limit coefficients (occupancy 1/(beta w));
  // they drive the phase-space equation only, never a Fock-space generator.
  if (!(hbar >= 0.0)) throw DomainError("hbar must be nonnegative");

  LindbladCoefficients coeffs;
  coeffs.omega0 = omega0;
  coeffs.hbar = hbar;
  if (lambda == 0.0) return coeffs;

  const double gamma_sq =
      3.141592653589793238462643 * spec.coupling_sq(omega0);
  const double n = bath::occupancy(beta, hbar, omega0);
  const double delta = bath::frequency_shifts(spec, omega0).delta;
  const double strength = lambda * lambda * gamma_sq;
  const double nu = n + 0.5 * hbar;

  coeffs.d1 = strength * omega0 * nu;
  coeffs.d2 = strength * nu / omega0;
  coeffs.d = 0.0;
  coeffs.lam = strength;
  coeffs.kappa = 0.0;
  coeffs.h_scale = 1.0 - lambda * lambda * delta / omega0;
  return coeffs;
}

FormCheck lindblad_form_check(const LindbladCoefficients& coeffs) {
  const double hb2 = coeffs.hbar * coeffs.hbar;
  Eigen::Matrix2cd m;
  m(0, 0) = coeffs.d1 / hb2;
  m(1, 1) = coeffs.d2 / hb2;
  m(0, 1) = (kI * coeffs.hbar * coeffs.lam / 2.0 - coeffs.d) / hb2;
  m(1, 0) = std::conj(m(0, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(m);

  FormCheck check;
  check.eigenvalues = {eig.eigenvalues()[0], eig.eigenvalues()[1]};
  const double floor =
      -1e-14 * std::max(1.0, std::abs(check.eigenvalues[1]));
  check.ok = check.eigenvalues[0] >= floor;
  return check;
}

Superoperator redfield_generator(const fock::FockBasis& basis,
                                 const bath::BathSpec& spec, double lambda) {
  basis.validate();
  require_quantum_interior(spec, basis.omega0);

  const auto [a, ad] = fock::ladder_operators(basis);
  const Matrix h = fock::system_hamiltonian(basis);
  const Matrix id = identity(basis.dim);
  const double hbar = basis.hbar;

  Superoperator op{basis, {}, nullptr};
  op.terms.push_back({(-kI / hbar) * h, id});
  op.terms.push_back({(kI / hbar) * id, h});
  if (lambda == 0.0) return op;

  const auto qs = bath::quantum_spectra(spec, hbar, basis.omega0);
  const double big = qs.n / hbar;
  const auto [j_plus, j_minus] =
      resonance_shifts(spec, spec.beta, hbar, basis.omega0);
  const complex<double> g_plus =
      hbar * hbar * (qs.gamma_sq * (big + 1.0) + kI * j_plus);
  const complex<double> g_minus =
      hbar * hbar * (qs.gamma_sq * big + kI * j_minus);

  const Matrix x = a + ad;
  const Matrix b = g_plus * a + g_minus * ad;
  const Matrix bh = b.adjoint();
  const double c = lambda * lambda / (hbar * hbar);

  op.terms.push_back({-c * (x * b), id});
  op.terms.push_back({c * b, x});
  op.terms.push_back({c * x, bh});
  op.terms.push_back({-c * id, bh * x});

  // The upward channel's shift commutator rides on a a+, whose truncated
  // product zeroes the top corner while the number operator keeps it. Dress
  // that channel with the corner restored so the represented levels see the
  // exact shift; the correction is a Hermitian commutator, so trace and
  // Hermiticity bookkeeping are untouched.
  const int d = basis.dim;
  Matrix corner = Matrix::Zero(d, d);
  corner(d - 1, d - 1) = static_cast<double>(d);
  const complex<double> shift = kI * lambda * lambda * j_minus;
  op.terms.push_back({-shift * corner, id});
  op.terms.push_back({shift * id, corner});
  return op;
}

Superoperator secular_average(const Superoperator& op,
                              const Matrix& hamiltonian) {
  const int dim = op.basis.dim;
  if (hamiltonian.rows() != dim || hamiltonian.cols() != dim)
    throw DomainError("Hamiltonian dimension does not match the basis");

  double diag_scale = 0.0;
  for (int j = 0; j < dim; ++j)
    diag_scale = std::max(diag_scale, std::abs(hamiltonian(j, j)));
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k)
      if (j != k &&
          std::abs(hamiltonian(j, k)) > 1e-12 * std::max(1.0, diag_scale))
        throw NonDiagonalHamiltonian(
            "secular averaging needs the Hamiltonian diagonal in the working "
            "basis");

  // Group index pairs into Bohr-frequency classes. The oscillator spectrum is
  // exactly linear, so classes reduce to the diagonal stripes m - n = const.
  std::vector<double> freq(static_cast<std::size_t>(dim) * dim);
  std::vector<double> sorted;
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n) {
      const double f = hamiltonian(m, m).real() - hamiltonian(n, n).real();
      freq[static_cast<std::size_t>(m) * dim + n] = f;
      sorted.push_back(f);
    }
  std::sort(sorted.begin(), sorted.end());
  const double tol =
      1e-9 * std::max(1.0, std::abs(sorted.back() - sorted.front()));
  std::vector<double> reps;
  for (double f : sorted)
    if (reps.empty() || f - reps.back() > tol) reps.push_back(f);

  Eigen::MatrixXi klass(dim, dim);
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n) {
      const double f = freq[static_cast<std::size_t>(m) * dim + n];
      const auto it =
          std::lower_bound(reps.begin(), reps.end(), f - tol);
      klass(m, n) = static_cast<int>(it - reps.begin());
    }
  const int n_classes = static_cast<int>(reps.size());

  Superoperator averaged{op.basis, {}, nullptr};
  averaged.custom = [op, klass, n_classes, dim](const Matrix& x) {
    Matrix y = Matrix::Zero(dim, dim);
    Matrix slice(dim, dim);
    for (int c = 0; c < n_classes; ++c) {
      slice.setZero();
      bool hit = false;
      for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n)
          if (klass(m, n) == c && x(m, n) != 0.0) {
            slice(m, n) = x(m, n);
            hit = true;
          }
      if (!hit) continue;
      const Matrix mapped = op.apply(slice);
      for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n)
          if (klass(m, n) == c) y(m, n) += mapped(m, n);
    }
    return y;
  };
  return averaged;
}

Trajectory evolve(const Superoperator& op, const fock::DensityMatrix& rho0,
                  double t_max, double dt, int store_stride) {
  if (rho0.basis.dim != op.basis.dim)
    throw DomainError("state and generator dimensions differ");
  if (!(dt > 0.0) || !(t_max >= 0.0))
    throw DomainError("need dt > 0 and t_max >= 0");
  if (store_stride < 1) throw DomainError("store_stride must be positive");

  const double bound = spectral_bound(op);
  if (dt * bound > 2.6)
    throw StepTooLarge("dt " + std::to_string(dt) +
                       " exceeds the stability bound; need dt <= " +
                       std::to_string(2.6 / bound));

  const long n_steps = std::llround(t_max / dt);
  Trajectory traj;
  Matrix rho = rho0.rho;
  traj.times.push_back(0.0);
  traj.states.push_back({op.basis, rho});

  for (long step = 1; step <= n_steps; ++step) {
    const Matrix k1 = op.apply(rho);
    const Matrix k2 = op.apply(rho + (0.5 * dt) * k1);
    const Matrix k3 = op.apply(rho + (0.5 * dt) * k2);
    const Matrix k4 = op.apply(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint().eval());
    if (step % store_stride == 0 || step == n_steps) {
      traj.times.push_back(dt * static_cast<double>(step));
      traj.states.push_back({op.basis, rho});
    }
  }
  return traj;
}

fock::DensityMatrix stationary_state(const Superoperator& op) {
  const int d = op.basis.dim;
  const int n = d * d;
  const Matrix dense = op.dense();
  const double scale = dense.cwiseAbs().maxCoeff();
  if (scale == 0.0)
    throw DegenerateNullSpace("zero generator: every state is stationary");

  // Trace-row replacement: the rows for diagonal elements sum to zero for a
  // trace-annihilating generator, so overwriting one of them with the trace
  // functional loses nothing and pins the normalization.
  using Sparse = Eigen::SparseMatrix<complex<double>>;
  std::vector<Eigen::Triplet<complex<double>>> trips;
  trips.reserve(static_cast<std::size_t>(n) * 8);
  for (int col = 0; col < n; ++col)
    for (int row = 1; row < n; ++row)
      if (dense(row, col) != 0.0) trips.push_back({row, col, dense(row, col)});
  for (int k = 0; k < d; ++k) trips.push_back({0, k + d * k, 1.0});
  Sparse pinned(n, n);
  pinned.setFromTriplets(trips.begin(), trips.end());
  pinned.makeCompressed();

  Eigen::SparseLU<Sparse> solver;
  solver.compute(pinned);
  if (solver.info() != Eigen::Success)
    throw DegenerateNullSpace("pinned generator is singular");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs[0] = 1.0;
  const Eigen::VectorXcd sol = solver.solve(rhs);
  if (solver.info() != Eigen::Success)
    throw DegenerateNullSpace("pinned solve failed");

  Matrix rho = Eigen::Map<const Matrix>(sol.data(), d, d);
  const double residual = op.apply(rho).norm();
  if (residual > 1e-8 * scale * rho.norm())
    throw DegenerateNullSpace("solution does not annihilate the generator");

  // Deflated inverse iteration around zero: a second near-null direction
  // shows up as unbounded growth once the known null vector is projected out
  // against the trace (the left null vector of any generator).
  {
    std::vector<Eigen::Triplet<complex<double>>> strips;
    const double sigma = 1e-12 * scale;
    for (int col = 0; col < n; ++col)
      for (int row = 0; row < n; ++row) {
        complex<double> v = dense(row, col);
        if (row == col) v -= sigma;
        if (v != 0.0) strips.push_back({row, col, v});
      }
    Sparse shifted(n, n);
    shifted.setFromTriplets(strips.begin(), strips.end());
    shifted.makeCompressed();
    Eigen::SparseLU<Sparse> inv;
    inv.compute(shifted);
    if (inv.info() != Eigen::Success)
      throw DegenerateNullSpace("generator null space is not one-dimensional");

    const Eigen::VectorXcd null0 = sol / sol.norm();
    Eigen::VectorXcd left = Eigen::VectorXcd::Zero(n);
    for (int k = 0; k < d; ++k) left[k + d * k] = 1.0;
    const complex<double> overlap = left.dot(null0);
    auto deflate = [&](Eigen::VectorXcd& v) {
      v -= null0 * (left.dot(v) / overlap);
    };

    const Matrix seed = probe_matrix(d);
    Eigen::VectorXcd v =
        Eigen::Map<const Eigen::VectorXcd>(seed.data(), n);
    deflate(v);
    v /= v.norm();
    double growth = 0.0;
    for (int it = 0; it < 3; ++it) {
      Eigen::VectorXcd w = inv.solve(v);
      if (inv.info() != Eigen::Success)
        throw DegenerateNullSpace(
            "generator null space is not one-dimensional");
      deflate(w);
      growth = w.norm();
      if (growth == 0.0) break;
      v = w / growth;
    }
    if (growth > 0.0 && 1.0 / growth + sigma < 1e-9 * scale)
      throw DegenerateNullSpace("generator null space is not one-dimensional");
  }

  const double herm_defect = (rho - rho.adjoint()).norm();
  if (herm_defect > 1e-8 * rho.norm())
    throw NoPSDNullVector("null vector is not Hermitian");
  rho = 0.5 * (rho + rho.adjoint().eval());
  rho /= rho.trace().real();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho);
  const double top = eig.eigenvalues().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-9 * std::max(top, 1e-300))
    throw NoPSDNullVector("null vector has a negative direction");
  return {op.basis, rho};
}

double relative_entropy(const fock::DensityMatrix& rho,
                        const fock::DensityMatrix& sigma) {
  if (rho.basis.dim != sigma.basis.dim)
    throw DomainError("state dimensions differ");

  const Matrix r = 0.5 * (rho.rho + rho.rho.adjoint().eval());
  const Matrix s = 0.5 * (sigma.rho + sigma.rho.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const auto& mu = es.eigenvalues();
  if (mu.minCoeff() <= 0.0)
    throw SingularReference(
        "reference state is singular on the truncated space");

  Eigen::SelfAdjointEigenSolver<Matrix> er(r);
  double entropy = 0.0;
  for (int j = 0; j < r.rows(); ++j) {
    const double lam = er.eigenvalues()[j];
    if (lam > 0.0) entropy += lam * std::log(lam);
  }
  for (int j = 0; j < s.rows(); ++j) {
    const Eigen::VectorXcd v = es.eigenvectors().col(j);
    entropy -= std::log(mu[j]) * v.dot(r * v).real();
  }
  return entropy;
}

double trace_norm(const Matrix& x) {
  return Eigen::BDCSVD<Matrix>(x).singularValues().sum();
}

}  // namespace mk::lindblad
