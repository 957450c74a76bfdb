#include "mk/bath.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "mk/csvio.hpp"
#include "mk/spline.hpp"

namespace mk::bath {
namespace {

constexpr double pi = 3.141592653589793238462643383279502884;

QuadratureOptions bath_quad() {
  QuadratureOptions opts;
  // abs_tol must sit above the rule's roundoff floor (~50 eps resabs) or
  // strongly cancelling integrands, h(s) at large s, stall the refinement.
  opts.rel_tol = 1e-12;
  opts.abs_tol = 1e-14;
  opts.max_intervals = 6000;
  return opts;
}

// Integral of f over the spec's domain. Symmetric domains are folded onto
// (0, omega_max) so that w = 0 is an interval endpoint the rule never
// evaluates; couplings with u^2 = o(w^2) then integrate cleanly.
double domain_integral(const BathSpec& spec,
                       const std::function<double(double)>& f) {
  if (spec.domain == Domain::symmetric && !spec.one_sided) {
    auto folded = [&f](double w) { return f(w) + f(-w); };
    return integrate(folded, 0.0, spec.omega_max, bath_quad());
  }
  return integrate(f, 0.0, spec.omega_max, bath_quad());
}

// PV integral of f(w)/(w - pole) over (0, omega_max) that degrades to plain
// quadrature when the pole lies outside; compact-support couplings keep the
// integrand regular there.
double pv_positive(const BathSpec& spec,
                   const std::function<double(double)>& f, double pole) {
  if (pole > 0.0 && pole < spec.omega_max)
    return integrate_pv(f, pole, 0.0, spec.omega_max, bath_quad());
  return integrate([&f, pole](double w) { return f(w) / (w - pole); }, 0.0,
                   spec.omega_max, bath_quad());
}

}  // namespace

double BathSpec::coupling_sq(double w) const {
  const double c = coupling(w);
  if (domain == Domain::positive) return c * c * spectral_density(w);
  return c * c;
}

void BathSpec::validate() const {
  if (!coupling) throw DomainError("bath spec has no coupling function");
  if (domain == Domain::positive && !spectral_density)
    throw DomainError("quantum bath spec has no spectral density");
  if (!(beta > 0.0)) throw DomainError("bath beta must be positive");
  if (!(omega_max > 0.0)) throw DomainError("bath domain must be nonempty");
}

BathSpec classical_spec(std::function<double(double)> u, double beta,
                        double omega_max) {
  BathSpec spec;
  spec.coupling = std::move(u);
  spec.domain = Domain::symmetric;
  spec.beta = beta;
  spec.omega_max = omega_max;
  spec.validate();
  return spec;
}

BathSpec quantum_spec(std::function<double(double)> eps,
                      std::function<double(double)> sigma, double beta,
                      double omega_max) {
  BathSpec spec;
  spec.coupling = std::move(eps);
  spec.spectral_density = std::move(sigma);
  spec.domain = Domain::positive;
  spec.beta = beta;
  spec.omega_max = omega_max;
  spec.validate();
  return spec;
}

BathSpec tabulated_spec(const std::filesystem::path& path, Domain domain,
                        double beta) {
  auto [x, y] = read_tabulated(path);
  return tabulated_spec(std::move(x), std::move(y), domain, beta);
}

BathSpec tabulated_spec(std::vector<double> w, std::vector<double> coupling,
                        Domain domain, double beta) {
  if (!w.empty() && w.front() < 0.0)
    throw DomainError("tabulated couplings are given on w >= 0; got " +
                      std::to_string(w.front()));
  auto spline =
      std::make_shared<CubicSpline>(std::move(w), std::move(coupling));
  const bool fold = (domain == Domain::symmetric);
  BathSpec spec;
  spec.coupling = [spline, fold](double w) {
    const double v = fold ? std::abs(w) : w;
    if (v < spline->min_x() || v > spline->max_x()) return 0.0;
    return (*spline)(v);
  };
  if (domain == Domain::positive)
    spec.spectral_density = [](double) { return 1.0; };
  spec.domain = domain;
  spec.beta = beta;
  spec.omega_max = spline->max_x();
  spec.validate();
  return spec;
}

TimeCorrelation time_correlations(const BathSpec& spec, double s) {
  spec.validate();
  const double beta = spec.beta;
  const double h = domain_integral(spec, [&spec, s, beta](double w) {
    return spec.coupling_sq(w) * std::cos(w * s) / (beta * w * w);
  });
  const double g = domain_integral(spec, [&spec, s](double w) {
    return spec.coupling_sq(w) * std::sin(w * s) / w;
  });
  return {h, g};
}

Spectra spectral_correlations(const BathSpec& spec, double omega) {
  spec.validate();
  if (omega == 0.0)
    throw DomainError("spectral correlations are undefined at omega = 0");
  // Beyond a compact support the local parts vanish while the PV parts
  // survive as plain integrals; pv_positive handles both placements.
  const double aw = std::abs(omega);

  Spectra out;
  out.h_tilde =
      2.0 * pi * spec.coupling_sq(omega) / (spec.beta * omega * omega);
  out.g_tilde = std::complex<double>(0.0, spec.beta * omega * out.h_tilde);

  // Fold the even PV kernels onto (0, omega_max):
  //   1/(omega^2 - w^2) = -[1/(w + |omega|)] / (w - |omega|).
  const double fold = (spec.domain == Domain::symmetric && !spec.one_sided)
                          ? 2.0
                          : 1.0;
  auto h_kernel = [&spec, aw](double w) {
    return -spec.coupling_sq(w) / (w * w * (w + aw));
  };
  const double pv_h = fold * pv_positive(spec, h_kernel, aw);
  out.h_bar = std::complex<double>(0.5 * out.h_tilde,
                                   omega / spec.beta * pv_h);

  auto g_kernel = [&spec, aw](double w) {
    return -spec.coupling_sq(w) / (w + aw);
  };
  const double pv_g = fold * pv_positive(spec, g_kernel, aw);
  out.g_bar = 0.5 * out.g_tilde + std::complex<double>(-pv_g, 0.0);
  return out;
}

Stability stability_check(const BathSpec& spec, double lambda, double omega0) {
  spec.validate();
  if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");
  double integral = 0.0;
  if (lambda != 0.0)
    integral = domain_integral(spec, [&spec](double w) {
      return spec.coupling_sq(w) / (w * w);
    });
  const double margin = omega0 * omega0 - lambda * lambda * integral;
  return {margin >= 0.0, margin};
}

FrequencyShifts frequency_shifts(const BathSpec& spec, double omega0) {
  spec.validate();
  if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");

  FrequencyShifts out;
  if (spec.domain == Domain::positive) {
    // Quantum form: PV over (0, inf) of (1/(w-w0) + 1/(w+w0)) eps^2 sigma.
    auto f = [&spec](double w) { return spec.coupling_sq(w); };
    const double resonant = pv_positive(spec, f, omega0);
    const double regular = integrate(
        [&spec, omega0](double w) {
          return spec.coupling_sq(w) / (w + omega0);
        },
        0.0, spec.omega_max, bath_quad());
    out.delta = resonant + regular;
    out.chi = pv_positive(
        spec, [&spec](double w) { return spec.coupling_sq(w) / (w * w); },
        omega0);
    return out;
  }

  if (spec.one_sided) {
    out.delta = (1.0 / (2.0 * omega0)) *
                pv_positive(
                    spec,
                    [&spec](double w) { return spec.coupling_sq(w) / w; },
                    omega0);
    out.chi = pv_positive(
        spec, [&spec](double w) { return spec.coupling_sq(w) / (w * w); },
        omega0);
    return out;
  }

  // Symmetric domain, kernels folded onto (0, omega_max). The 1/w prefactor
  // of the delta integrand cancels in the fold,
  //   u^2/(w(w-w0)) + u^2/(w(w+w0)) = 2 u^2 / ((w+w0)(w-w0)),
  // while the 1/w^2 of the chi integrand survives as an odd combination,
  //   u^2/(w^2(w-w0)) - u^2/(w^2(w+w0)) = 2 w0 u^2 / (w^2 (w+w0)(w-w0)).
  auto delta_kernel = [&spec, omega0](double w) {
    return 2.0 * spec.coupling_sq(w) / (w + omega0);
  };
  out.delta =
      (1.0 / (2.0 * omega0)) * pv_positive(spec, delta_kernel, omega0);
  auto chi_kernel = [&spec, omega0](double w) {
    return 2.0 * omega0 * spec.coupling_sq(w) / (w * w * (w + omega0));
  };
  out.chi = pv_positive(spec, chi_kernel, omega0);
  return out;
}

double occupancy(double beta, double hbar, double omega) {
  if (!(beta > 0.0) || !(omega > 0.0))
    throw DomainError("occupancy needs beta > 0 and omega > 0");
  if (hbar < 0.0) throw DomainError("hbar must be nonnegative");
  if (hbar == 0.0) return 1.0 / (beta * omega);
  const double x = beta * hbar * omega;
  return hbar / std::expm1(x);
}

QuantumSpectra quantum_spectra(const BathSpec& spec, double hbar,
                               double omega) {
  spec.validate();
  if (spec.domain != Domain::positive)
    throw DomainError("quantum spectra need a quantum (positive-domain) spec");
  if (!(omega > 0.0) || omega >= spec.omega_max)
    throw DomainError("omega must lie inside the quantum coupling domain");
  QuantumSpectra out;
  out.n = occupancy(spec.beta, hbar, omega);
  const double es = spec.coupling_sq(omega);
  out.gamma_sq = pi * es;
  out.h_plus = 2.0 * pi * hbar * out.n * es;
  out.h_minus = 2.0 * pi * hbar * (out.n + hbar) * es;
  return out;
}

BathSpec classical_correspondence(const BathSpec& quantum, double omega0) {
  quantum.validate();
  if (quantum.domain != Domain::positive)
    throw DomainError("correspondence starts from a quantum spec");
  if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");
  auto eps = quantum.coupling;
  auto sigma = quantum.spectral_density;
  auto u = [eps, sigma, omega0](double w) {
    if (w <= 0.0) return 0.0;
    const double e = eps(w);
    const double s2 = 4.0 * e * e * sigma(w) * w * omega0;
    return s2 > 0.0 ? std::sqrt(s2) : 0.0;
  };
  BathSpec spec;
  spec.coupling = u;
  spec.domain = Domain::symmetric;
  spec.one_sided = true;
  spec.beta = quantum.beta;
  spec.omega_max = quantum.omega_max;
  spec.validate();
  return spec;
}

double classical_rate(const BathSpec& spec, double omega0) {
  spec.validate();
  if (spec.domain == Domain::positive)
    throw MissingBathQuantity(
        "classical rate needs a classical spec; apply the correspondence "
        "first");
  if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");
  const double scale = spec.one_sided ? 0.5 : 1.0;
  return scale * pi * spec.coupling_sq(omega0) / (2.0 * omega0 * omega0);
}

BathCorrelations correlations_summary(const BathSpec& spec, double omega0,
                                      double hbar) {
  const FrequencyShifts shifts = frequency_shifts(spec, omega0);
  BathCorrelations out;
  out.delta_shift = shifts.delta;
  out.chi_coeff = shifts.chi;
  out.occupancy = occupancy(spec.beta, hbar, omega0);
  out.gamma_sq = (spec.domain == Domain::positive)
                     ? pi * spec.coupling_sq(omega0)
                     : classical_rate(spec, omega0);
  return out;
}

}  // namespace mk::bath
