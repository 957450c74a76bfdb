// bath.hpp: bath spectral model, correlation functions, and transforms.
//
// A BathSpec is either classical (real even coupling u on a symmetric
// frequency domain, possibly with support folded onto w > 0) or quantum
// (coupling eps and spectral density sigma on w > 0). All integrals run over
// the spec's own domain; principal values use singularity subtraction.
#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include "mk/errors.hpp"
#include "mk/quadrature.hpp"

namespace mk::bath {

enum class Domain { symmetric, positive };

struct BathSpec {
  std::function<double(double)> coupling;          // u(w) or eps(w)
  std::function<double(double)> spectral_density;  // sigma(w); quantum side
  Domain domain = Domain::symmetric;
  double omega_max = std::numeric_limits<double>::infinity();
  double beta = 1.0;
  // Classical spec whose support was folded onto w > 0 (the correspondence
  // construction); rates derived from it carry a factor 1/2 against the
  // symmetric-domain formula.
  bool one_sided = false;

  // u^2(w) classically, |eps(w)|^2 sigma(w) on the quantum side.
  double coupling_sq(double w) const;
  void validate() const;
};

BathSpec classical_spec(std::function<double(double)> u, double beta,
                        double omega_max =
                            std::numeric_limits<double>::infinity());
BathSpec quantum_spec(std::function<double(double)> eps,
                      std::function<double(double)> sigma, double beta,
                      double omega_max =
                          std::numeric_limits<double>::infinity());

// Two-column (w, coupling) file; cubic interpolation, zero outside the table,
// evenness enforced for symmetric domains by evaluating at |w|.
BathSpec tabulated_spec(const std::filesystem::path& path, Domain domain,
                        double beta);
// Same from in-memory samples on w >= 0 (strictly increasing abscissae).
BathSpec tabulated_spec(std::vector<double> w, std::vector<double> coupling,
                        Domain domain, double beta);

struct TimeCorrelation {
  double h;  // position-coupling autocorrelation
  double g;  // its conjugate response partner
};
TimeCorrelation time_correlations(const BathSpec& spec, double s);

struct Spectra {
  double h_tilde = 0.0;
  std::complex<double> g_tilde;  // i beta w h_tilde
  std::complex<double> h_bar;    // half transform, real part h_tilde/2
  std::complex<double> g_bar;    // half transform, imag part g_tilde/2
};
Spectra spectral_correlations(const BathSpec& spec, double omega);

struct Stability {
  bool ok = false;
  double margin = 0.0;  // omega0^2 - lambda^2 int u^2/w^2
};
Stability stability_check(const BathSpec& spec, double lambda, double omega0);

struct FrequencyShifts {
  double delta = 0.0;  // oscillator frequency renormalization
  double chi = 0.0;    // mixed-diffusion coefficient of the defective equation
};
FrequencyShifts frequency_shifts(const BathSpec& spec, double omega0);

// Thermal occupancy n(w) = hbar/(e^{beta hbar w} - 1); hbar = 0 gives the
// classical limit 1/(beta w) analytically.
double occupancy(double beta, double hbar, double omega);

struct QuantumSpectra {
  double h_plus = 0.0;   // spectrum at +w: 2 pi hbar n eps^2 sigma
  double h_minus = 0.0;  // spectrum at -w: 2 pi hbar (n + hbar) eps^2 sigma
  double n = 0.0;
  double gamma_sq = 0.0;  // pi eps^2(w) sigma(w)
};
QuantumSpectra quantum_spectra(const BathSpec& spec, double hbar, double omega);

// u^2(w) = 4 eps^2(w) sigma(w) w omega0 on w > 0, zero elsewhere; the result
// is a classical spec flagged one_sided.
BathSpec classical_correspondence(const BathSpec& quantum, double omega0);

// Classical damping rate gamma_c entering the kinetic coefficients:
// pi u^2(omega0)/(2 omega0^2) for symmetric domains, half that for one-sided.
double classical_rate(const BathSpec& spec, double omega0);

struct BathCorrelations {
  double delta_shift = 0.0;
  double chi_coeff = 0.0;
  double occupancy = 0.0;
  double gamma_sq = 0.0;  // quantum gamma^2, or gamma_c for classical specs
};
BathCorrelations correlations_summary(const BathSpec& spec, double omega0,
                                      double hbar);

}  // namespace mk::bath
