// quadrature.hpp: adaptive Gauss-Kronrod integration with principal-value support.
#pragma once

#include <functional>
#include <limits>

#include "mk/errors.hpp"

namespace mk {

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;
  int max_intervals = 4000;
};

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;   // accumulated error bound over all subintervals
  int intervals = 0;
};

// Integrate f over [a, b]. Either bound may be +/-infinity; infinite ranges
// are folded onto a finite parameter interval with a rational map before the
// adaptive pass. Throws QuadratureFailure when the requested tolerance is not
// reached within opts.max_intervals.
IntegralEstimate integrate_full(const std::function<double(double)>& f,
                                double a, double b,
                                const QuadratureOptions& opts = {});

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

// Cauchy principal value of  integral f(w) / (w - pole) dw  over [a, b] with
// a < pole < b. A symmetric window around the pole is handled by singularity
// subtraction, which cancels the logarithmic terms exactly; the remainder is
// regular and integrated directly. Outer bounds may be infinite.
IntegralEstimate integrate_pv_full(const std::function<double(double)>& f,
                                   double pole, double a, double b,
                                   const QuadratureOptions& opts = {});

double integrate_pv(const std::function<double(double)>& f, double pole,
                    double a, double b, const QuadratureOptions& opts = {});

}  // namespace mk
