#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "mk/quadrature.hpp"

using mk::integrate;
using mk::integrate_pv;
using mk::QuadratureOptions;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Independent principal-value oracle: symmetric excision with Richardson
// extrapolation in the excision radius (error series in odd powers).
double pv_excision(const std::function<double(double)>& f, double pole,
                   double a, double b) {
  auto excised = [&](double eps) {
    auto g = [&](double w) { return f(w) / (w - pole); };
    return integrate(g, a, pole - eps) + integrate(g, pole + eps, b);
  };
  const double e0 = 1e-2;
  const double i1 = excised(e0);
  const double i2 = excised(e0 / 2);
  const double i3 = excised(e0 / 4);
  const double i4 = excised(e0 / 8);
  // Eliminate the O(eps) and O(eps^3) terms.
  const double r1 = 2 * i2 - i1;
  const double r2 = 2 * i3 - i2;
  const double r3 = 2 * i4 - i3;
  const double s1 = (8 * r2 - r1) / 7;
  const double s2 = (8 * r3 - r2) / 7;
  return (32 * s2 - s1) / 31;
}

}  // namespace

TEST_CASE("smooth finite integrals reach tight tolerance") {
  const double v = integrate([](double x) { return std::sin(x); }, 0.0,
                             3.141592653589793238462643383279502884);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-13));

  const double poly = integrate([](double x) { return 23.0 * std::pow(x, 22.0); },
                                0.0, 1.0);
  CHECK(poly == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("infinite domains are mapped correctly") {
  const double gauss =
      integrate([](double x) { return std::exp(-x * x); }, -inf, inf);
  CHECK(gauss == doctest::Approx(1.7724538509055160273).epsilon(1e-12));

  const double gamma3 =
      integrate([](double x) { return x * x * std::exp(-x); }, 0.0, inf);
  CHECK(gamma3 == doctest::Approx(2.0).epsilon(1e-12));

  const double left =
      integrate([](double x) { return std::exp(x); }, -inf, 0.0);
  CHECK(left == doctest::Approx(1.0).epsilon(1e-12));

  // Second moment of exp(-2 w^2), the bath zero-lag correlation shape.
  const double moment =
      integrate([](double w) { return w * w * std::exp(-2.0 * w * w); }, -inf,
                inf);
  CHECK(moment == doctest::Approx(0.31332853432887506).epsilon(1e-12));
}

TEST_CASE("invalid bounds and unreachable tolerances are reported") {
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 1.0, 1.0),
                  mk::DomainError);
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 2.0, 1.0),
                  mk::DomainError);
  // Divergent integrand: the adaptive pass must give up, not hang or lie.
  QuadratureOptions opts;
  opts.max_intervals = 200;
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / x; }, 0.0, 1.0, opts),
                  mk::QuadratureFailure);
}

TEST_CASE("principal value with closed-form answers") {
  // PV of 1/(x-s): log((b-s)/(s-a)).
  const double flat = integrate_pv([](double) { return 1.0; }, 0.3, -1.0, 2.0);
  CHECK(flat == doctest::Approx(std::log(1.7 / 1.3)).epsilon(1e-13));

  // PV of x/(x-s): (b-a) + s log((b-s)/(s-a)).
  const double linear = integrate_pv([](double x) { return x; }, 0.3, -1.0, 2.0);
  CHECK(linear ==
        doctest::Approx(3.0 + 0.3 * std::log(1.7 / 1.3)).epsilon(1e-13));

  // PV of e^x/x over (-1,1) is twice the hyperbolic sine integral at 1.
  const double expo =
      integrate_pv([](double x) { return std::exp(x); }, 0.0, -1.0, 1.0);
  CHECK(expo == doctest::Approx(2.1145017507514570).epsilon(1e-13));
}

TEST_CASE("principal value agrees with the excision oracle") {
  auto f = [](double w) { return std::exp(-w * w); };
  const double sub = integrate_pv(f, 0.7, -4.0, 6.0);
  const double exc = pv_excision(f, 0.7, -4.0, 6.0);
  CHECK(sub == doctest::Approx(exc).epsilon(1e-10));

  auto bump = [](double w) { return w * w * std::exp(-w * w); };
  const double sub2 = integrate_pv(bump, 1.0, 0.0, 12.0);
  const double exc2 = pv_excision(bump, 1.0, 0.0, 12.0);
  CHECK(sub2 == doctest::Approx(exc2).epsilon(1e-10));
}

TEST_CASE("principal value over a half-infinite domain") {
  // Pole inside (0, inf); tail handled by the mapped plain quadrature.
  auto f = [](double w) { return w * w * std::exp(-w * w); };
  const double whole = integrate_pv(f, 1.0, 0.0, inf);
  const double split = integrate_pv(f, 1.0, 0.0, 12.0) +
                       integrate([&](double w) { return f(w) / (w - 1.0); },
                                 12.0, inf);
  CHECK(whole == doctest::Approx(split).epsilon(1e-11));
}

TEST_CASE("pole on or outside the boundary is rejected") {
  CHECK_THROWS_AS(integrate_pv([](double) { return 1.0; }, 0.0, 0.0, 1.0),
                  mk::DomainError);
  CHECK_THROWS_AS(integrate_pv([](double) { return 1.0; }, -2.0, -1.0, 1.0),
                  mk::DomainError);
}

TEST_CASE("regular integrand through the pv routine matches plain quadrature") {
  // The regularized path must not degrade accuracy when f vanishes at the
  // pole faster than (w - pole), making the quotient smooth.
  auto f = [](double w) { return (w - 0.5) * (w - 0.5) * std::cos(w); };
  const double pv = integrate_pv(f, 0.5, -1.0, 2.0);
  const double plain =
      integrate([](double w) { return (w - 0.5) * std::cos(w); }, -1.0, 2.0);
  CHECK(pv == doctest::Approx(plain).epsilon(1e-11));
}
