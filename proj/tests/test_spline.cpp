#include <doctest.h>

#include <cmath>
#include <vector>

#include "mk/spline.hpp"

using mk::CubicSpline;

TEST_CASE("reproduces linear data exactly") {
  std::vector<double> x{0.0, 0.5, 1.2, 3.0};
  std::vector<double> y;
  for (double xi : x) y.push_back(2.0 * xi - 1.0);
  CubicSpline s(x, y);
  for (double t : {0.0, 0.25, 0.77, 1.2, 2.9, 3.0})
    CHECK(s(t) == doctest::Approx(2.0 * t - 1.0).epsilon(1e-14));
}

TEST_CASE("interpolates knots exactly and smooth data accurately") {
  std::vector<double> x, y;
  const int n = 41;
  for (int i = 0; i < n; ++i) {
    const double xi = -2.0 + 4.0 * i / (n - 1);
    x.push_back(xi);
    y.push_back(std::sin(xi));
  }
  CubicSpline s(x, y);
  for (int i = 0; i < n; ++i) CHECK(s(x[i]) == doctest::Approx(y[i]).epsilon(1e-14));
  double worst = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double t = -2.0 + 4.0 * k / 400.0;
    worst = std::max(worst, std::abs(s(t) - std::sin(t)));
  }
  // Interior error is O(h^4); natural ends degrade to O(h^2) locally.
  CHECK(worst < 5e-4);
}

TEST_CASE("rejects bad inputs and out-of-range evaluation") {
  CHECK_THROWS_AS(CubicSpline({0.0}, {1.0}), mk::DomainError);
  CHECK_THROWS_AS(CubicSpline({0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}),
                  mk::DomainError);
  CHECK_THROWS_AS(CubicSpline({0.0, 1.0}, {1.0, 2.0, 3.0}), mk::DomainError);
  CubicSpline s({0.0, 1.0, 2.0}, {0.0, 1.0, 4.0});
  CHECK_THROWS_AS(s(-0.01), mk::DomainError);
  CHECK_THROWS_AS(s(2.01), mk::DomainError);
  CHECK(s(2.0) == doctest::Approx(4.0));
}
