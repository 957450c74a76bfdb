#include "mk/spline.hpp"

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>

namespace mk {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    throw DomainError("spline needs at least two matching (x, y) nodes");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw DomainError("spline abscissae must be strictly increasing");

  // Natural boundary: zero curvature at both ends. Thomas solve for the
  // interior second derivatives.
  m_.assign(n, 0.0);
  if (n == 2) return;
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x_[i] - x_[i - 1];
    const double hr = x_[i + 1] - x_[i];
    diag[i] = 2.0 * (hl + hr);
    upper[i] = hr;
    rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
  }
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double hl = x_[i] - x_[i - 1];
    const double w = hl / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    if (i == 1) break;
  }
}

double CubicSpline::operator()(double x) const {
  if (x < x_.front() || x > x_.back())
    throw DomainError("spline evaluated at " + std::to_string(x) +
                      " outside [" + std::to_string(x_.front()) + ", " +
                      std::to_string(x_.back()) + "]");
  std::size_t hi = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
  if (hi == x_.size()) --hi;
  if (hi == 0) ++hi;
  const std::size_t lo = hi - 1;
  const double h = x_[hi] - x_[lo];
  const double u = (x_[hi] - x) / h;
  const double v = (x - x_[lo]) / h;
  return u * y_[lo] + v * y_[hi] +
         ((u * u * u - u) * m_[lo] + (v * v * v - v) * m_[hi]) * h * h / 6.0;
}

}  // namespace mk
