// spline.hpp: natural cubic spline on a sorted grid.
#pragma once

#include <vector>

#include "mk/errors.hpp"

namespace mk {

class CubicSpline {
 public:
  // Node abscissae must be strictly increasing; at least two nodes.
  CubicSpline(std::vector<double> x, std::vector<double> y);

  // Evaluate at a point inside [min_x(), max_x()]; throws DomainError outside.
  double operator()(double x) const;

  double min_x() const { return x_.front(); }
  double max_x() const { return x_.back(); }
  std::size_t size() const { return x_.size(); }

 private:
  std::vector<double> x_, y_, m_;  // m_: second derivatives at the nodes
};

}  // namespace mk
