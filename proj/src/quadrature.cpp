#include "mk/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

namespace mk {
namespace {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
// Nodes with odd index are the embedded Gauss points.
constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
  double kronrod;
  double error;
};

// One Gauss-Kronrod pass over [a, b]; error per the QUADPACK heuristic.
PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double center = 0.5 * (a + b);

  const double fc = f(center);
  double kron = wgk[7] * fc;
  double gauss = wg[3] * fc;
  double resabs = wgk[7] * std::abs(fc);
  double fv[7][2];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    fv[j][0] = f(center - dx);
    fv[j][1] = f(center + dx);
    const double pair = fv[j][0] + fv[j][1];
    kron += wgk[j] * pair;
    resabs += wgk[j] * (std::abs(fv[j][0]) + std::abs(fv[j][1]));
    if (j % 2 == 1) gauss += wg[(j - 1) / 2] * pair;
  }

  const double mean = 0.5 * kron;
  double resasc = wgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += wgk[j] * (std::abs(fv[j][0] - mean) + std::abs(fv[j][1] - mean));

  kron *= half;
  gauss *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);

  double err = std::abs(kron - gauss);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50)
    err = std::max(err, eps50 * resabs);
  return {kron, err};
}

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& other) const { return error < other.error; }
};

IntegralEstimate adapt(const std::function<double(double)>& f, double a,
                       double b, const QuadratureOptions& opts) {
  std::priority_queue<Interval> heap;
  const PanelResult first = gk15(f, a, b);
  heap.push({a, b, first.kronrod, first.error});
  double total = first.kronrod;
  double total_err = first.error;
  int count = 1;

  auto tolerance = [&] {
    return std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };

  while (total_err > tolerance()) {
    if (count >= opts.max_intervals)
      throw QuadratureFailure(
          "adaptive integration stalled at " + std::to_string(count) +
          " intervals, error " + std::to_string(total_err));
    const Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b)
      throw QuadratureFailure("interval collapsed to rounding at " +
                              std::to_string(worst.a));
    const PanelResult left = gk15(f, worst.a, mid);
    const PanelResult right = gk15(f, mid, worst.b);
    total += left.kronrod + right.kronrod - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push({worst.a, mid, left.kronrod, left.error});
    heap.push({mid, worst.b, right.kronrod, right.error});
    ++count;
  }
  return {total, total_err, count};
}

bool is_inf(double x) { return std::isinf(x); }

}  // namespace

IntegralEstimate integrate_full(const std::function<double(double)>& f,
                                double a, double b,
                                const QuadratureOptions& opts) {
  if (std::isnan(a) || std::isnan(b) || a >= b)
    throw DomainError("integration bounds must satisfy a < b");

  if (!is_inf(a) && !is_inf(b)) return adapt(f, a, b, opts);

  if (!is_inf(a) && is_inf(b)) {
    // w = a + t/(1-t), t in (0, 1).
    auto g = [&f, a](double t) {
      const double om = 1.0 - t;
      return f(a + t / om) / (om * om);
    };
    return adapt(g, 0.0, 1.0, opts);
  }
  if (is_inf(a) && !is_inf(b)) {
    auto g = [&f, b](double t) {
      const double om = 1.0 - t;
      return f(b - t / om) / (om * om);
    };
    return adapt(g, 0.0, 1.0, opts);
  }
  // w = t/(1-t^2), t in (-1, 1).
  auto g = [&f](double t) {
    const double d = 1.0 - t * t;
    return f(t / d) * (1.0 + t * t) / (d * d);
  };
  return adapt(g, -1.0, 1.0, opts);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  return integrate_full(f, a, b, opts).value;
}

IntegralEstimate integrate_pv_full(const std::function<double(double)>& f,
                                   double pole, double a, double b,
                                   const QuadratureOptions& opts) {
  if (!(a < pole && pole < b))
    throw DomainError("principal-value pole must lie strictly inside (a, b)");
  if (is_inf(pole)) throw DomainError("principal-value pole must be finite");

  double radius = std::numeric_limits<double>::infinity();
  if (!is_inf(a)) radius = std::min(radius, pole - a);
  if (!is_inf(b)) radius = std::min(radius, b - pole);
  if (is_inf(radius)) radius = std::max(1.0, std::abs(pole));
  if (radius <= 0.0) throw DomainError("empty principal-value window");

  const double fp = f(pole);
  auto regular = [&f, fp, pole](double w) {
    return (f(w) - fp) / (w - pole);
  };
  // On the symmetric window the subtracted term integrates to zero exactly.
  const IntegralEstimate left =
      adapt(regular, pole - radius, pole, opts);
  const IntegralEstimate right =
      adapt(regular, pole, pole + radius, opts);

  IntegralEstimate out;
  out.value = left.value + right.value;
  out.error = left.error + right.error;
  out.intervals = left.intervals + right.intervals;

  auto raw = [&f, pole](double w) { return f(w) / (w - pole); };
  if (a < pole - radius) {
    const IntegralEstimate tail = integrate_full(raw, a, pole - radius, opts);
    out.value += tail.value;
    out.error += tail.error;
    out.intervals += tail.intervals;
  }
  if (b > pole + radius) {
    const IntegralEstimate tail = integrate_full(raw, pole + radius, b, opts);
    out.value += tail.value;
    out.error += tail.error;
    out.intervals += tail.intervals;
  }
  return out;
}

double integrate_pv(const std::function<double(double)>& f, double pole,
                    double a, double b, const QuadratureOptions& opts) {
  return integrate_pv_full(f, pole, a, b, opts).value;
}

}  // namespace mk
