#include "shapemean/curves.hpp"

#include <algorithm>
#include <cmath>

#include "shapemean/errors.hpp"

namespace shapemean {

namespace {

// 16-point Gauss-Legendre rule on [-1,1]
constexpr int kGlPoints = 16;
constexpr double kGlNode[kGlPoints] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
    0.9894009349916499};
constexpr double kGlWeight[kGlPoints] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

// int_a^b q(t)|q(t)| dt for a linear segment of a CurveFunction
Complex speed_integral(const CurveFunction& q, double a, double b) {
  Complex acc(0.0, 0.0);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < kGlPoints; ++i) {
    const Complex v = q.evaluate(mid + half * kGlNode[i]);
    acc += kGlWeight[i] * v * std::abs(v);
  }
  return half * acc;
}

}  // namespace

Complex CurveFunction::evaluate(double t) const {
  const Eigen::VectorXd f = basis->evaluate(t);
  Complex acc(0.0, 0.0);
  for (int k = 0; k < f.size(); ++k)
    if (f(k) != 0.0) acc += coefficients(k) * f(k);
  return acc;
}

int PiecewiseLinearFn::piece_index(double t) const {
  const int b = pieces();
  const double* begin = breaks.data();
  int j = static_cast<int>(std::upper_bound(begin, begin + b + 1, t) - begin) -
          1;
  if (j < 0) j = 0;
  if (j >= b) j = b - 1;
  return j;
}

Complex PiecewiseLinearFn::evaluate(double t) const {
  const int j = piece_index(t);
  return left_value(j) + slope(j) * (t - breaks(j));
}

PiecewiseLinearFn to_piecewise(const SrvCurve& q) {
  PiecewiseLinearFn fn;
  fn.breaks = q.nodes;
  fn.left_value = q.values;
  fn.slope = Eigen::VectorXcd::Zero(q.size());
  return fn;
}

PiecewiseLinearFn to_piecewise(const CurveFunction& q) {
  const SplineBasis& basis = *q.basis;
  const int intervals = basis.num_knots() - 1;
  const double h = 1.0 / intervals;
  PiecewiseLinearFn fn;
  fn.breaks.resize(intervals + 1);
  for (int i = 0; i <= intervals; ++i) fn.breaks(i) = basis.knot(i);
  fn.left_value.resize(intervals);
  fn.slope.resize(intervals);
  for (int i = 0; i < intervals; ++i) {
    if (basis.order() == 0) {
      fn.left_value(i) = q.coefficients(i);
      fn.slope(i) = Complex(0.0, 0.0);
    } else {
      fn.left_value(i) = q.coefficients(i);
      fn.slope(i) = (q.coefficients(i + 1) - q.coefficients(i)) / h;
    }
  }
  return fn;
}

SrvCurve polygon_to_srv(const PlanePolygon& polygon) {
  std::vector<Complex> pts;
  pts.reserve(polygon.points.size());
  for (const Complex& p : polygon.points)
    if (pts.empty() || p != pts.back()) pts.push_back(p);
  if (pts.size() < 2)
    throw DegeneratePolygon("polygon '" + polygon.id +
                            "' has fewer than 2 distinct points");
  const int n = static_cast<int>(pts.size()) - 1;
  Eigen::VectorXd edge_len(n);
  Eigen::VectorXcd direction(n);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const Complex delta = pts[j + 1] - pts[j];
    const double len = std::abs(delta);
    edge_len(j) = len;
    direction(j) = delta / len;
    total += len;
  }
  if (!(total > 0.0))
    throw DegeneratePolygon("polygon '" + polygon.id + "' has zero length");

  SrvCurve srv;
  srv.nodes.resize(n + 1);
  srv.times.resize(n);
  srv.values.resize(n);
  srv.nodes(0) = 0.0;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    acc += edge_len(j);
    srv.nodes(j + 1) = acc / total;
    srv.values(j) = direction(j);  // |q_j| = L^{1/2} = 1 after normalization
  }
  srv.nodes(n) = 1.0;
  for (int j = 0; j < n; ++j)
    srv.times(j) = 0.5 * (srv.nodes(j) + srv.nodes(j + 1));
  srv.length_estimate = 1.0;
  return srv;
}

std::vector<Complex> srv_to_curve(const SrvCurve& q,
                                  const std::vector<double>& grid) {
  std::vector<Complex> out;
  out.reserve(grid.size());
  int j = 0;
  Complex base(0.0, 0.0);  // beta(nodes(j))
  for (double t : grid) {
    while (j < q.size() - 1 && t > q.nodes(j + 1)) {
      const Complex v = q.values(j);
      base += v * std::abs(v) * (q.nodes(j + 1) - q.nodes(j));
      ++j;
    }
    const Complex v = q.values(j);
    out.push_back(base + v * std::abs(v) * (t - q.nodes(j)));
  }
  return out;
}

std::vector<Complex> srv_to_curve(const CurveFunction& q,
                                  const std::vector<double>& grid) {
  std::vector<Complex> out;
  out.reserve(grid.size());
  const int intervals = q.basis->num_knots() - 1;
  int j = 0;
  double left = 0.0;
  Complex base(0.0, 0.0);  // beta(knot_j)
  for (double t : grid) {
    while (j < intervals - 1 && t > q.basis->knot(j + 1)) {
      base += speed_integral(q, q.basis->knot(j), q.basis->knot(j + 1));
      ++j;
      left = q.basis->knot(j);
    }
    out.push_back(base + speed_integral(q, left, t));
  }
  return out;
}

Complex inner_product(const PiecewiseLinearFn& a, const PiecewiseLinearFn& b) {
  Complex acc(0.0, 0.0);
  int ia = 0, ib = 0;
  double lo = 0.0;
  const int na = a.pieces(), nb = b.pieces();
  while (ia < na && ib < nb) {
    const double hi = std::min(a.breaks(ia + 1), b.breaks(ib + 1));
    if (hi > lo) {
      auto eval_a = [&](double x) {
        return a.left_value(ia) + a.slope(ia) * (x - a.breaks(ia));
      };
      auto eval_b = [&](double x) {
        return b.left_value(ib) + b.slope(ib) * (x - b.breaks(ib));
      };
      const double mid = 0.5 * (lo + hi);
      // conj(a) b is quadratic on the piece: Simpson is exact
      const Complex g0 = std::conj(eval_a(lo)) * eval_b(lo);
      const Complex g1 = std::conj(eval_a(mid)) * eval_b(mid);
      const Complex g2 = std::conj(eval_a(hi)) * eval_b(hi);
      acc += (hi - lo) / 6.0 * (g0 + 4.0 * g1 + g2);
    }
    if (a.breaks(ia + 1) <= hi) ++ia;
    if (b.breaks(ib + 1) <= hi) ++ib;
    lo = hi;
  }
  return acc;
}

Complex inner_product(const SrvCurve& a, const SrvCurve& b) {
  return inner_product(to_piecewise(a), to_piecewise(b));
}
Complex inner_product(const SrvCurve& a, const CurveFunction& b) {
  return inner_product(to_piecewise(a), to_piecewise(b));
}
Complex inner_product(const CurveFunction& a, const SrvCurve& b) {
  return inner_product(to_piecewise(a), to_piecewise(b));
}
Complex inner_product(const CurveFunction& a, const CurveFunction& b) {
  return inner_product(to_piecewise(a), to_piecewise(b));
}

double squared_norm(const PiecewiseLinearFn& a) {
  return inner_product(a, a).real();
}
double squared_norm(const SrvCurve& a) { return squared_norm(to_piecewise(a)); }
double squared_norm(const CurveFunction& a) {
  return squared_norm(to_piecewise(a));
}

RotationAlignment inelastic_distance(const PiecewiseLinearFn& q1,
                                     const PiecewiseLinearFn& q2) {
  constexpr double kNormTol = 1e-8;
  if (std::abs(squared_norm(q1) - 1.0) > kNormTol ||
      std::abs(squared_norm(q2) - 1.0) > kNormTol)
    throw NotNormalized("inelastic_distance requires unit-norm inputs");
  const Complex ip = inner_product(q1, q2);
  const double mag = std::abs(ip);
  RotationAlignment out;
  out.distance = std::sqrt(std::max(0.0, 1.0 - mag * mag));
  out.rotation = (mag == 0.0) ? Complex(1.0, 0.0) : std::conj(ip) / mag;
  return out;
}

}  // namespace shapemean
