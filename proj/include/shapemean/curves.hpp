#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "shapemean/basis.hpp"

namespace shapemean {

using Complex = std::complex<double>;

/// Ordered sample points of one observed plane curve, as complex numbers.
struct PlanePolygon {
  std::string id;
  std::vector<Complex> points;
};

/// Discrete SRV evaluations of one curve together with the interval nodes of
/// its piecewise-constant proxy. times(j) lies strictly inside
/// (nodes(j), nodes(j+1)).
struct SrvCurve {
  Eigen::VectorXd times;    // n, strictly increasing in (0,1)
  Eigen::VectorXcd values;  // n
  Eigen::VectorXd nodes;    // n+1, nodes(0)=0, nodes(n)=1
  double length_estimate = 1.0;

  int size() const { return static_cast<int>(times.size()); }
};

/// SRV-level function expanded in a real spline basis with complex
/// coefficients: psi(t) = theta^T f(t).
struct CurveFunction {
  std::shared_ptr<const SplineBasis> basis;
  Eigen::VectorXcd coefficients;

  Complex evaluate(double t) const;
};

/// Complex-valued function that is linear on each piece, possibly
/// discontinuous at the breakpoints. Common exact representation for
/// piecewise-constant SRV proxies and order-0/1 spline expansions.
struct PiecewiseLinearFn {
  Eigen::VectorXd breaks;       // B+1, increasing, breaks(0)=0, breaks(B)=1
  Eigen::VectorXcd left_value;  // B, value at the start of each piece
  Eigen::VectorXcd slope;       // B

  int pieces() const { return static_cast<int>(slope.size()); }
  Complex evaluate(double t) const;
  int piece_index(double t) const;
};

PiecewiseLinearFn to_piecewise(const SrvCurve& q);
PiecewiseLinearFn to_piecewise(const CurveFunction& q);

/// polygon -> unit-length SRV representation (constant-speed initialization).
SrvCurve polygon_to_srv(const PlanePolygon& polygon);

/// Psi^{-1}: beta(t) = int_0^t q(s)|q(s)| ds, anchored at beta(0)=0.
/// Exact for piecewise-constant curves, 16-point Gauss-Legendre per knot
/// interval for spline coefficients.
std::vector<Complex> srv_to_curve(const SrvCurve& q,
                                  const std::vector<double>& grid);
std::vector<Complex> srv_to_curve(const CurveFunction& q,
                                  const std::vector<double>& grid);

/// <a, b> = int a(t)^dagger b(t) dt, exact for piecewise-linear pairs.
Complex inner_product(const PiecewiseLinearFn& a, const PiecewiseLinearFn& b);
Complex inner_product(const SrvCurve& a, const SrvCurve& b);
Complex inner_product(const SrvCurve& a, const CurveFunction& b);
Complex inner_product(const CurveFunction& a, const SrvCurve& b);
Complex inner_product(const CurveFunction& a, const CurveFunction& b);

double squared_norm(const PiecewiseLinearFn& a);
double squared_norm(const SrvCurve& a);
double squared_norm(const CurveFunction& a);

struct RotationAlignment {
  double distance;   // inelastic full Procrustes distance
  Complex rotation;  // unit multiplier aligning the second curve to the first
};

/// d^2 = 1 - |<q1,q2>|^2 with optimal rotation <q1,q2>^dagger/|<q1,q2>|.
/// Both inputs must be unit-norm within 1e-8.
RotationAlignment inelastic_distance(const PiecewiseLinearFn& q1,
                                     const PiecewiseLinearFn& q2);

}  // namespace shapemean
