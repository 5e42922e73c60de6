#pragma once

#include <Eigen/Dense>
#include <memory>

namespace shapemean {

/// Real B-spline basis on [0,1] with equidistant knots.
///
/// order 0: indicator functions of the knot intervals (m = knots-1),
/// order 1: hat functions centered at the knots (m = knots).
/// Both form a partition of unity.
class SplineBasis {
 public:
  SplineBasis(int order, int num_knots);

  int order() const { return order_; }
  int size() const { return m_; }
  int num_knots() const { return num_knots_; }
  double knot(int i) const { return static_cast<double>(i) / (num_knots_ - 1); }

  /// Basis vector f(t), right-continuous at knots, left-closed at t=1.
  Eigen::VectorXd evaluate(double t) const;

  /// Exact Gram matrix G = {<f_g, f_k>}.
  Eigen::MatrixXd gram() const;

 private:
  int order_;
  int num_knots_;
  int m_;
};

struct PenaltyMatrix {
  Eigen::MatrixXd P;  // D^T D for the d-th order difference matrix D
  int difference_order;
};

PenaltyMatrix difference_penalty(int m, int d);

/// P_kron = P (x) I_m + I_m (x) P, for the m^2-dimensional tensor-product
/// coefficient vector in column-stacking (vec) order.
Eigen::MatrixXd tensor_penalty(const Eigen::MatrixXd& P);

/// Maps between free coefficients of the symmetric/antisymmetric parts of an
/// m x m matrix and its column-stacked vec.
///
/// vec(Re Xi) = sym^T xi_re,  vec(Im Xi) = anti^T xi_im.
struct ConstraintTransforms {
  Eigen::MatrixXd sym;   // (m^2+m)/2 x m^2
  Eigen::MatrixXd anti;  // (m^2-m)/2 x m^2
};

ConstraintTransforms constraint_transforms(int m);

}  // namespace shapemean
