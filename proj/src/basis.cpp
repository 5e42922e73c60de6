#include "shapemean/basis.hpp"

#include <cmath>

#include "shapemean/errors.hpp"

namespace shapemean {

SplineBasis::SplineBasis(int order, int num_knots)
    : order_(order), num_knots_(num_knots) {
  if (order != 0 && order != 1)
    throw InvalidOrder("spline order must be 0 or 1");
  if (num_knots < 2) throw InvalidOrder("need at least 2 knots");
  m_ = (order == 0) ? num_knots - 1 : num_knots;
}

Eigen::VectorXd SplineBasis::evaluate(double t) const {
  if (t < 0.0 || t > 1.0) throw OutOfDomain("basis evaluation outside [0,1]");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(m_);
  const int intervals = num_knots_ - 1;
  const double h = 1.0 / intervals;
  int j = static_cast<int>(std::floor(t / h));
  if (j >= intervals) j = intervals - 1;  // left-closure at t = 1
  if (order_ == 0) {
    f(j) = 1.0;
  } else {
    const double local = t / h - j;
    f(j) = 1.0 - local;
    f(j + 1) = local;
  }
  return f;
}

Eigen::MatrixXd SplineBasis::gram() const {
  const int intervals = num_knots_ - 1;
  const double h = 1.0 / intervals;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m_, m_);
  if (order_ == 0) {
    g.diagonal().setConstant(h);
    return g;
  }
  // hat functions: int f_k^2 = 2h/3 (h/3 at the boundary), int f_k f_{k+1} = h/6
  for (int k = 0; k < m_; ++k) {
    const bool boundary = (k == 0 || k == m_ - 1);
    g(k, k) = boundary ? h / 3.0 : 2.0 * h / 3.0;
    if (k + 1 < m_) g(k, k + 1) = g(k + 1, k) = h / 6.0;
  }
  return g;
}

PenaltyMatrix difference_penalty(int m, int d) {
  if (d < 1 || d >= m)
    throw InvalidOrder("difference order must satisfy 1 <= d < m");
  Eigen::MatrixXd diff = Eigen::MatrixXd::Identity(m, m);
  for (int iter = 0; iter < d; ++iter) {
    const int rows = static_cast<int>(diff.rows());
    Eigen::MatrixXd next(rows - 1, m);
    for (int r = 0; r + 1 < rows; ++r)
      next.row(r) = diff.row(r + 1) - diff.row(r);
    diff = std::move(next);
  }
  return {diff.transpose() * diff, d};
}

Eigen::MatrixXd tensor_penalty(const Eigen::MatrixXd& P) {
  const int m = static_cast<int>(P.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m * m, m * m);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      out.block(a * m, b * m, m, m) += P(a, b) * eye;  // P (x) I
      if (a == b) out.block(a * m, b * m, m, m) += P;  // I (x) P
    }
  return out;
}

ConstraintTransforms constraint_transforms(int m) {
  const int n_sym = (m * m + m) / 2;
  const int n_anti = (m * m - m) / 2;
  ConstraintTransforms ct;
  ct.sym = Eigen::MatrixXd::Zero(n_sym, m * m);
  ct.anti = Eigen::MatrixXd::Zero(n_anti, m * m);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  int rs = 0, ra = 0;
  for (int g = 0; g < m; ++g)
    for (int k = g; k < m; ++k) {
      if (g == k) {
        ct.sym(rs++, k * m + g) = 1.0;
      } else {
        ct.sym(rs, k * m + g) = 1.0;  // vec position (g,k)
        ct.sym(rs, g * m + k) = 1.0;  // vec position (k,g)
        ++rs;
        ct.anti(ra, k * m + g) = inv_sqrt2;
        ct.anti(ra, g * m + k) = -inv_sqrt2;
        ++ra;
      }
    }
  return ct;
}

}  // namespace shapemean
