#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "shapemean/basis.hpp"
#include "shapemean/curves.hpp"

namespace shapemean {

/// Pairwise response products y_ij^dagger y_ij" with predictor pairs,
/// flattened over all curves.
struct CrossProductRows {
  std::vector<double> s;          // t_ij
  std::vector<double> t;          // t_ij"
  std::vector<Complex> response;  // y_ij^dagger y_ij"
  std::vector<char> diagonal;     // j == j"

  std::size_t size() const { return response.size(); }
};

CrossProductRows assemble_crossproducts(const std::vector<SrvCurve>& curves);

struct SmoothingSelection {
  enum class Mode { Fixed, GcvGrid };
  Mode mode = Mode::GcvGrid;
  double fixed_eta = 0.0;  // used in Fixed mode, both parts
  // GCV grid: log-equidistant, points_per_decade over [eta_min, eta_max]
  double eta_min = 1e-4;
  double eta_max = 1e4;
  int points_per_decade = 10;

  static SmoothingSelection fixed(double eta) {
    SmoothingSelection s;
    s.mode = Mode::Fixed;
    s.fixed_eta = eta;
    return s;
  }
};

struct CovarianceFit {
  Eigen::MatrixXcd xi;     // Hermitian m x m coefficient matrix
  Eigen::VectorXd nugget;  // nugget coefficients (size 1: constant, 0: off)
  double eta_re = 0.0;
  double eta_im = 0.0;
  double eta_tau = 0.0;
  double residual_sse = 0.0;
  long rows = 0;

  /// Fitted nugget variance at t, clamped to >= 0.
  double nugget_value(double t) const;
};

/// Penalized least-squares fit of the Hermitian tensor-product surface to
/// cross-product responses. Real part carries the nugget columns on diagonal
/// rows, imaginary part has none (diagonal imaginary responses are zero).
CovarianceFit fit_sparse(const CrossProductRows& rows, const SplineBasis& basis,
                         const PenaltyMatrix& penalty, bool nugget,
                         const SmoothingSelection& smoothing);

/// Dense-case alternative: per-curve penalized coefficient fits, then
/// Xi = (1/n) sum conj(theta_i) theta_i^T (covariance convention
/// C(s,t) = E[Y^dagger(s) Y(t)]). Residual variance gives a constant
/// nugget estimate.
CovarianceFit fit_dense(const std::vector<SrvCurve>& curves,
                        const SplineBasis& basis, const PenaltyMatrix& penalty,
                        const SmoothingSelection& smoothing);

/// Eigen-system of the fitted covariance surface with respect to the Gram
/// inner product. Coefficient columns are G-orthonormal and reconstruct the
/// positive part of the surface: f(s)^T Xi_+ f(t) = sum_k l_k e_k(s)^dag e_k(t).
struct EigenSystem {
  Eigen::VectorXd values;    // descending, strictly positive components only
  Eigen::MatrixXcd vectors;  // m x k coefficient columns theta_k
  std::shared_ptr<const SplineBasis> basis;

  int count() const { return static_cast<int>(values.size()); }
  double total() const { return values.sum(); }

  /// (e_1(t), ..., e_k(t))
  Eigen::VectorXcd evaluate(double t) const;
  CurveFunction function(int k) const;
};

EigenSystem eigendecompose(const Eigen::MatrixXcd& xi, const Eigen::MatrixXd& G,
                           std::shared_ptr<const SplineBasis> basis);

}  // namespace shapemean
