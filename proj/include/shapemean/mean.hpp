#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "shapemean/covsmooth.hpp"
#include "shapemean/curves.hpp"
#include "shapemean/warping.hpp"

namespace shapemean {

struct MeanFitConfig {
  int basis_order = 1;
  int knots = 13;
  int penalty_order = 2;
  double tolerance = 1e-3;
  int max_iterations = 20;
  double rho = 0.0;
  bool nugget = true;
  SmoothingSelection smoothing;  // GCV grid by default
  enum class Backend { Sparse, Dense };
  Backend backend = Backend::Sparse;
  AlignmentConfig alignment{.min_gain = 1e-3, .min_length_factor = 0.5};
  int threads = 0;  // 0: hardware concurrency
};

/// Per-curve state carried across iterations: current SRV proxy, accumulated
/// unit rotation, conditional length estimate, diagnostics.
struct CurveState {
  std::string id;
  SrvCurve srv;
  Complex rotation{1.0, 0.0};  // unit phase of u_hat
  double length = 1.0;         // L_hat(beta_i)
  bool flagged = false;        // rotation undefined at least once
  int collapsed = 0;           // segments dropped by warping
  // accumulated warp of the original sampling: node positions for every
  // original segment (weakly increasing), empty before the first Step IV
  Eigen::VectorXd warp_nodes;
};

struct ElasticMeanResult {
  Eigen::VectorXcd theta;  // mean SRV coefficients, unit G-norm
  std::shared_ptr<const SplineBasis> basis;
  EigenSystem eigen;
  CovarianceFit fit;
  std::vector<CurveState> curves;
  double sigma_sq = 0.0;
  std::vector<double> step_norms;     // ||psi^[h] - psi^[h-1]||_G, h >= 2
  std::vector<double> lambda1_trace;  // leading eigenvalue per iteration
  int iterations = 0;
  bool converged = false;
  std::vector<Complex> mean_polyline;  // Psi^{-1}(psi_hat) on a dense grid

  CurveFunction mean_function() const { return {basis, theta}; }
};

/// Single covariance pass: psi_hat = e_1, Step III rotations, no warping.
ElasticMeanResult estimate_inelastic_mean(const std::vector<SrvCurve>& curves,
                                          const MeanFitConfig& config);

/// Full Steps I-IV iteration until ||psi^[h] - psi^[h-1]||_G < tolerance or
/// max_iterations, followed by one extra Step III+IV.
ElasticMeanResult estimate_elastic_mean(const std::vector<SrvCurve>& curves,
                                        const MeanFitConfig& config);

/// Upper bound on the elastic full Procrustes distance: alternates closed-form
/// rotation alignment with warping alignment of q2's piecewise-constant proxy
/// against q1. Both inputs must be unit-norm.
double elastic_distance(const PiecewiseLinearFn& q1, const SrvCurve& q2,
                        const AlignmentConfig& config = {});
double elastic_distance(const SrvCurve& q1, const SrvCurve& q2,
                        const AlignmentConfig& config = {});

struct GroupVariance {
  std::string level;  // A1 level label
  int count = 0;
  double sigma_sq = 0.0;
};

struct VarianceDecomposition {
  double total_sigma_sq = 0.0;  // sigma^2_X over the full dataset
  std::vector<GroupVariance> groups;
  int levels_x = 0;   // |X|: distinct (A1, A2) tuples observed
  int levels_a2 = 0;  // |A2|: distinct complement tuples observed
  double r_squared = 0.0;
};

/// Group-wise elastic means with R^2_{A1} = 1 - |A2| sum_a sigma^2_{a x A2} /
/// (|X| sigma^2_X). primary/complement give each curve's A1 and A2 level
/// labels.
VarianceDecomposition variance_decomposition(
    const std::vector<SrvCurve>& curves,
    const std::vector<std::string>& primary,
    const std::vector<std::string>& complement, const MeanFitConfig& config);

}  // namespace shapemean
