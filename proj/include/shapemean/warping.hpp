#pragma once

#include <Eigen/Dense>

#include "shapemean/covsmooth.hpp"
#include "shapemean/curves.hpp"
#include "shapemean/gaussproc.hpp"

namespace shapemean {

/// Warping alignment of one piecewise-constant SRV curve to a spline mean.
/// values(j) are the (rotated, possibly blended) segment SRVs on
/// [nodes(j), nodes(j+1)).
struct AlignmentProblem {
  PiecewiseLinearFn mean;   // unit-norm psi
  Eigen::VectorXcd values;  // n
  Eigen::VectorXd nodes;    // n+1
  // optional incumbent warp (n+1, weakly increasing): the result keeps these
  // nodes unless the optimum beats their objective by min_gain. Empty means
  // the identity (problem.nodes) is the incumbent.
  Eigen::VectorXd reference;
};

struct AlignmentConfig {
  int grid_size = 201;
  bool refine = true;
  double collapse_tol = 1e-8;
  // keep the identity warp unless the optimum beats it by more than this;
  // coarse values stabilize the Steps I-IV fixed point against grid jitter
  double min_gain = 1e-9;
  // per-segment trust region: each new length must be >= factor * old length,
  // bounding the w* reweighting within one call (0 disables). Cumulative
  // warps across repeated calls remain unbounded, so collapse is still
  // reachable as a limit.
  double min_length_factor = 0.0;
};

struct AlignmentResult {
  Eigen::VectorXd nodes;      // surviving nodes, strictly increasing
  Eigen::VectorXd times;      // midpoints of the surviving intervals
  Eigen::VectorXcd values;    // reweighted w*_j q_j
  std::vector<int> kept;      // surviving segment indices
  Eigen::VectorXd full_nodes; // all n+1 nodes, weakly increasing
  double objective = 0.0;
  bool degenerate = false;    // all gains zero, identity returned
};

/// int_a^b max(Re(psi(t)^dagger q), 0)^2 dt, exact piecewise-cubic form.
double segment_gain(const PiecewiseLinearFn& psi, Complex q, double a,
                    double b);

/// Maximizes sum_j sqrt((s_j - s_{j-1}) * segment_gain(psi, q_j, s'_{j-1},
/// s'_j)) over monotone node sequences via grid dynamic programming plus one
/// golden-section refinement pass.
AlignmentResult align(const AlignmentProblem& problem,
                      const AlignmentConfig& config = {});

/// q_hat_j = rotation * (rho * q_tilde(t_j) + (1-rho) * q_j) with the
/// normalized posterior reconstruction q_tilde = (z/||z||)^T e.
Eigen::VectorXcd blend_reconstruction(const SrvCurve& curve,
                                      const EigenSystem& eigen,
                                      const PosteriorScores& post, double rho,
                                      Complex rotation);

}  // namespace shapemean
