#pragma once

#include <Eigen/Dense>

#include "shapemean/curves.hpp"

namespace shapemean {

/// Conditioning data for one curve: eigenfunction evaluations at the observed
/// time points, observed values, prior eigenvalues and per-point noise
/// variances. Points with zero noise variance become exact constraints.
struct ConditioningProblem {
  Eigen::MatrixXcd design;     // n* x m, E_jk = e_k(t_j)
  Eigen::VectorXcd values;     // n*
  Eigen::VectorXd eigenvalues; // m, positive (prior Lambda diagonal)
  Eigen::VectorXd noise;       // n*, tau^2(t_j) >= 0
};

/// Posterior of the score vector Z given the observations.
struct PosteriorScores {
  Eigen::VectorXcd mean;       // z_hat, length m
  Eigen::MatrixXcd cov;        // S = N S~ N^dagger, m x m, Hermitian PSD
  Eigen::VectorXcd pinned;     // deterministic part z_0
  Eigen::MatrixXcd null_basis; // N, m x (m - r_0)
  int exact_rank = 0;          // r_0
};

PosteriorScores condition(const ConditioningProblem& problem);

/// E(<Y, x> | data) = z_hat^dagger g_x for x with eigen coordinates g_x.
Complex expected_inner_product(const PosteriorScores& post,
                               const Eigen::VectorXcd& gx);

/// E(||Y||^2 | data) = tr(S) + ||z_hat||^2 (eigenfunctions are orthonormal).
double expected_squared_norm(const PosteriorScores& post);

/// E(|<Y, x>|^2 | data) = g_x^dagger S g_x + |z_hat^dagger g_x|^2.
double expected_score_magnitude_sq(const PosteriorScores& post,
                                   const Eigen::VectorXcd& gx);

}  // namespace shapemean
