#include "shapemean/gaussproc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapemean/errors.hpp"

namespace shapemean {

namespace {

Eigen::MatrixXcd robust_inverse(const Eigen::MatrixXcd& h, const char* what) {
  const int p = static_cast<int>(h.rows());
  const double scale = std::max(h.cwiseAbs().maxCoeff(), 1e-300);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 5; ++attempt) {
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(
        h + jitter * Eigen::MatrixXcd::Identity(p, p));
    if (ldlt.info() == Eigen::Success) {
      Eigen::MatrixXcd inv = ldlt.solve(Eigen::MatrixXcd::Identity(p, p));
      if (inv.allFinite()) return inv;
    }
    jitter = (jitter == 0.0) ? 1e-12 * scale : jitter * 100.0;
  }
  throw RankDeficiency(std::string(what) + " system singular beyond jitter");
}

}  // namespace

PosteriorScores condition(const ConditioningProblem& problem) {
  const int m_full = static_cast<int>(problem.eigenvalues.size());
  const int n_star = static_cast<int>(problem.values.size());

  // components below the variance floor stay at their prior
  const double floor =
      (m_full > 0) ? 1e-12 * problem.eigenvalues.maxCoeff() : 0.0;
  std::vector<int> active;
  for (int k = 0; k < m_full; ++k)
    if (problem.eigenvalues(k) >= floor && problem.eigenvalues(k) > 0.0)
      active.push_back(k);
  const int m = static_cast<int>(active.size());

  PosteriorScores post;
  post.mean = Eigen::VectorXcd::Zero(m_full);
  post.cov = Eigen::MatrixXcd::Zero(m_full, m_full);
  post.pinned = Eigen::VectorXcd::Zero(m_full);
  for (int k = 0; k < m_full; ++k)
    post.cov(k, k) = problem.eigenvalues(k);  // prior by default

  if (m == 0) return post;
  if (n_star == 0) {
    post.null_basis = Eigen::MatrixXcd::Identity(m_full, m_full);
    return post;
  }

  Eigen::MatrixXcd e_active(n_star, m);
  Eigen::VectorXd lambda(m);
  for (int k = 0; k < m; ++k) {
    e_active.col(k) = problem.design.col(active[k]);
    lambda(k) = problem.eigenvalues(active[k]);
  }

  std::vector<int> zero_rows, pos_rows;
  for (int j = 0; j < n_star; ++j)
    (problem.noise(j) > 0.0 ? pos_rows : zero_rows).push_back(j);
  const int n0 = static_cast<int>(zero_rows.size());
  const int np = static_cast<int>(pos_rows.size());

  Eigen::MatrixXcd e0(n0, m), ep(np, m);
  Eigen::VectorXcd y0(n0), yp(np);
  Eigen::VectorXd tau(np);
  for (int j = 0; j < n0; ++j) {
    e0.row(j) = e_active.row(zero_rows[j]);
    y0(j) = problem.values(zero_rows[j]);
  }
  for (int j = 0; j < np; ++j) {
    ep.row(j) = e_active.row(pos_rows[j]);
    yp(j) = problem.values(pos_rows[j]);
    tau(j) = problem.noise(pos_rows[j]);
  }

  // exact-constraint split: columns of M span the conjugate row space of E_0,
  // columns of N its null space (E_0 N = 0)
  int r0 = 0;
  Eigen::MatrixXcd basis_m(m, 0), basis_n = Eigen::MatrixXcd::Identity(m, m);
  Eigen::VectorXcd z0 = Eigen::VectorXcd::Zero(m);
  if (n0 > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(e0.adjoint());
    const Eigen::MatrixXcd r_mat =
        qr.matrixQR().topRows(std::min(m, n0)).triangularView<Eigen::Upper>();
    const double r_max = r_mat.diagonal().cwiseAbs().maxCoeff();
    for (int j = 0; j < r_mat.diagonal().size(); ++j)
      if (std::abs(r_mat(j, j)) > 1e-10 * r_max) ++r0;
    const Eigen::MatrixXcd q = qr.householderQ();
    basis_m = q.leftCols(r0);
    basis_n = q.rightCols(m - r0);

    const Eigen::MatrixXcd e0m = e0 * basis_m;
    const Eigen::MatrixXcd inner = robust_inverse(e0m.adjoint() * e0m,
                                                  "exact-constraint");
    z0 = basis_m * (inner * (e0m.adjoint() * y0));
  }

  // posterior over the free directions
  Eigen::MatrixXcd s_tilde(0, 0);
  Eigen::VectorXcd z_plus(0);
  if (m - r0 > 0) {
    Eigen::MatrixXcd info = Eigen::MatrixXcd::Zero(m, m);
    Eigen::VectorXcd rhs(m);
    for (int k = 0; k < m; ++k) {
      info(k, k) = 1.0 / lambda(k);
      rhs(k) = -z0(k) / lambda(k);
    }
    if (np > 0) {
      Eigen::MatrixXcd ept = ep.adjoint();
      for (int j = 0; j < np; ++j) ept.col(j) /= tau(j);
      info += ept * ep;
      rhs += ept * (yp - ep * z0);
    }
    s_tilde = robust_inverse(basis_n.adjoint() * info * basis_n, "posterior");
    z_plus = s_tilde * (basis_n.adjoint() * rhs);
  }

  const Eigen::VectorXcd z_hat =
      (m - r0 > 0) ? Eigen::VectorXcd(basis_n * z_plus + z0) : z0;
  Eigen::MatrixXcd cov_active = Eigen::MatrixXcd::Zero(m, m);
  if (m - r0 > 0) {
    cov_active = basis_n * s_tilde * basis_n.adjoint();
    cov_active = 0.5 * (cov_active + cov_active.adjoint());
  }

  // embed back into the full component set
  post.cov.setZero();
  post.null_basis = Eigen::MatrixXcd::Zero(m_full, m - r0);
  post.exact_rank = r0;
  for (int k = 0; k < m; ++k) {
    post.mean(active[k]) = z_hat(k);
    post.pinned(active[k]) = z0(k);
    for (int l = 0; l < m; ++l)
      post.cov(active[k], active[l]) = cov_active(k, l);
    for (int c = 0; c < m - r0; ++c)
      post.null_basis(active[k], c) = basis_n(k, c);
  }
  for (int k = 0; k < m_full; ++k)
    if (std::find(active.begin(), active.end(), k) == active.end())
      post.cov(k, k) = problem.eigenvalues(k);
  return post;
}

Complex expected_inner_product(const PosteriorScores& post,
                               const Eigen::VectorXcd& gx) {
  return post.mean.dot(gx);  // z^dagger g_x
}

double expected_squared_norm(const PosteriorScores& post) {
  return post.cov.real().trace() + post.mean.squaredNorm();
}

double expected_score_magnitude_sq(const PosteriorScores& post,
                                   const Eigen::VectorXcd& gx) {
  const double quad = (gx.adjoint() * post.cov * gx)(0, 0).real();
  return quad + std::norm(post.mean.dot(gx));
}

}  // namespace shapemean
