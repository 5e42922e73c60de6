#include "shapemean/covsmooth.hpp"

#include <algorithm>
#include <cmath>

#include "shapemean/errors.hpp"

namespace shapemean {

namespace {

// Penalized normal equations with precomputed cross products.
struct PenalizedLs {
  Eigen::MatrixXd ata;
  Eigen::MatrixXd aty;  // one column per right-hand side
  Eigen::MatrixXd yty;
  long n_rows = 0;

  Eigen::MatrixXd solve(const Eigen::MatrixXd& pen, double eta, double* edf,
                        Eigen::VectorXd* rss) const {
    const int p = static_cast<int>(ata.rows());
    Eigen::MatrixXd m = ata + eta * pen;
    const double scale = std::max(m.trace(), 1e-300);
    double jitter = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(
          m + jitter * Eigen::MatrixXd::Identity(p, p));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const Eigen::MatrixXd x = ldlt.solve(aty);
        if (x.allFinite()) {
          if (edf) *edf = ldlt.solve(ata).trace();
          if (rss) {
            rss->resize(yty.cols());
            for (int c = 0; c < yty.cols(); ++c)
              (*rss)(c) = std::max(
                  0.0, yty(c, c) - 2.0 * x.col(c).dot(aty.col(c)) +
                           x.col(c).dot(ata * x.col(c)));
          }
          return x;
        }
      }
      jitter = (jitter == 0.0) ? 1e-10 * scale : jitter * 100.0;
    }
    throw SingularDesign(
        "penalized normal equations numerically singular (trace " +
        std::to_string(scale) + ", last jitter " + std::to_string(jitter) +
        ")");
  }

  // GCV over the eta candidates, returns the winner.
  double select_gcv(const Eigen::MatrixXd& pen,
                    const SmoothingSelection& sm) const {
    std::vector<double> etas;
    const double decades = std::log10(sm.eta_max / sm.eta_min);
    const int steps =
        std::max(1, static_cast<int>(std::lround(decades * sm.points_per_decade)));
    for (int i = 0; i <= steps; ++i)
      etas.push_back(sm.eta_min *
                     std::pow(10.0, decades * static_cast<double>(i) / steps));
    double best_eta = 0.0, best_score = std::numeric_limits<double>::infinity();
    for (double eta : etas) {
      double edf = 0.0;
      Eigen::VectorXd rss;
      try {
        solve(pen, eta, &edf, &rss);
      } catch (const SingularDesign&) {
        continue;
      }
      const double n = static_cast<double>(n_rows);
      if (n - edf <= 1.0) continue;
      const double score = n * rss.sum() / ((n - edf) * (n - edf));
      if (score < best_score) {
        best_score = score;
        best_eta = eta;
      }
    }
    if (!std::isfinite(best_score))
      throw SingularDesign("no feasible smoothing parameter on the GCV grid");
    return best_eta;
  }
};

int sym_index(int g, int k, int m) {
  // enumeration order of constraint_transforms: g ascending, k = g..m-1
  const int lo = std::min(g, k), hi = std::max(g, k);
  return lo * m - lo * (lo - 1) / 2 + (hi - lo);
}

int anti_index(int g, int k, int m) {
  const int lo = std::min(g, k), hi = std::max(g, k);
  return lo * (m - 1) - lo * (lo - 1) / 2 + (hi - lo - 1);
}

}  // namespace

CrossProductRows assemble_crossproducts(const std::vector<SrvCurve>& curves) {
  CrossProductRows rows;
  std::size_t total = 0;
  for (const SrvCurve& c : curves)
    total += static_cast<std::size_t>(c.size()) * c.size();
  rows.s.reserve(total);
  rows.t.reserve(total);
  rows.response.reserve(total);
  rows.diagonal.reserve(total);
  for (const SrvCurve& c : curves)
    for (int j = 0; j < c.size(); ++j)
      for (int jj = 0; jj < c.size(); ++jj) {
        rows.s.push_back(c.times(j));
        rows.t.push_back(c.times(jj));
        rows.response.push_back(std::conj(c.values(j)) * c.values(jj));
        rows.diagonal.push_back(j == jj ? 1 : 0);
      }
  return rows;
}

double CovarianceFit::nugget_value(double) const {
  if (nugget.size() == 0) return 0.0;
  return std::max(0.0, nugget(0));
}

CovarianceFit fit_sparse(const CrossProductRows& rows, const SplineBasis& basis,
                         const PenaltyMatrix& penalty, bool nugget,
                         const SmoothingSelection& smoothing) {
  const int m = basis.size();
  const int n_sym = (m * m + m) / 2;
  const int n_anti = (m * m - m) / 2;
  const int n_tau = nugget ? 1 : 0;
  const long n = static_cast<long>(rows.size());

  Eigen::MatrixXd a_re(n, n_sym + n_tau);
  Eigen::MatrixXd a_im(n, std::max(n_anti, 1));
  a_re.setZero();
  a_im.setZero();
  Eigen::VectorXd y_re(n), y_im(n);
  for (long r = 0; r < n; ++r) {
    const Eigen::VectorXd fs = basis.evaluate(rows.s[r]);
    const Eigen::VectorXd ft = basis.evaluate(rows.t[r]);
    for (int g = 0; g < m; ++g) {
      if (fs(g) == 0.0) continue;
      for (int k = 0; k < m; ++k) {
        if (ft(k) == 0.0) continue;
        const double w = fs(g) * ft(k);
        a_re(r, sym_index(g, k, m)) += w;
        if (g < k)
          a_im(r, anti_index(g, k, m)) += w / std::sqrt(2.0);
        else if (g > k)
          a_im(r, anti_index(g, k, m)) -= w / std::sqrt(2.0);
      }
    }
    if (nugget && rows.diagonal[r]) a_re(r, n_sym) = 1.0;
    y_re(r) = rows.response[r].real();
    y_im(r) = rows.response[r].imag();
  }

  const ConstraintTransforms ct = constraint_transforms(m);
  const Eigen::MatrixXd p_kron = tensor_penalty(penalty.P);
  Eigen::MatrixXd pen_re = Eigen::MatrixXd::Zero(n_sym + n_tau, n_sym + n_tau);
  pen_re.topLeftCorner(n_sym, n_sym) = ct.sym * p_kron * ct.sym.transpose();
  // constant nugget: P_tau = 0, the nugget column stays unpenalized
  const Eigen::MatrixXd pen_im =
      (n_anti > 0) ? Eigen::MatrixXd(ct.anti * p_kron * ct.anti.transpose())
                   : Eigen::MatrixXd::Zero(1, 1);

  PenalizedLs ls_re{a_re.transpose() * a_re, a_re.transpose() * y_re,
                    Eigen::MatrixXd::Constant(1, 1, y_re.squaredNorm()), n};
  PenalizedLs ls_im{a_im.transpose() * a_im, a_im.transpose() * y_im,
                    Eigen::MatrixXd::Constant(1, 1, y_im.squaredNorm()), n};

  double eta_re, eta_im;
  if (smoothing.mode == SmoothingSelection::Mode::Fixed) {
    eta_re = eta_im = smoothing.fixed_eta;
  } else {
    eta_re = ls_re.select_gcv(pen_re, smoothing);
    eta_im = (n_anti > 0) ? ls_im.select_gcv(pen_im, smoothing) : 0.0;
  }

  Eigen::VectorXd rss_re, rss_im;
  const Eigen::VectorXd x_re = ls_re.solve(pen_re, eta_re, nullptr, &rss_re);
  Eigen::VectorXd x_im = Eigen::VectorXd::Zero(std::max(n_anti, 1));
  if (n_anti > 0) x_im = ls_im.solve(pen_im, eta_im, nullptr, &rss_im);

  const Eigen::VectorXd vec_re =
      ct.sym.transpose() * x_re.head(n_sym);  // column-stacked Re(Xi)
  Eigen::VectorXd vec_im = Eigen::VectorXd::Zero(m * m);
  if (n_anti > 0) vec_im = ct.anti.transpose() * x_im.head(n_anti);

  CovarianceFit fit;
  fit.xi.resize(m, m);
  for (int k = 0; k < m; ++k)
    for (int g = 0; g < m; ++g)
      fit.xi(g, k) = Complex(vec_re(k * m + g), vec_im(k * m + g));
  if (nugget) {
    fit.nugget.resize(1);
    fit.nugget(0) = x_re(n_sym);
  }
  fit.eta_re = eta_re;
  fit.eta_im = eta_im;
  fit.eta_tau = eta_re;
  fit.residual_sse = rss_re.sum() + (n_anti > 0 ? rss_im.sum() : 0.0);
  fit.rows = n;
  return fit;
}

CovarianceFit fit_dense(const std::vector<SrvCurve>& curves,
                        const SplineBasis& basis, const PenaltyMatrix& penalty,
                        const SmoothingSelection& smoothing) {
  const int m = basis.size();
  double eta = (smoothing.mode == SmoothingSelection::Mode::Fixed)
                   ? smoothing.fixed_eta
                   : -1.0;  // selected on the first curve below
  Eigen::MatrixXcd xi = Eigen::MatrixXcd::Zero(m, m);
  double sse = 0.0;
  long n_obs = 0;
  for (const SrvCurve& c : curves) {
    const int ni = c.size();
    Eigen::MatrixXd design(ni, m);
    for (int j = 0; j < ni; ++j) design.row(j) = basis.evaluate(c.times(j));
    Eigen::MatrixXd aty(m, 2);
    aty.col(0) = design.transpose() * c.values.real();
    aty.col(1) = design.transpose() * c.values.imag();
    Eigen::MatrixXd yty = Eigen::MatrixXd::Zero(2, 2);
    yty(0, 0) = c.values.real().squaredNorm();
    yty(1, 1) = c.values.imag().squaredNorm();
    PenalizedLs ls{design.transpose() * design, aty, yty,
                   static_cast<long>(2 * ni)};
    if (eta < 0.0) eta = ls.select_gcv(penalty.P, smoothing);
    Eigen::VectorXd rss;
    const Eigen::MatrixXd sol = ls.solve(penalty.P, eta, nullptr, &rss);
    Eigen::VectorXcd theta =
        sol.col(0).cast<Complex>() + Complex(0.0, 1.0) * sol.col(1);
    // C(s,t) = E(Y^dagger(s) Y(t)) => Xi_gk = E(conj(theta_g) theta_k)
    xi += theta.conjugate() * theta.transpose();
    sse += rss.sum();
    n_obs += ni;
  }
  xi /= static_cast<double>(curves.size());

  CovarianceFit fit;
  fit.xi = 0.5 * (xi + xi.adjoint());  // exact Hermitian symmetrization
  fit.nugget.resize(1);
  const double dof =
      std::max(1.0, static_cast<double>(n_obs) -
                        static_cast<double>(curves.size() * m));
  fit.nugget(0) = sse / dof;
  fit.eta_re = fit.eta_im = eta;
  fit.residual_sse = sse;
  fit.rows = n_obs;
  return fit;
}

Eigen::VectorXcd EigenSystem::evaluate(double t) const {
  return vectors.transpose() * basis->evaluate(t).cast<Complex>();
}

CurveFunction EigenSystem::function(int k) const {
  return CurveFunction{basis, vectors.col(k)};
}

EigenSystem eigendecompose(const Eigen::MatrixXcd& xi, const Eigen::MatrixXd& G,
                           std::shared_ptr<const SplineBasis> basis) {
  const int m = static_cast<int>(xi.rows());
  const double scale = std::max(xi.cwiseAbs().maxCoeff(), 1e-300);
  if ((xi - xi.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw NotHermitian("covariance coefficient matrix is not Hermitian");
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw NotSPD("Gram matrix is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();

  // Surface reconstruction Xi = sum_k l_k conj(theta_k) theta_k^T with
  // G-orthonormal theta is equivalent to the Hermitian eigenproblem of
  // W = L^T conj(Xi) L, theta_k = L^{-T} phi_k.
  const Eigen::MatrixXcd w =
      l.transpose().cast<Complex>() * xi.conjugate() * l.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (w + w.adjoint()));
  if (es.info() != Eigen::Success)
    throw NumericError("Hermitian eigendecomposition failed");

  int kept = 0;
  for (int i = 0; i < m; ++i)
    if (es.eigenvalues()(i) > 0.0) ++kept;

  EigenSystem sys;
  sys.basis = std::move(basis);
  sys.values.resize(kept);
  sys.vectors.resize(m, kept);
  const Eigen::MatrixXd lt = l.transpose();
  for (int out = 0; out < kept; ++out) {
    const int in = m - 1 - out;  // Eigen sorts ascending
    sys.values(out) = es.eigenvalues()(in);
    Eigen::VectorXcd phi = es.eigenvectors().col(in);
    sys.vectors.col(out) =
        lt.triangularView<Eigen::Upper>().solve(phi.real()).cast<Complex>() +
        Complex(0.0, 1.0) *
            lt.triangularView<Eigen::Upper>().solve(phi.imag()).cast<Complex>();
  }
  return sys;
}

}  // namespace shapemean
