#include "shapemean/mean.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include "shapemean/errors.hpp"
#include "shapemean/gaussproc.hpp"

namespace shapemean {

namespace {

constexpr int kPolylinePoints = 201;
constexpr double kScoreTol = 1e-12;  // |z_1| below which rotation is undefined

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  int t = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(1, std::min(t, n));
  if (t == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += t) body(i);
    });
  for (auto& th : pool) th.join();
}

struct CovariancePass {
  CovarianceFit fit;
  EigenSystem eigen;
};

CovariancePass covariance_pass(const std::vector<SrvCurve>& curves,
                               const std::shared_ptr<const SplineBasis>& basis,
                               const PenaltyMatrix& penalty,
                               const MeanFitConfig& config) {
  CovariancePass pass;
  if (config.backend == MeanFitConfig::Backend::Dense) {
    pass.fit = fit_dense(curves, *basis, penalty, config.smoothing);
  } else {
    const CrossProductRows rows = assemble_crossproducts(curves);
    pass.fit = fit_sparse(rows, *basis, penalty, config.nugget,
                          config.smoothing);
  }
  pass.eigen = eigendecompose(pass.fit.xi, basis->gram(), basis);
  return pass;
}

PosteriorScores condition_curve(const SrvCurve& srv, const EigenSystem& eigen,
                                const CovarianceFit& fit, bool nugget) {
  const int n = srv.size();
  const int k = eigen.count();
  ConditioningProblem problem;
  problem.design.resize(n, k);
  problem.values = srv.values;
  problem.eigenvalues = eigen.values;
  problem.noise.resize(n);
  for (int j = 0; j < n; ++j) {
    problem.design.row(j) = eigen.evaluate(srv.times(j)).transpose();
    problem.noise(j) = nugget ? fit.nugget_value(srv.times(j)) : 0.0;
  }
  return condition(problem);
}

// Step III: conditional rotation and length per curve
void rotation_step(std::vector<CurveState>& states, const EigenSystem& eigen,
                   const CovarianceFit& fit, const MeanFitConfig& config,
                   std::vector<PosteriorScores>* posteriors) {
  const int n = static_cast<int>(states.size());
  posteriors->resize(n);
  parallel_for(n, config.threads, [&](int i) {
    CurveState& st = states[i];
    const PosteriorScores post =
        condition_curve(st.srv, eigen, fit, config.nugget);
    const Complex z1 = post.mean(0);
    st.length = std::max(expected_squared_norm(post), 1e-12);
    if (std::abs(z1) > kScoreTol) {
      // accumulate: z1 is the score of the current (already rotated) proxy,
      // so the increment composes with the rotation applied so far
      st.rotation *= std::conj(z1) / std::abs(z1);
    } else {
      st.flagged = true;  // keep the previous rotation
    }
    (*posteriors)[i] = post;
  });
}

// Step IV: warping alignment against psi. The warp is recomputed from the
// original sampling each iteration (the composition of monotone warps is a
// monotone warp, so the search space is identical), which keeps the w*
// reweighting bounded by a single warp instead of compounding across
// iterations. st.rotation carries the accumulated Step III phase.
void warping_step(std::vector<CurveState>& states,
                  const std::vector<SrvCurve>& originals,
                  const EigenSystem& eigen, const Eigen::VectorXcd& theta,
                  const MeanFitConfig& config,
                  const std::vector<PosteriorScores>& posteriors) {
  const CurveFunction psi{eigen.basis, theta};
  const PiecewiseLinearFn psi_pl = to_piecewise(psi);
  const int n = static_cast<int>(states.size());
  parallel_for(n, config.threads, [&](int i) {
    CurveState& st = states[i];
    const SrvCurve& orig = originals[i];
    const Complex u_full = st.rotation / std::sqrt(st.length);
    AlignmentProblem problem;
    problem.mean = psi_pl;
    problem.nodes = orig.nodes;
    problem.values =
        blend_reconstruction(orig, eigen, posteriors[i], config.rho, u_full);
    problem.reference = st.warp_nodes;  // incumbent from the last iteration
    const AlignmentResult res = align(problem, config.alignment);
    st.warp_nodes = res.full_nodes;

    const int r = static_cast<int>(res.kept.size());
    SrvCurve next;
    next.nodes = res.nodes;
    next.times = res.times;
    next.values.resize(r);
    next.length_estimate = orig.length_estimate;
    for (int s = 0; s < r; ++s) {
      const int j = res.kept[s];
      const double w_old = orig.nodes(j + 1) - orig.nodes(j);
      const double w_new = res.nodes(s + 1) - res.nodes(s);
      next.values(s) = std::sqrt(w_old / w_new) * u_full * orig.values(j);
    }
    // exact re-normalization: unit norm is definitional for the stored
    // curves, and L_hat estimation error must not feed back into the fit
    const double nrm = std::sqrt(squared_norm(next));
    if (nrm > 0.0) next.values /= nrm;
    st.collapsed = orig.size() - r;
    st.srv = std::move(next);
  });
}

double phase_fix(Eigen::VectorXcd& theta, const Eigen::VectorXcd& prev,
                 const Eigen::MatrixXd& gram) {
  // <psi_prev, psi> = prev^dagger G theta; rotate theta to make it positive
  const Complex ip = (prev.adjoint() * gram * theta)(0, 0);
  if (std::abs(ip) > 0.0) theta *= std::conj(ip) / std::abs(ip);
  const Eigen::VectorXcd d = theta - prev;
  return std::sqrt(std::abs((d.adjoint() * gram * d)(0, 0).real()));
}

double sigma_from_eigen(const EigenSystem& eigen,
                        MeanFitConfig::Backend backend) {
  if (eigen.count() == 0) return 1.0;
  const double s = (backend == MeanFitConfig::Backend::Dense)
                       ? 1.0 - eigen.values(0)
                       : 1.0 - eigen.values(0) / eigen.total();
  return std::clamp(s, 0.0, 1.0);
}

// rotate psi so that the reconstructed chord beta(1) - beta(0) is positive-real
void anchor_phase(ElasticMeanResult& result) {
  std::vector<double> grid(kPolylinePoints);
  for (int i = 0; i < kPolylinePoints; ++i)
    grid[i] = static_cast<double>(i) / (kPolylinePoints - 1);
  result.mean_polyline = srv_to_curve(result.mean_function(), grid);
  const Complex chord = result.mean_polyline.back() -
                        result.mean_polyline.front();
  if (std::abs(chord) > 1e-12) {
    const Complex u = std::conj(chord) / std::abs(chord);
    result.theta *= u;
    for (Complex& p : result.mean_polyline) p *= u;
    for (CurveState& st : result.curves) st.rotation *= u;
  }
}

std::vector<CurveState> initial_states(const std::vector<SrvCurve>& curves,
                                       int min_segments) {
  if (curves.size() < 2)
    throw DataError("mean estimation needs at least 2 curves");
  std::vector<CurveState> states(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (curves[i].size() < min_segments)
      throw TooFewPoints("curve " + std::to_string(i) + " has fewer than " +
                         std::to_string(min_segments + 1) + " points");
    states[i].id = std::to_string(i);
    states[i].srv = curves[i];
  }
  return states;
}

}  // namespace

ElasticMeanResult estimate_inelastic_mean(const std::vector<SrvCurve>& curves,
                                          const MeanFitConfig& config) {
  auto basis =
      std::make_shared<const SplineBasis>(config.basis_order, config.knots);
  const PenaltyMatrix penalty =
      difference_penalty(basis->size(), config.penalty_order);

  ElasticMeanResult result;
  result.basis = basis;
  result.curves = initial_states(curves, 1);

  std::vector<SrvCurve> current(curves);
  CovariancePass pass = covariance_pass(current, basis, penalty, config);
  result.fit = std::move(pass.fit);
  result.eigen = std::move(pass.eigen);
  result.theta = result.eigen.vectors.col(0);
  result.lambda1_trace.push_back(result.eigen.values(0));
  result.iterations = 1;
  result.converged = true;
  result.sigma_sq = sigma_from_eigen(result.eigen, config.backend);

  std::vector<PosteriorScores> posteriors;
  rotation_step(result.curves, result.eigen, result.fit, config, &posteriors);
  anchor_phase(result);
  return result;
}

ElasticMeanResult estimate_elastic_mean(const std::vector<SrvCurve>& curves,
                                        const MeanFitConfig& config) {
  auto basis =
      std::make_shared<const SplineBasis>(config.basis_order, config.knots);
  const PenaltyMatrix penalty =
      difference_penalty(basis->size(), config.penalty_order);
  const Eigen::MatrixXd gram = basis->gram();

  ElasticMeanResult result;
  result.basis = basis;
  result.curves = initial_states(curves, 2);

  Eigen::VectorXcd theta_prev;
  for (int h = 1; h <= config.max_iterations; ++h) {
    std::vector<SrvCurve> current;
    current.reserve(result.curves.size());
    for (const CurveState& st : result.curves) current.push_back(st.srv);

    CovariancePass pass = covariance_pass(current, basis, penalty, config);
    result.fit = std::move(pass.fit);
    result.eigen = std::move(pass.eigen);
    result.theta = result.eigen.vectors.col(0);
    result.lambda1_trace.push_back(result.eigen.values(0));
    result.iterations = h;

    if (h > 1) {
      const double diff = phase_fix(result.theta, theta_prev, gram);
      result.step_norms.push_back(diff);
      if (diff < config.tolerance) {
        result.converged = true;
        break;
      }
    }
    theta_prev = result.theta;
    if (h == config.max_iterations) break;

    std::vector<PosteriorScores> posteriors;
    rotation_step(result.curves, result.eigen, result.fit, config,
                  &posteriors);
    warping_step(result.curves, curves, result.eigen, result.theta, config,
                 posteriors);
  }

  // final Step III+IV against the converged mean
  std::vector<PosteriorScores> posteriors;
  rotation_step(result.curves, result.eigen, result.fit, config, &posteriors);
  warping_step(result.curves, curves, result.eigen, result.theta, config,
               posteriors);

  result.sigma_sq = sigma_from_eigen(result.eigen, config.backend);
  anchor_phase(result);
  return result;
}

double elastic_distance(const PiecewiseLinearFn& q1, const SrvCurve& q2,
                        const AlignmentConfig& config) {
  constexpr double kNormTol = 1e-8;
  if (std::abs(squared_norm(q1) - 1.0) > kNormTol ||
      std::abs(squared_norm(q2) - 1.0) > kNormTol)
    throw NotNormalized("elastic_distance requires unit-norm inputs");

  SrvCurve cur = q2;
  double best = std::abs(inner_product(q1, to_piecewise(cur)));
  for (int iter = 0; iter < 10; ++iter) {
    const PiecewiseLinearFn pl = to_piecewise(cur);
    const Complex ip = inner_product(q1, pl);
    const Complex u =
        (std::abs(ip) > 0.0) ? std::conj(ip) / std::abs(ip) : Complex(1.0, 0.0);
    AlignmentProblem problem;
    problem.mean = q1;
    problem.values = u * cur.values;
    problem.nodes = cur.nodes;
    const AlignmentResult res = align(problem, config);
    cur.nodes = res.nodes;
    cur.times = res.times;
    cur.values = res.values;
    const double mag = std::abs(inner_product(q1, to_piecewise(cur)));
    if (mag <= best + 1e-12) {
      best = std::max(best, mag);
      break;
    }
    best = mag;
  }
  best = std::min(best, 1.0);
  return std::sqrt(1.0 - best * best);
}

double elastic_distance(const SrvCurve& q1, const SrvCurve& q2,
                        const AlignmentConfig& config) {
  return elastic_distance(to_piecewise(q1), q2, config);
}

VarianceDecomposition variance_decomposition(
    const std::vector<SrvCurve>& curves,
    const std::vector<std::string>& primary,
    const std::vector<std::string>& complement, const MeanFitConfig& config) {
  const std::size_t n = curves.size();
  if (primary.size() != n || complement.size() != n)
    throw DataError("feature labels must match the number of curves");

  VarianceDecomposition out;
  std::set<std::pair<std::string, std::string>> tuples;
  std::set<std::string> a2_levels;
  std::map<std::string, std::vector<int>> by_level;
  for (std::size_t i = 0; i < n; ++i) {
    tuples.emplace(primary[i], complement[i]);
    a2_levels.insert(complement[i]);
    by_level[primary[i]].push_back(static_cast<int>(i));
  }
  out.levels_x = static_cast<int>(tuples.size());
  out.levels_a2 = static_cast<int>(a2_levels.size());

  out.total_sigma_sq = estimate_elastic_mean(curves, config).sigma_sq;

  double group_sum = 0.0;
  for (const auto& [level, idx] : by_level) {
    if (idx.size() < 2)
      throw EmptyGroup("group '" + level + "' has fewer than 2 curves");
    std::vector<SrvCurve> sub;
    sub.reserve(idx.size());
    for (int i : idx) sub.push_back(curves[i]);
    GroupVariance gv;
    gv.level = level;
    gv.count = static_cast<int>(idx.size());
    gv.sigma_sq = estimate_elastic_mean(sub, config).sigma_sq;
    group_sum += gv.sigma_sq;
    out.groups.push_back(std::move(gv));
  }

  const double denom = out.levels_x * out.total_sigma_sq;
  out.r_squared = (denom > 0.0) ? 1.0 - out.levels_a2 * group_sum / denom : 0.0;
  return out;
}

}  // namespace shapemean
