#include "shapemean/warping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "shapemean/errors.hpp"

namespace shapemean {

namespace {

// int of max(linear,0)^2 over an interval of length len with endpoint values
// r_lo, r_hi
double clipped_square_integral(double r_lo, double r_hi, double len) {
  if (len <= 0.0) return 0.0;
  if (r_lo >= 0.0 && r_hi >= 0.0)
    return len / 3.0 * (r_lo * r_lo + r_lo * r_hi + r_hi * r_hi);
  if (r_lo <= 0.0 && r_hi <= 0.0) return 0.0;
  if (r_lo > 0.0) {
    const double pos = len * r_lo / (r_lo - r_hi);
    return pos * r_lo * r_lo / 3.0;
  }
  const double pos = len * r_hi / (r_hi - r_lo);
  return pos * r_hi * r_hi / 3.0;
}

}  // namespace

double segment_gain(const PiecewiseLinearFn& psi, Complex q, double a,
                    double b) {
  if (b <= a) return 0.0;
  double acc = 0.0;
  int j = psi.piece_index(a);
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, psi.breaks(j + 1));
    if (hi > lo) {
      // Re(conj(psi) q) is linear on the piece
      const Complex v_lo =
          psi.left_value(j) + psi.slope(j) * (lo - psi.breaks(j));
      const Complex v_hi =
          psi.left_value(j) + psi.slope(j) * (hi - psi.breaks(j));
      const double r_lo = std::real(std::conj(v_lo) * q);
      const double r_hi = std::real(std::conj(v_hi) * q);
      acc += clipped_square_integral(r_lo, r_hi, hi - lo);
    }
    lo = hi;
    if (j + 1 >= psi.pieces()) break;
    ++j;
  }
  return acc;
}

namespace {

double total_objective(const PiecewiseLinearFn& psi,
                       const Eigen::VectorXcd& values,
                       const Eigen::VectorXd& weights,
                       const Eigen::VectorXd& nodes) {
  double acc = 0.0;
  for (int j = 0; j < values.size(); ++j)
    acc += std::sqrt(
        weights(j) *
        std::max(0.0, segment_gain(psi, values(j), nodes(j), nodes(j + 1))));
  return acc;
}

// golden-section maximization of a continuous function on [a, b]
template <typename F>
double golden_max(F f, double a, double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

AlignmentResult align(const AlignmentProblem& problem,
                      const AlignmentConfig& config) {
  const int n = static_cast<int>(problem.values.size());
  const PiecewiseLinearFn& psi = problem.mean;
  if (std::abs(squared_norm(psi) - 1.0) > 1e-8)
    throw NotNormalized("alignment template must be unit-norm");

  Eigen::VectorXd weights(n);
  for (int j = 0; j < n; ++j)
    weights(j) = problem.nodes(j + 1) - problem.nodes(j);

  AlignmentResult result;

  // degenerate template: no segment has positive gain anywhere
  double total_gain = 0.0;
  for (int j = 0; j < n; ++j)
    total_gain += segment_gain(psi, problem.values(j), 0.0, 1.0);
  if (total_gain <= 0.0) {
    result.nodes = problem.nodes;
    result.full_nodes = problem.nodes;
    result.values = problem.values;
    result.times.resize(n);
    for (int j = 0; j < n; ++j)
      result.times(j) = 0.5 * (result.nodes(j) + result.nodes(j + 1));
    result.kept.resize(n);
    for (int j = 0; j < n; ++j) result.kept[j] = j;
    result.objective = 0.0;
    result.degenerate = true;
    return result;
  }

  const int grid = std::max(config.grid_size, 2);
  const double step = 1.0 / (grid - 1);

  // cumulative per-segment gains at the grid points
  Eigen::MatrixXd cum(n, grid);
  cum.col(0).setZero();
  for (int g = 1; g < grid; ++g)
    for (int j = 0; j < n; ++j)
      cum(j, g) = cum(j, g - 1) +
                  segment_gain(psi, problem.values(j), (g - 1) * step, g * step);

  // trust region: new segment lengths within [f*w, w/f] (a slope constraint
  // on the warp); disabled when the grid lacks slack to honor it
  double factor = std::clamp(config.min_length_factor, 0.0, 1.0);
  std::vector<int> min_gap(n, 0), max_gap(n, grid - 1);
  if (factor > 0.0) {
    long total_min = 0, total_max = 0;
    for (int j = 0; j < n; ++j) {
      min_gap[j] = static_cast<int>(std::ceil(factor * weights(j) / step - 1e-9));
      max_gap[j] = static_cast<int>(std::min<long>(
          grid - 1,
          static_cast<long>(std::floor(weights(j) / (factor * step) + 1e-9))));
      total_min += min_gap[j];
      total_max += max_gap[j];
    }
    if (total_min > grid - 1 - n || total_max < grid - 1 + n) {
      std::fill(min_gap.begin(), min_gap.end(), 0);
      std::fill(max_gap.begin(), max_gap.end(), grid - 1);
      factor = 0.0;
    }
  }

  // dp(g) = best objective with the current node at grid point g
  const double neg_inf = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd dp_prev = Eigen::VectorXd::Constant(grid, neg_inf);
  dp_prev(0) = 0.0;
  Eigen::MatrixXi parent(n, grid);
  Eigen::VectorXd dp_cur(grid);
  for (int j = 0; j < n; ++j) {
    dp_cur.setConstant(neg_inf);
    for (int g = (j + 1 == n) ? grid - 1 : 0; g < grid; ++g) {
      for (int gp = std::max(0, g - static_cast<int>(max_gap[j]));
           gp <= g - min_gap[j]; ++gp) {
        if (dp_prev(gp) == neg_inf) continue;
        const double gain = std::max(0.0, cum(j, g) - cum(j, gp));
        const double cand = dp_prev(gp) + std::sqrt(weights(j) * gain);
        if (cand > dp_cur(g)) {
          dp_cur(g) = cand;
          parent(j, g) = gp;
        }
      }
    }
    dp_prev.swap(dp_cur);
  }

  Eigen::VectorXd nodes(n + 1);
  if (dp_prev(grid - 1) == neg_inf) {
    nodes = problem.nodes;  // trust region infeasible on this grid
  } else {
    nodes(n) = 1.0;
    int g = grid - 1;
    for (int j = n - 1; j >= 0; --j) {
      g = parent(j, g);
      nodes(j) = g * step;
    }
    nodes(0) = 0.0;
  }

  // coordinate-wise golden-section refinement to a fixed point
  if (config.refine) {
    for (int pass = 0; pass < 50; ++pass) {
      double moved = 0.0;
      for (int i = 1; i < n; ++i) {
        double a = nodes(i - 1) + factor * weights(i - 1);
        double b = nodes(i + 1) - factor * weights(i);
        if (factor > 0.0) {
          a = std::max(a, nodes(i + 1) - weights(i) / factor);
          b = std::min(b, nodes(i - 1) + weights(i - 1) / factor);
        }
        if (b - a <= 0.0) continue;
        auto h = [&](double x) {
          const double g1 =
              std::max(0.0, segment_gain(psi, problem.values(i - 1), a, x));
          const double g2 =
              std::max(0.0, segment_gain(psi, problem.values(i), x, b));
          return std::sqrt(weights(i - 1) * g1) + std::sqrt(weights(i) * g2);
        };
        const double x = golden_max(h, a, b, 1e-12);
        if (h(x) > h(nodes(i))) {
          moved = std::max(moved, std::abs(x - nodes(i)));
          nodes(i) = x;
        }
      }
      if (moved < 1e-10) break;
    }
  }

  // keep the incumbent warp (the identity by default) unless the optimized
  // one genuinely improves the objective; this hysteresis stabilizes the
  // Steps I-IV fixed point against grid jitter and near-tied optima
  const Eigen::VectorXd& reference =
      (problem.reference.size() == n + 1) ? problem.reference : problem.nodes;
  double objective = total_objective(psi, problem.values, weights, nodes);
  const double incumbent =
      total_objective(psi, problem.values, weights, reference);
  const double identity_obj =
      total_objective(psi, problem.values, weights, problem.nodes);
  if (objective > incumbent + config.min_gain && objective >= identity_obj) {
    // keep the optimized nodes
  } else if (incumbent >= identity_obj) {
    nodes = reference;
    objective = incumbent;
  } else {
    nodes = problem.nodes;
    objective = identity_obj;
  }
  result.objective = objective;
  result.full_nodes = nodes;

  // drop collapsed segments and reweight the survivors
  for (int j = 0; j < n; ++j)
    if (nodes(j + 1) - nodes(j) > config.collapse_tol) result.kept.push_back(j);
  if (result.kept.empty()) {  // safeguard; lengths sum to 1
    result.kept.resize(n);
    for (int j = 0; j < n; ++j) result.kept[j] = j;
  }
  const int r = static_cast<int>(result.kept.size());
  result.nodes.resize(r + 1);
  result.nodes(0) = 0.0;
  for (int i = 0; i + 1 < r; ++i)
    result.nodes(i + 1) = nodes(result.kept[i] + 1);
  result.nodes(r) = 1.0;
  result.values.resize(r);
  result.times.resize(r);
  for (int i = 0; i < r; ++i) {
    const int j = result.kept[i];
    const double len = result.nodes(i + 1) - result.nodes(i);
    result.values(i) = std::sqrt(weights(j) / len) * problem.values(j);
    result.times(i) = 0.5 * (result.nodes(i) + result.nodes(i + 1));
  }
  return result;
}

Eigen::VectorXcd blend_reconstruction(const SrvCurve& curve,
                                      const EigenSystem& eigen,
                                      const PosteriorScores& post, double rho,
                                      Complex rotation) {
  const int n = curve.size();
  Eigen::VectorXcd out(n);
  double z_norm = 0.0;
  if (rho > 0.0) {
    z_norm = post.mean.norm();
    if (!(z_norm > 0.0))
      throw ZeroPosterior("posterior mean vanishes, cannot blend");
  }
  for (int j = 0; j < n; ++j) {
    Complex blended = (1.0 - rho) * curve.values(j);
    if (rho > 0.0) {
      const Eigen::VectorXcd e = eigen.evaluate(curve.times(j));
      const Complex recon = (post.mean.transpose() * e)(0) / z_norm;
      blended += rho * recon;
    }
    out(j) = rotation * blended;
  }
  return out;
}

}  // namespace shapemean
