#include <doctest.h>

#include <cmath>
#include <random>

#include "shapemean/curves.hpp"
#include "shapemean/errors.hpp"
#include "shapemean/warping.hpp"
#include "test_support.hpp"

using namespace shapemean;

namespace {

const Complex kI(0.0, 1.0);

PiecewiseLinearFn constant_one() {
  PiecewiseLinearFn psi;
  psi.breaks = Eigen::Vector2d(0.0, 1.0);
  psi.left_value = Eigen::VectorXcd::Constant(1, Complex(1, 0));
  psi.slope = Eigen::VectorXcd::Constant(1, Complex(0, 0));
  return psi;
}

// random unit-norm piecewise-linear template from a spline expansion
PiecewiseLinearFn random_template(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  auto basis = std::make_shared<const SplineBasis>(1, 5);
  CurveFunction f{basis, Eigen::VectorXcd(basis->size())};
  for (int k = 0; k < basis->size(); ++k)
    f.coefficients(k) = Complex(gauss(rng), gauss(rng));
  f.coefficients /= std::sqrt(squared_norm(f));
  return to_piecewise(f);
}

AlignmentProblem random_alignment(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.3, 1.0);
  AlignmentProblem p;
  p.mean = random_template(rng);
  p.values.resize(n);
  p.nodes.resize(n + 1);
  p.nodes(0) = 0.0;
  double acc = 0.0;
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) acc += (w(j) = unif(rng));
  for (int j = 0; j < n; ++j) p.nodes(j + 1) = p.nodes(j) + w(j) / acc;
  p.nodes(n) = 1.0;
  for (int j = 0; j < n; ++j) p.values(j) = Complex(gauss(rng), gauss(rng));
  return p;
}

double numeric_segment_gain(const PiecewiseLinearFn& psi, Complex q, double a,
                            double b, int steps) {
  double acc = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double t = a + (b - a) * (s + 0.5) / steps;
    const double r = std::real(std::conj(psi.evaluate(t)) * q);
    acc += std::max(r, 0.0) * std::max(r, 0.0);
  }
  return acc * (b - a) / steps;
}

}  // namespace

TEST_CASE("segment_gain closed forms") {
  const PiecewiseLinearFn one = constant_one();
  CHECK(segment_gain(one, Complex(1, 0), 0.0, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(segment_gain(one, kI, 0.0, 1.0) == doctest::Approx(0.0));
  CHECK(segment_gain(one, Complex(-1, 0), 0.0, 1.0) == doctest::Approx(0.0));

  // psi ramps from -1 to 1: positive part contributes int_0^1 u^2/2 du = 1/6
  PiecewiseLinearFn ramp;
  ramp.breaks = Eigen::Vector2d(0.0, 1.0);
  ramp.left_value = Eigen::VectorXcd::Constant(1, Complex(-1, 0));
  ramp.slope = Eigen::VectorXcd::Constant(1, Complex(2, 0));
  CHECK(segment_gain(ramp, Complex(1, 0), 0.0, 1.0) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("segment_gain matches numeric quadrature on random templates") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const PiecewiseLinearFn psi = random_template(rng);
    const Complex q(gauss(rng), gauss(rng));
    double a = unif(rng), b = unif(rng);
    if (a > b) std::swap(a, b);
    const double exact = segment_gain(psi, q, a, b);
    const double numeric = numeric_segment_gain(psi, q, a, b, 40000);
    CHECK(exact == doctest::Approx(numeric).epsilon(1e-4));
  }
}

TEST_CASE("aligning a unit-modulus curve to itself keeps the identity") {
  // with |q_j| = 1 the identity warp attains the Cauchy-Schwarz bound, so it
  // is optimal and the hysteresis must return it unchanged
  PlanePolygon poly{"p",
                    {Complex(0, 0), Complex(1, 0.2), Complex(1.5, 1.0),
                     Complex(0.8, 1.8), Complex(-0.2, 1.4)}};
  const SrvCurve q = polygon_to_srv(poly);
  AlignmentProblem problem;
  problem.mean = to_piecewise(q);
  problem.values = q.values;
  problem.nodes = q.nodes;
  const AlignmentResult res = align(problem);
  CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((res.full_nodes - q.nodes).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("DP alignment matches exhaustive grid search") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> n_dist(1, 3);
  std::uniform_int_distribution<int> g_dist(1, 50);
  AlignmentConfig config;
  config.grid_size = 51;
  config.refine = false;
  config.min_gain = 0.0;
  config.min_length_factor = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    const int n = n_dist(rng);
    AlignmentProblem p = random_alignment(rng, n);
    // snap problem nodes onto the search grid so the identity is admissible
    for (int j = 1; j < n; ++j)
      p.nodes(j) = std::max(p.nodes(j - 1) + 1.0 / 50.0,
                            std::round(p.nodes(j) * 50.0) / 50.0);
    Eigen::VectorXd weights(n);
    for (int j = 0; j < n; ++j) weights(j) = p.nodes(j + 1) - p.nodes(j);
    const AlignmentResult res = align(p, config);
    const double brute =
        testing::exhaustive_warp_objective(p.mean, p.values, weights, 51);
    CHECK(res.objective == doctest::Approx(brute).epsilon(1e-10));
  }
}

TEST_CASE("alignment never falls below the identity objective") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const AlignmentProblem p = random_alignment(rng, n);
    Eigen::VectorXd weights(n);
    for (int j = 0; j < n; ++j) weights(j) = p.nodes(j + 1) - p.nodes(j);
    const double identity =
        testing::warp_objective(p.mean, p.values, weights, p.nodes);
    const AlignmentResult res = align(p);
    CHECK(res.objective >= identity - 1e-12);
    CHECK(testing::warp_objective(p.mean, p.values, weights, res.full_nodes) ==
          doctest::Approx(res.objective).epsilon(1e-12));
    // full_nodes are weakly increasing with fixed endpoints
    CHECK(res.full_nodes(0) == 0.0);
    CHECK(res.full_nodes(n) == 1.0);
    for (int j = 0; j < n; ++j)
      CHECK(res.full_nodes(j + 1) >= res.full_nodes(j));
  }
}

TEST_CASE("w* reweighting preserves the norm of surviving segments") {
  std::mt19937_64 rng(44);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 4;
    const AlignmentProblem p = random_alignment(rng, n);
    const AlignmentResult res = align(p);
    if (static_cast<int>(res.kept.size()) != n) continue;
    double before = 0.0, after = 0.0;
    for (int j = 0; j < n; ++j)
      before += std::norm(p.values(j)) * (p.nodes(j + 1) - p.nodes(j));
    for (int j = 0; j < n; ++j)
      after += std::norm(res.values(j)) * (res.nodes(j + 1) - res.nodes(j));
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("alignment objective is invariant under joint rotation") {
  std::mt19937_64 rng(45);
  const AlignmentProblem p = random_alignment(rng, 4);
  AlignmentProblem rotated = p;
  const Complex u = kI;  // exact in floating point
  rotated.values *= u;
  rotated.mean.left_value *= u;
  rotated.mean.slope *= u;
  const AlignmentResult a = align(p);
  const AlignmentResult b = align(rotated);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
  CHECK((a.full_nodes - b.full_nodes).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degenerate template returns the identity with a flag") {
  AlignmentProblem p;
  p.mean = constant_one();
  p.values = Eigen::VectorXcd::Constant(3, kI);  // orthogonal everywhere
  p.nodes.resize(4);
  p.nodes << 0.0, 0.3, 0.6, 1.0;
  const AlignmentResult res = align(p);
  CHECK(res.degenerate);
  CHECK(res.objective == 0.0);
  CHECK((res.nodes - p.nodes).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("segments orthogonal to the template collapse") {
  AlignmentProblem p;
  p.mean = constant_one();
  p.values.resize(3);
  p.values << Complex(1, 0), kI, Complex(1, 0);
  p.nodes.resize(4);
  p.nodes << 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0;
  const AlignmentResult res = align(p);
  REQUIRE(res.kept.size() == 2);
  CHECK(res.kept[0] == 0);
  CHECK(res.kept[1] == 2);
  // the middle third was redistributed; the objective improves on identity
  const double identity = 2.0 * std::sqrt(1.0 / 3.0) * std::sqrt(1.0 / 3.0);
  CHECK(res.objective > identity);
}

TEST_CASE("blend_reconstruction mixes the observation with the posterior") {
  auto basis = std::make_shared<const SplineBasis>(0, 3);
  EigenSystem eigen;
  eigen.basis = basis;
  eigen.values = Eigen::VectorXd::Constant(1, 1.0);
  eigen.vectors = Eigen::MatrixXcd::Constant(1, 1, Complex(1, 0));
  eigen.vectors.conservativeResize(2, 1);
  eigen.vectors << Complex(1, 0), Complex(1, 0);  // e_1(t) = 1 on [0,1]
  eigen.vectors *= std::sqrt(1.0);  // unit G-norm: int 1 dt = 1

  SrvCurve q;
  q.times = Eigen::Vector2d(0.25, 0.75);
  q.values = Eigen::Vector2cd(Complex(1, 0), kI);
  q.nodes = Eigen::Vector3d(0.0, 0.5, 1.0);

  PosteriorScores post;
  post.mean = Eigen::VectorXcd::Constant(1, Complex(0, 2));

  const Complex rot = std::polar(1.0, 0.7);
  // rho = 0: pure observation, rotated
  Eigen::VectorXcd out = blend_reconstruction(q, eigen, post, 0.0, rot);
  CHECK(std::abs(out(0) - rot * q.values(0)) < 1e-14);
  CHECK(std::abs(out(1) - rot * q.values(1)) < 1e-14);
  // rho = 1: normalized reconstruction (z/|z|)^T e = i * 1
  out = blend_reconstruction(q, eigen, post, 1.0, rot);
  CHECK(std::abs(out(0) - rot * kI) < 1e-12);
  CHECK(std::abs(out(1) - rot * kI) < 1e-12);
  // rho = 1/2: midpoint
  out = blend_reconstruction(q, eigen, post, 0.5, rot);
  CHECK(std::abs(out(0) - rot * 0.5 * (q.values(0) + kI)) < 1e-12);

  PosteriorScores zero;
  zero.mean = Eigen::VectorXcd::Zero(1);
  CHECK_THROWS_AS(blend_reconstruction(q, eigen, zero, 0.5, rot),
                  ZeroPosterior);
  CHECK_NOTHROW(blend_reconstruction(q, eigen, zero, 0.0, rot));
}
