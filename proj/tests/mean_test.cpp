#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "shapemean/curves.hpp"
#include "shapemean/errors.hpp"
#include "shapemean/mean.hpp"
#include "shapemean/simulate.hpp"

using namespace shapemean;

namespace {

const Complex kI(0.0, 1.0);

// closed-form-friendly test shape: 12 edges of equal length, so its SRV is
// piecewise constant on the uniform cells of a 13-knot order-0 basis
PlanePolygon equal_edge_polygon(const std::string& id) {
  PlanePolygon poly{id, {Complex(0, 0)}};
  for (int j = 0; j < 12; ++j)
    poly.points.push_back(poly.points.back() + std::polar(1.0, 0.35 * j));
  return poly;
}

PlanePolygon similarity(const PlanePolygon& poly, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double scale = 0.5 + 2.0 * unif(rng);
  const Complex rot = std::polar(scale, 2.0 * M_PI * unif(rng));
  const Complex shift(4.0 * unif(rng) - 2.0, 4.0 * unif(rng) - 2.0);
  PlanePolygon out = poly;
  for (Complex& p : out.points) p = rot * p + shift;
  return out;
}

// configuration under which the 12-gon SRV is exactly representable: order-0
// basis on the same cells, no penalty, no nugget
MeanFitConfig exact_config() {
  MeanFitConfig config;
  config.basis_order = 0;
  config.knots = 13;
  config.nugget = false;
  config.smoothing = SmoothingSelection::fixed(0.0);
  return config;
}

std::vector<SrvCurve> similar_copies(const PlanePolygon& base, int n,
                                     std::mt19937_64& rng) {
  std::vector<SrvCurve> out;
  for (int i = 0; i < n; ++i) out.push_back(polygon_to_srv(similarity(base, rng)));
  return out;
}

double mean_distance_to(const ElasticMeanResult& result, const SrvCurve& q) {
  return inelastic_distance(to_piecewise(q),
                            to_piecewise(result.mean_function()))
      .distance;
}

}  // namespace

TEST_CASE("identical curves under similarities give an exact degenerate fit") {
  std::mt19937_64 rng(51);
  const PlanePolygon base = equal_edge_polygon("base");
  const std::vector<SrvCurve> curves = similar_copies(base, 6, rng);
  const ElasticMeanResult result =
      estimate_elastic_mean(curves, exact_config());
  CHECK(result.converged);
  CHECK(result.sigma_sq < 1e-8);
  CHECK(mean_distance_to(result, polygon_to_srv(base)) < 1e-6);
  for (const CurveState& st : result.curves) {
    CHECK(!st.flagged);
    CHECK(std::abs(std::abs(st.rotation) - 1.0) < 1e-10);
  }
}

TEST_CASE("inelastic mean of two orthogonal dense clusters splits variance") {
  // straight line vs. fold-back: SRVs 1 and (1, -1) are orthogonal, so the
  // covariance has two equal eigenvalues and sigma^2 = 1 - lambda_1 = 0.5
  const PlanePolygon line{"l", {Complex(0, 0), Complex(1, 0), Complex(2, 0)}};
  const PlanePolygon fold{"f", {Complex(0, 0), Complex(1, 0), Complex(0, 0)}};
  std::vector<SrvCurve> curves = {polygon_to_srv(line), polygon_to_srv(fold),
                                  polygon_to_srv(line), polygon_to_srv(fold)};
  MeanFitConfig config;
  config.basis_order = 0;
  config.knots = 3;
  config.penalty_order = 1;  // m = 2 coefficients
  config.nugget = false;
  config.smoothing = SmoothingSelection::fixed(0.0);
  config.backend = MeanFitConfig::Backend::Dense;
  const ElasticMeanResult result = estimate_inelastic_mean(curves, config);
  CHECK(result.sigma_sq == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("elastic mean is invariant under curve reordering") {
  SpiralSimConfig sim;
  sim.n = 5;
  sim.min_points = 10;
  sim.max_points = 12;
  sim.seed = 5;
  const std::vector<PlanePolygon> polys = simulate_spirals(sim);
  std::vector<SrvCurve> curves, reversed;
  for (const auto& p : polys) curves.push_back(polygon_to_srv(p));
  reversed.assign(curves.rbegin(), curves.rend());

  MeanFitConfig config;
  config.max_iterations = 4;
  const ElasticMeanResult a = estimate_elastic_mean(curves, config);
  const ElasticMeanResult b = estimate_elastic_mean(reversed, config);
  const double d = inelastic_distance(to_piecewise(a.mean_function()),
                                      to_piecewise(b.mean_function()))
                       .distance;
  CHECK(d < 1e-4);
}

TEST_CASE("elastic mean is invariant under a global rotation by i") {
  std::mt19937_64 rng(52);
  const std::vector<SrvCurve> curves =
      similar_copies(equal_edge_polygon("base"), 5, rng);
  std::vector<SrvCurve> rotated = curves;
  for (auto& q : rotated) q.values *= kI;
  const MeanFitConfig config = exact_config();
  const ElasticMeanResult a = estimate_elastic_mean(curves, config);
  const ElasticMeanResult b = estimate_elastic_mean(rotated, config);
  CHECK((a.theta - b.theta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("elastic distance vanishes on identical and rewarped curves") {
  std::mt19937_64 rng(53);
  const SrvCurve q1 = polygon_to_srv(equal_edge_polygon("a"));
  CHECK(elastic_distance(q1, q1) < 1e-8);

  // apply a known warp at the SRV level (w* reweighting keeps unit norm) and
  // a rotation; the alignment must undo both
  std::uniform_real_distribution<double> unif(0.3, 1.0);
  const int n = q1.size();
  SrvCurve q2;
  q2.nodes.resize(n + 1);
  q2.nodes(0) = 0.0;
  double acc = 0.0;
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) acc += (w(j) = unif(rng));
  for (int j = 0; j < n; ++j) q2.nodes(j + 1) = q2.nodes(j) + w(j) / acc;
  q2.nodes(n) = 1.0;
  q2.times.resize(n);
  q2.values.resize(n);
  const Complex u = std::polar(1.0, 1.1);
  for (int j = 0; j < n; ++j) {
    const double w_old = q1.nodes(j + 1) - q1.nodes(j);
    const double w_new = q2.nodes(j + 1) - q2.nodes(j);
    q2.values(j) = std::sqrt(w_old / w_new) * u * q1.values(j);
    q2.times(j) = 0.5 * (q2.nodes(j) + q2.nodes(j + 1));
  }
  CHECK(elastic_distance(q1, q2) < 1e-3);

  SrvCurve bad = q1;
  bad.values *= 2.0;
  CHECK_THROWS_AS(elastic_distance(q1, bad), NotNormalized);
}

TEST_CASE("variance decomposition: single group gives exactly zero R^2") {
  std::mt19937_64 rng(54);
  const std::vector<SrvCurve> curves =
      similar_copies(equal_edge_polygon("base"), 4, rng);
  const std::vector<std::string> primary(4, "a"), complement(4, "c");
  const VarianceDecomposition out =
      variance_decomposition(curves, primary, complement, exact_config());
  CHECK(out.levels_x == 1);
  CHECK(out.levels_a2 == 1);
  CHECK(out.r_squared == 0.0);
}

TEST_CASE("variance decomposition separates two exact clusters") {
  std::mt19937_64 rng(55);
  const PlanePolygon shape_a = equal_edge_polygon("a");
  PlanePolygon shape_b{"b", {Complex(0, 0)}};
  for (int j = 0; j < 12; ++j)
    shape_b.points.push_back(shape_b.points.back() +
                             std::polar(1.0, -0.55 * j));
  std::vector<SrvCurve> curves = similar_copies(shape_a, 3, rng);
  for (const SrvCurve& q : similar_copies(shape_b, 3, rng))
    curves.push_back(q);
  const std::vector<std::string> primary = {"a", "a", "a", "b", "b", "b"};
  const std::vector<std::string> complement(6, "c");
  const VarianceDecomposition out =
      variance_decomposition(curves, primary, complement, exact_config());
  CHECK(out.levels_x == 2);
  CHECK(out.levels_a2 == 1);
  CHECK(out.total_sigma_sq > 0.01);
  for (const GroupVariance& g : out.groups) CHECK(g.sigma_sq < 1e-8);
  CHECK(out.r_squared > 0.999);
}

TEST_CASE("variance decomposition input validation") {
  std::mt19937_64 rng(56);
  const std::vector<SrvCurve> curves =
      similar_copies(equal_edge_polygon("base"), 4, rng);
  CHECK_THROWS_AS(variance_decomposition(curves, {"a", "a", "a"},
                                         {"c", "c", "c"}, exact_config()),
                  DataError);
  CHECK_THROWS_AS(variance_decomposition(curves, {"a", "a", "a", "b"},
                                         {"c", "c", "c", "c"}, exact_config()),
                  EmptyGroup);
}

TEST_CASE("mean estimation rejects undersized inputs") {
  const std::vector<SrvCurve> one = {
      polygon_to_srv(equal_edge_polygon("solo"))};
  CHECK_THROWS_AS(estimate_elastic_mean(one, exact_config()), DataError);
}
