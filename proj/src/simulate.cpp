#include "shapemean/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "shapemean/errors.hpp"

namespace shapemean {

Complex spiral_point(double t) {
  return t * std::exp(Complex(0.0, 13.0 * t));
}

std::vector<PlanePolygon> simulate_spirals(const SpiralSimConfig& config) {
  if (config.n < 1 || config.min_points < 2 ||
      config.max_points < config.min_points)
    throw DataError("invalid spiral simulation parameters");

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> points_dist(config.min_points,
                                                 config.max_points);
  std::uniform_real_distribution<double> jitter(-0.4, 0.4);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> log_scale(-0.5, 0.5);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<PlanePolygon> out;
  out.reserve(config.n);
  for (int i = 0; i < config.n; ++i) {
    const int ni = points_dist(rng);
    // roughly constant angle distances: jittered equidistant t, 13 t = angle
    std::vector<double> t(ni);
    for (int j = 0; j < ni; ++j) {
      const double base = static_cast<double>(j) / (ni - 1);
      const double jit = (j == 0 || j == ni - 1) ? 0.0 : jitter(rng) / (ni - 1);
      t[j] = std::clamp(base + jit, 0.0, 1.0);
    }
    std::sort(t.begin(), t.end());

    PlanePolygon poly;
    poly.id = "spiral_" + std::to_string(i + 1);
    poly.points.resize(ni);
    for (int j = 0; j < ni; ++j) poly.points[j] = spiral_point(t[j]);

    if (config.noise_sd > 0.0) {
      const double sd = config.noise_sd;  // curve size is O(1)
      for (Complex& p : poly.points)
        p += sd * Complex(gauss(rng), gauss(rng));
    }
    if (config.transform) {
      const Complex rot = std::exp(Complex(0.0, angle(rng)));
      const double scale = std::exp(log_scale(rng));
      const Complex offset(shift(rng), shift(rng));
      for (Complex& p : poly.points) p = scale * rot * p + offset;
    }
    out.push_back(std::move(poly));
  }
  return out;
}

}  // namespace shapemean
