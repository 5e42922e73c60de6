#pragma once

#include <cstdint>
#include <vector>

#include "shapemean/curves.hpp"

namespace shapemean {

/// Spiral generator beta(t) = t exp(13 i t): irregular sampling at roughly
/// constant angle distances, optional complex Gaussian noise and random
/// similarity transforms. Deterministic per seed.
struct SpiralSimConfig {
  int n = 9;
  int min_points = 17;
  int max_points = 22;
  double noise_sd = 0.0;  // relative to the curve size
  bool transform = true;  // random rotation / scaling / translation
  std::uint64_t seed = 1;
};

Complex spiral_point(double t);

std::vector<PlanePolygon> simulate_spirals(const SpiralSimConfig& config);

}  // namespace shapemean
