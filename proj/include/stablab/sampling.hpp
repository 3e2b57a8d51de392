#pragma once

#include "stablab/core.hpp"

#include <cmath>
#include <random>

namespace stablab {

inline Vector random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  do {
    for (int j = 0; j < dim; ++j) v[j] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

/// Uniform draw from the Euclidean ball of the given radius.
inline Vector uniform_in_ball(int dim, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector dir = random_unit(dim, rng);
  double r = radius * std::pow(unit(rng), 1.0 / dim);
  return r * dir;
}

}  // namespace stablab
