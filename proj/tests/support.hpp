#pragma once

#include "geotr/core.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace geotr::test_support {

inline std::vector<Vec> random_points(int dim, int n, unsigned seed, double lo = -2.0, double hi = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec> pts;
  for (int k = 0; k < n; ++k) {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = u(rng);
    pts.push_back(x);
  }
  return pts;
}

inline std::vector<Vec> unit_circle(int n) {
  std::vector<Vec> pts;
  for (int k = 0; k < n; ++k) {
    double th = 2.0 * M_PI * k / n;
    pts.push_back(make_vec({std::cos(th), std::sin(th)}));
  }
  return pts;
}

}  // namespace geotr::test_support
