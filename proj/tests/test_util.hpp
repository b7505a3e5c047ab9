#pragma once

#include <random>
#include <vector>

#include "affgeo/triple.hpp"

namespace affgeo::testutil {

/// Uniform sample strictly inside the chart box (10% margin per side).
inline std::vector<double> random_point(const RiemannianTriple& T,
                                        std::mt19937_64& rng, double margin = 0.1) {
  std::vector<double> p(T.dim);
  std::uniform_real_distribution<double> unif(margin, 1.0 - margin);
  for (int a = 0; a < T.dim; ++a) {
    double lo = T.box[a][0], hi = T.box[a][1];
    p[a] = lo + unif(rng) * (hi - lo);
  }
  return p;
}

}  // namespace affgeo::testutil
