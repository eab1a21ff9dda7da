#pragma once

#include "roughlab/lifts.hpp"
#include "roughlab/rng.hpp"
#include "roughlab/rough_core.hpp"

#include <random>

namespace roughlab::testing {

inline Level2Increment random_element(Rng& rng, Eigen::Index m, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Level2Increment x{Vector(m), Matrix(m, m)};
  for (Eigen::Index i = 0; i < m; ++i) x.a(i) = scale * normal(rng);
  for (Eigen::Index i = 0; i < m * m; ++i) x.M.data()[i] = scale * normal(rng);
  return x;
}

/// Random walk samples (rows) on a random strictly increasing grid in [0, 1].
inline LiftRequest random_request(Rng& rng, std::size_t points, Eigen::Index m, LiftMode mode) {
  std::normal_distribution<double> normal;
  std::vector<double> t(points);
  t[0] = 0.0;
  for (std::size_t k = 1; k < points; ++k) t[k] = t[k - 1] + 0.1 + rng.uniform();
  for (auto& v : t) v /= t.back();
  Matrix values(static_cast<Eigen::Index>(points), m);
  for (Eigen::Index i = 0; i < values.size(); ++i) values.data()[i] = normal(rng);
  return {t, values, mode};
}

}  // namespace roughlab::testing
