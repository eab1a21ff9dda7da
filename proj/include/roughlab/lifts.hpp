#pragma once

// Canonical lifts of sampled paths to level-2 rough paths.

#include "roughlab/rng.hpp"
#include "roughlab/rough_core.hpp"

#include <cstdint>
#include <vector>

namespace roughlab {

enum class LiftMode { piecewise_linear, piecewise_constant_ito };

/// Samples of an R^m-valued path: base_values row k is the value at times[k].
/// For piecewise_constant_ito the rows are post-jump values (cadlag).
struct LiftRequest {
  std::vector<double> times;
  Matrix base_values;
  LiftMode mode = LiftMode::piecewise_linear;
};

/// Stratonovich lift: over a segment with increment D the second level gains
/// (X_start - X_0) (x) D + D (x) D / 2.
RoughPathGrid lift_piecewise_linear(const LiftRequest& req);

/// Ito lift: XX(t) = sum_{jumps r <= t} (X_{r-} - X_0) (x) dX_r.
RoughPathGrid lift_piecewise_constant_ito(const LiftRequest& req);

/// Dispatches on req.mode.
RoughPathGrid lift(const LiftRequest& req);

/// Brownian rough path with covariance sigma and area drift gamma on the
/// uniform grid {k/steps}: piecewise-linear lift of the sampled walk plus
/// (t - s) gamma on every second-level increment.
RoughPathGrid brownian_rough_path(const Matrix& sigma, const Matrix& gamma,
                                  std::size_t steps, Rng& rng);
RoughPathGrid brownian_rough_path(const Matrix& sigma, const Matrix& gamma,
                                  std::size_t steps, std::uint64_t seed);

/// Zero first level; second-level increment over [s, t] is (t - s) gamma.
RoughPathGrid pure_area_path(const Matrix& gamma, std::vector<double> times);

/// {0, 1/n, ..., 1}.
std::vector<double> uniform_grid(std::size_t steps, double horizon = 1.0);

}  // namespace roughlab
