#pragma once

// Level-2 rough path algebra over R^m: the step-2 group, grid-sampled rough
// paths, and exact p-variation / Hoelder norms over grid partitions.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace roughlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kAlgebraicTolerance = 1e-12;

/// Element (a, M) of G = R^m + (R^m (x) R^m).
struct Level2Increment {
  Vector a;
  Matrix M;

  static Level2Increment identity(Eigen::Index m) {
    return {Vector::Zero(m), Matrix::Zero(m, m)};
  }
  Eigen::Index dim() const { return a.size(); }
};

/// (a, M) * (b, N) = (a + b, M + a (x) b + N). Throws on dimension mismatch.
Level2Increment group_mul(const Level2Increment& x, const Level2Increment& y);

/// (a, M)^{-1} = (-a, -M + a (x) a).
Level2Increment group_inv(const Level2Increment& x);

/// Sym(M) - a (x) a / 2; zero exactly when x is weakly geometric.
Matrix sym_defect(const Level2Increment& x);

/// max-norm difference scaled by max(1, |x|, |y|).
double relative_error(const Level2Increment& x, const Level2Increment& y);
double relative_error(const Matrix& x, const Matrix& y);

enum class PathFlavor { geometric_continuous, cadlag_ito };

/// Rough path sampled on a finite grid. times start at 0 and increase
/// strictly; value(0) is the identity. Values are stored row-major:
/// level-one as N x m, level-two as N blocks of m x m.
class RoughPathGrid {
 public:
  RoughPathGrid(std::vector<double> times, std::vector<double> level1,
                std::vector<double> level2, std::size_t dim, PathFlavor flavor);

  std::size_t size() const { return times_.size(); }
  std::size_t dim() const { return dim_; }
  PathFlavor flavor() const { return flavor_; }
  std::span<const double> times() const { return times_; }
  double time(std::size_t i) const { return times_[i]; }

  std::span<const double> first(std::size_t i) const {
    return {level1_.data() + i * dim_, dim_};
  }
  std::span<const double> second(std::size_t i) const {
    return {level2_.data() + i * dim_ * dim_, dim_ * dim_};
  }

  Level2Increment value(std::size_t i) const;
  /// value(i)^{-1} * value(j), computed in closed form.
  Level2Increment increment(std::size_t i, std::size_t j) const;

  /// |X_{i,j}|^2 (Euclidean) and |XX_{i,j}|^2 (Frobenius).
  double first_sqnorm(std::size_t i, std::size_t j) const;
  double second_sqnorm(std::size_t i, std::size_t j) const;

  /// Level-one values as an N x m matrix.
  Matrix first_level() const;

 private:
  std::vector<double> times_;
  std::vector<double> level1_;
  std::vector<double> level2_;
  std::size_t dim_;
  PathFlavor flavor_;
};

/// sup over partitions built from grid indices {0 = i_0 < ... < i_k = n-1}
/// of sum power(i_l, i_{l+1}); power must return |Xi_{i,j}|^q. O(n^2).
template <class PowerFn>
double variation_sum(std::size_t n, PowerFn&& power) {
  if (n < 2) return 0.0;
  std::vector<double> best(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
      const double candidate = best[i] + power(i, j);
      if (candidate > b) b = candidate;
    }
    best[j] = b;
  }
  return best[n - 1];
}

/// ||X||_{p-var} of the level-one path, p >= 1.
double first_level_variation(const RoughPathGrid& path, double p);
/// ||XX||_{q-var} of the level-two increments, q > 0 (literal formula, also
/// for q < 1).
double second_level_variation(const RoughPathGrid& path, double q);

/// ||X||_{p-var} + ||XX||_{p/2-var}^{1/2}, p in [2, 3).
double p_var_homog(const RoughPathGrid& path, double p);
/// ||X||_{p-var} + ||XX||_{p/2-var}, p in [2, 3).
double p_var_inhomog(const RoughPathGrid& path, double p);
/// ||X - Y||_{p-var} + ||XX - YY||_{p/2-var} on level-wise increment
/// differences. Grids must coincide. p >= 1.
double p_var_inhomog_dist(const RoughPathGrid& x, const RoughPathGrid& y,
                          double p);

/// O(N) upper bound on p_var_homog through the control
/// w(s,t) = sum |XX_{k,k+1}| + (sum |X_{k,k+1}|)^2 / 2 over grid steps.
double p_var_homog_upper_bound(const RoughPathGrid& path, double p);

/// p-variation of an ordinary sampled path (rows are samples), p >= 1.
double path_p_variation(const Matrix& values, double p);

/// max |X_{s,t}|/|t-s|^alpha + (max |XX_{s,t}|/|t-s|^{2 alpha})^{1/2} over
/// grid pairs. alpha in (0, 1].
double holder_norm(const RoughPathGrid& path, double alpha);

}  // namespace roughlab
