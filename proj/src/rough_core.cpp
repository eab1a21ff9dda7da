#include "roughlab/rough_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace roughlab {

namespace {

void require_same_dim(const Level2Increment& x, const Level2Increment& y) {
  if (x.a.size() != y.a.size() || x.M.rows() != x.a.size() ||
      x.M.cols() != x.a.size() || y.M.rows() != y.a.size() ||
      y.M.cols() != y.a.size()) {
    throw std::invalid_argument("group_mul: dimension mismatch (" +
                                std::to_string(x.a.size()) + " vs " +
                                std::to_string(y.a.size()) + ")");
  }
}

}  // namespace

Level2Increment group_mul(const Level2Increment& x, const Level2Increment& y) {
  require_same_dim(x, y);
  return {x.a + y.a, x.M + x.a * y.a.transpose() + y.M};
}

Level2Increment group_inv(const Level2Increment& x) {
  return {-x.a, -x.M + x.a * x.a.transpose()};
}

Matrix sym_defect(const Level2Increment& x) {
  return 0.5 * (x.M + x.M.transpose()) - 0.5 * x.a * x.a.transpose();
}

double relative_error(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw std::invalid_argument("relative_error: shape mismatch");
  }
  if (x.size() == 0) return 0.0;
  const double scale =
      std::max({1.0, x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()});
  return (x - y).cwiseAbs().maxCoeff() / scale;
}

double relative_error(const Level2Increment& x, const Level2Increment& y) {
  return std::max(relative_error(Matrix(x.a), Matrix(y.a)),
                  relative_error(x.M, y.M));
}

RoughPathGrid::RoughPathGrid(std::vector<double> times,
                             std::vector<double> level1,
                             std::vector<double> level2, std::size_t dim,
                             PathFlavor flavor)
    : times_(std::move(times)),
      level1_(std::move(level1)),
      level2_(std::move(level2)),
      dim_(dim),
      flavor_(flavor) {
  const std::size_t n = times_.size();
  if (dim_ == 0) throw std::invalid_argument("RoughPathGrid: dim must be >= 1");
  if (n < 2) throw std::invalid_argument("RoughPathGrid: need at least 2 times");
  if (level1_.size() != n * dim_ || level2_.size() != n * dim_ * dim_) {
    throw std::invalid_argument("RoughPathGrid: value arrays do not match grid");
  }
  if (times_[0] != 0.0) {
    throw std::invalid_argument("RoughPathGrid: grid must start at 0");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(times_[i])) {
      throw std::invalid_argument("RoughPathGrid: non-finite time");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw std::invalid_argument(
          "RoughPathGrid: times must be strictly increasing (index " +
          std::to_string(i) + ")");
    }
  }
  for (double v : level1_) {
    if (!std::isfinite(v)) throw std::invalid_argument("RoughPathGrid: non-finite value");
  }
  for (double v : level2_) {
    if (!std::isfinite(v)) throw std::invalid_argument("RoughPathGrid: non-finite value");
  }
  for (std::size_t k = 0; k < dim_; ++k) {
    if (level1_[k] != 0.0) {
      throw std::invalid_argument("RoughPathGrid: value(0) must be the identity");
    }
  }
  for (std::size_t k = 0; k < dim_ * dim_; ++k) {
    if (level2_[k] != 0.0) {
      throw std::invalid_argument("RoughPathGrid: value(0) must be the identity");
    }
  }
}

Level2Increment RoughPathGrid::value(std::size_t i) const {
  const auto m = static_cast<Eigen::Index>(dim_);
  Level2Increment out = Level2Increment::identity(m);
  const auto x = first(i);
  const auto xx = second(i);
  for (Eigen::Index k = 0; k < m; ++k) {
    out.a(k) = x[k];
    for (Eigen::Index l = 0; l < m; ++l) out.M(k, l) = xx[k * m + l];
  }
  return out;
}

Level2Increment RoughPathGrid::increment(std::size_t i, std::size_t j) const {
  const auto m = static_cast<Eigen::Index>(dim_);
  Level2Increment out = Level2Increment::identity(m);
  const auto xi = first(i);
  const auto xj = first(j);
  const auto mi = second(i);
  const auto mj = second(j);
  for (Eigen::Index k = 0; k < m; ++k) out.a(k) = xj[k] - xi[k];
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index l = 0; l < m; ++l) {
      out.M(k, l) = mj[k * m + l] - mi[k * m + l] - xi[k] * out.a(l);
    }
  }
  return out;
}

double RoughPathGrid::first_sqnorm(std::size_t i, std::size_t j) const {
  const double* xi = level1_.data() + i * dim_;
  const double* xj = level1_.data() + j * dim_;
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    const double d = xj[k] - xi[k];
    s += d * d;
  }
  return s;
}

double RoughPathGrid::second_sqnorm(std::size_t i, std::size_t j) const {
  const double* xi = level1_.data() + i * dim_;
  const double* xj = level1_.data() + j * dim_;
  const double* mi = level2_.data() + i * dim_ * dim_;
  const double* mj = level2_.data() + j * dim_ * dim_;
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    for (std::size_t l = 0; l < dim_; ++l) {
      const double d =
          mj[k * dim_ + l] - mi[k * dim_ + l] - xi[k] * (xj[l] - xi[l]);
      s += d * d;
    }
  }
  return s;
}

Matrix RoughPathGrid::first_level() const {
  Matrix out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = 0; k < dim_; ++k) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          level1_[i * dim_ + k];
    }
  }
  return out;
}

namespace {

void require_p_range(double p, const char* who) {
  if (!(p >= 2.0 && p < 3.0)) {
    throw std::invalid_argument(std::string(who) + ": p must lie in [2, 3)");
  }
}

// |x|^q from |x|^2 without the square root.
inline double power_from_sq(double sq, double half_q) {
  return sq == 0.0 ? 0.0 : std::pow(sq, half_q);
}

}  // namespace

double first_level_variation(const RoughPathGrid& path, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("first_level_variation: p must be >= 1");
  const double half = 0.5 * p;
  const double sum = variation_sum(path.size(), [&](std::size_t i, std::size_t j) {
    return power_from_sq(path.first_sqnorm(i, j), half);
  });
  return std::pow(sum, 1.0 / p);
}

double second_level_variation(const RoughPathGrid& path, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("second_level_variation: q must be > 0");
  const double half = 0.5 * q;
  const double sum = variation_sum(path.size(), [&](std::size_t i, std::size_t j) {
    return power_from_sq(path.second_sqnorm(i, j), half);
  });
  return std::pow(sum, 1.0 / q);
}

double p_var_homog(const RoughPathGrid& path, double p) {
  require_p_range(p, "p_var_homog");
  return first_level_variation(path, p) +
         std::sqrt(second_level_variation(path, 0.5 * p));
}

double p_var_inhomog(const RoughPathGrid& path, double p) {
  require_p_range(p, "p_var_inhomog");
  return first_level_variation(path, p) + second_level_variation(path, 0.5 * p);
}

double p_var_inhomog_dist(const RoughPathGrid& x, const RoughPathGrid& y,
                          double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p_var_inhomog_dist: p must be >= 1");
  if (x.dim() != y.dim() || x.size() != y.size() ||
      !std::equal(x.times().begin(), x.times().end(), y.times().begin())) {
    throw std::invalid_argument("p_var_inhomog_dist: grids differ; resample first");
  }
  const std::size_t m = x.dim();
  auto first_diff_sq = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    const auto xi = x.first(i), xj = x.first(j), yi = y.first(i), yj = y.first(j);
    for (std::size_t k = 0; k < m; ++k) {
      const double d = (xj[k] - xi[k]) - (yj[k] - yi[k]);
      s += d * d;
    }
    return s;
  };
  auto second_diff_sq = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    const auto xi = x.first(i), xj = x.first(j), yi = y.first(i), yj = y.first(j);
    const auto mi = x.second(i), mj = x.second(j), ni = y.second(i), nj = y.second(j);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t l = 0; l < m; ++l) {
        const double ex = mj[k * m + l] - mi[k * m + l] - xi[k] * (xj[l] - xi[l]);
        const double ey = nj[k * m + l] - ni[k * m + l] - yi[k] * (yj[l] - yi[l]);
        s += (ex - ey) * (ex - ey);
      }
    }
    return s;
  };
  const double q = 0.5 * p;
  const double first = std::pow(
      variation_sum(x.size(), [&](std::size_t i, std::size_t j) {
        return power_from_sq(first_diff_sq(i, j), 0.5 * p);
      }),
      1.0 / p);
  const double second = std::pow(
      variation_sum(x.size(), [&](std::size_t i, std::size_t j) {
        return power_from_sq(second_diff_sq(i, j), 0.5 * q);
      }),
      1.0 / q);
  return first + second;
}

double p_var_homog_upper_bound(const RoughPathGrid& path, double p) {
  require_p_range(p, "p_var_homog_upper_bound");
  double total_variation = 0.0;
  double max_excursion = 0.0;
  double local_second = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    total_variation += std::sqrt(path.first_sqnorm(k, k + 1));
    local_second += std::sqrt(path.second_sqnorm(k, k + 1));
    max_excursion = std::max(max_excursion, std::sqrt(path.first_sqnorm(0, k + 1)));
  }
  // Sum |X|^p <= diam^{p-1} * total variation; for q = p/2 >= 1 the same
  // argument applies to the super-additive control of the second level.
  const double diameter = std::min(total_variation, 2.0 * max_excursion);
  const double first =
      total_variation == 0.0
          ? 0.0
          : std::pow(std::pow(diameter, p - 1.0) * total_variation, 1.0 / p);
  const double control = local_second + 0.5 * total_variation * total_variation;
  return first + std::sqrt(control);
}

double path_p_variation(const Matrix& values, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("path_p_variation: p must be >= 1");
  const auto n = static_cast<std::size_t>(values.rows());
  const double sum = variation_sum(n, [&](std::size_t i, std::size_t j) {
    const double sq =
        (values.row(static_cast<Eigen::Index>(j)) - values.row(static_cast<Eigen::Index>(i)))
            .squaredNorm();
    return power_from_sq(sq, 0.5 * p);
  });
  return std::pow(sum, 1.0 / p);
}

double holder_norm(const RoughPathGrid& path, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("holder_norm: alpha must lie in (0, 1]");
  }
  double first = 0.0;
  double second = 0.0;
  for (std::size_t j = 1; j < path.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double dt = path.time(j) - path.time(i);
      first = std::max(first, std::sqrt(path.first_sqnorm(i, j)) / std::pow(dt, alpha));
      second = std::max(second,
                        std::sqrt(path.second_sqnorm(i, j)) / std::pow(dt, 2.0 * alpha));
    }
  }
  return first + std::sqrt(second);
}

}  // namespace roughlab
