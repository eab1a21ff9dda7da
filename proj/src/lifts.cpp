#include "roughlab/lifts.hpp"

#include "roughlab/linalg.hpp"

#include <random>
#include <stdexcept>

namespace roughlab {

namespace {

void check_request(const LiftRequest& req, LiftMode expected, const char* who) {
  if (req.mode != expected) {
    throw std::invalid_argument(std::string(who) + ": lift mode mismatch");
  }
  if (static_cast<std::size_t>(req.base_values.rows()) != req.times.size()) {
    throw std::invalid_argument(std::string(who) + ": one sample per time required");
  }
  if (req.base_values.cols() < 1) {
    throw std::invalid_argument(std::string(who) + ": path dimension must be >= 1");
  }
  for (std::size_t k = 1; k < req.times.size(); ++k) {
    if (!(req.times[k] > req.times[k - 1])) {
      throw std::invalid_argument(std::string(who) + ": times must be strictly increasing");
    }
  }
  if (!req.base_values.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite sample");
  }
}

// Shared accumulation loop. `half` is 1/2 for the Stratonovich lift and 0 for
// the Ito lift; the pre-step value X_k - X_0 is the left limit either way.
RoughPathGrid accumulate(const LiftRequest& req, double half, PathFlavor flavor) {
  const std::size_t n = req.times.size();
  const auto m = static_cast<std::size_t>(req.base_values.cols());
  std::vector<double> level1(n * m, 0.0);
  std::vector<double> level2(n * m * m, 0.0);
  std::vector<double> delta(m);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    for (std::size_t i = 0; i < m; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      delta[i] = req.base_values(row + 1, col) - req.base_values(row, col);
      level1[(k + 1) * m + i] = req.base_values(row + 1, col) - req.base_values(0, col);
    }
    const double* x = level1.data() + k * m;
    const double* prev = level2.data() + k * m * m;
    double* next = level2.data() + (k + 1) * m * m;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        next[i * m + j] = prev[i * m + j] + x[i] * delta[j] + half * delta[i] * delta[j];
      }
    }
  }
  return RoughPathGrid(req.times, std::move(level1), std::move(level2), m, flavor);
}

}  // namespace

RoughPathGrid lift_piecewise_linear(const LiftRequest& req) {
  check_request(req, LiftMode::piecewise_linear, "lift_piecewise_linear");
  return accumulate(req, 0.5, PathFlavor::geometric_continuous);
}

RoughPathGrid lift_piecewise_constant_ito(const LiftRequest& req) {
  check_request(req, LiftMode::piecewise_constant_ito, "lift_piecewise_constant_ito");
  return accumulate(req, 0.0, PathFlavor::cadlag_ito);
}

RoughPathGrid lift(const LiftRequest& req) {
  return req.mode == LiftMode::piecewise_linear ? lift_piecewise_linear(req)
                                                : lift_piecewise_constant_ito(req);
}

std::vector<double> uniform_grid(std::size_t steps, double horizon) {
  if (steps < 1) throw std::invalid_argument("uniform_grid: need at least one step");
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    t[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
  }
  return t;
}

RoughPathGrid brownian_rough_path(const Matrix& sigma, const Matrix& gamma,
                                  std::size_t steps, Rng& rng) {
  const Matrix root = psd_sqrt(sigma);
  const Eigen::Index m = sigma.rows();
  if (gamma.rows() != m || gamma.cols() != m) {
    throw std::invalid_argument("brownian_rough_path: gamma must be m x m");
  }
  LiftRequest req{uniform_grid(steps), Matrix::Zero(static_cast<Eigen::Index>(steps) + 1, m),
                  LiftMode::piecewise_linear};
  std::normal_distribution<double> normal;
  const double scale = std::sqrt(1.0 / static_cast<double>(steps));
  Vector z(m);
  for (Eigen::Index k = 1; k <= static_cast<Eigen::Index>(steps); ++k) {
    for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
    req.base_values.row(k) = req.base_values.row(k - 1) + scale * (root * z).transpose();
  }
  RoughPathGrid lifted = lift_piecewise_linear(req);
  if (gamma.isZero(0.0)) return lifted;

  const auto mm = static_cast<std::size_t>(m);
  std::vector<double> level1(lifted.size() * mm);
  std::vector<double> level2(lifted.size() * mm * mm);
  for (std::size_t k = 0; k < lifted.size(); ++k) {
    const auto x = lifted.first(k);
    const auto xx = lifted.second(k);
    std::copy(x.begin(), x.end(), level1.begin() + static_cast<std::ptrdiff_t>(k * mm));
    for (std::size_t i = 0; i < mm; ++i) {
      for (std::size_t j = 0; j < mm; ++j) {
        level2[k * mm * mm + i * mm + j] =
            xx[i * mm + j] +
            lifted.time(k) * gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return RoughPathGrid(req.times, std::move(level1), std::move(level2), mm,
                       PathFlavor::geometric_continuous);
}

RoughPathGrid brownian_rough_path(const Matrix& sigma, const Matrix& gamma,
                                  std::size_t steps, std::uint64_t seed) {
  Rng rng(seed, 0, StreamPurpose::brownian);
  return brownian_rough_path(sigma, gamma, steps, rng);
}

RoughPathGrid pure_area_path(const Matrix& gamma, std::vector<double> times) {
  const Eigen::Index m = gamma.rows();
  if (gamma.cols() != m || m < 1) {
    throw std::invalid_argument("pure_area_path: gamma must be square");
  }
  const auto mm = static_cast<std::size_t>(m);
  std::vector<double> level1(times.size() * mm, 0.0);
  std::vector<double> level2(times.size() * mm * mm, 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t i = 0; i < mm; ++i) {
      for (std::size_t j = 0; j < mm; ++j) {
        level2[k * mm * mm + i * mm + j] =
            times[k] * gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return RoughPathGrid(std::move(times), std::move(level1), std::move(level2), mm,
                       PathFlavor::geometric_continuous);
}

}  // namespace roughlab
