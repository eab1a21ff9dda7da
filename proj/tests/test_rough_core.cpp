#include "roughlab/lifts.hpp"
#include "roughlab/rough_core.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace roughlab {
namespace {

using testing::random_element;
using testing::random_request;

Level2Increment element(std::initializer_list<double> a, const Matrix& m) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (double x : a) v(i++) = x;
  return {v, m};
}

RoughPathGrid scalar_path(std::vector<double> times, std::vector<double> x,
                          std::vector<double> xx) {
  return RoughPathGrid(std::move(times), std::move(x), std::move(xx), 1,
                       PathFlavor::geometric_continuous);
}

TEST(GroupLaw, IdentityIsNeutral) {
  Rng rng(1);
  const auto y = random_element(rng, 3);
  const auto out = group_mul(Level2Increment::identity(3), y);
  EXPECT_EQ(out.a, y.a);
  EXPECT_EQ(out.M, y.M);
}

TEST(GroupLaw, TensorTermOfUnitVectors) {
  const auto x = element({1.0, 0.0}, Matrix::Zero(2, 2));
  const auto y = element({0.0, 1.0}, Matrix::Zero(2, 2));
  const auto out = group_mul(x, y);
  EXPECT_EQ(out.a, Vector::Ones(2));
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 1) = 1.0;
  EXPECT_EQ(out.M, expected);
}

TEST(GroupLaw, ScalarInverse) {
  const auto inv = group_inv(element({2.0}, Matrix::Constant(1, 1, 3.0)));
  EXPECT_DOUBLE_EQ(inv.a(0), -2.0);
  EXPECT_DOUBLE_EQ(inv.M(0, 0), 1.0);
  const auto zero = group_inv(Level2Increment::identity(2));
  EXPECT_TRUE(zero.a.isZero(0.0));
  EXPECT_TRUE(zero.M.isZero(0.0));
}

TEST(GroupLaw, RandomizedAxioms) {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index m = 1 + trial % 4;
    const auto x = random_element(rng, m), y = random_element(rng, m), z = random_element(rng, m);
    EXPECT_LE(relative_error(group_mul(group_mul(x, y), z), group_mul(x, group_mul(y, z))),
              kAlgebraicTolerance);
    EXPECT_LE(relative_error(group_mul(x, group_inv(x)), Level2Increment::identity(m)),
              kAlgebraicTolerance);
    EXPECT_LE(relative_error(group_mul(group_inv(x), x), Level2Increment::identity(m)),
              kAlgebraicTolerance);
    EXPECT_LE(relative_error(group_inv(group_inv(x)), x), kAlgebraicTolerance);
  }
}

TEST(GroupLaw, DimensionMismatchThrows) {
  EXPECT_THROW(group_mul(Level2Increment::identity(2), Level2Increment::identity(3)),
               std::invalid_argument);
}

TEST(SymDefect, GeometricElementHasNone) {
  Rng rng(3);
  const auto x = random_element(rng, 3);
  const Level2Increment g{x.a, 0.5 * x.a * x.a.transpose()};
  EXPECT_LE(sym_defect(g).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(sym_defect(element({1.0}, Matrix::Zero(1, 1)))(0, 0), -0.5);
}

TEST(SymDefect, SingleJumpItoLift) {
  // One jump D: the Ito second level is 0, so the defect is -D (x) D / 2.
  Matrix values(3, 2);
  values << 0.0, 0.0, 0.0, 0.0, 1.5, -0.7;
  const auto path = lift_piecewise_constant_ito({{0.0, 0.5, 1.0}, values, LiftMode::piecewise_constant_ito});
  const auto inc = path.increment(0, 2);
  const Matrix expected = -0.5 * inc.a * inc.a.transpose();
  EXPECT_LE((sym_defect(inc) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RoughPathGrid, RejectsBadGrids) {
  EXPECT_THROW(scalar_path({0.0, 0.5, 0.5, 1.0}, {0, 0, 0, 0}, {0, 0, 0, 0}), std::invalid_argument);
  EXPECT_THROW(scalar_path({0.0}, {0}, {0}), std::invalid_argument);
  EXPECT_THROW(scalar_path({0.1, 1.0}, {0, 1}, {0, 0}), std::invalid_argument);
  EXPECT_THROW(scalar_path({0.0, 1.0}, {1, 1}, {0, 0}), std::invalid_argument);
  EXPECT_THROW(scalar_path({0.0, 1.0}, {0, NAN}, {0, 0}), std::invalid_argument);
}

TEST(RoughPathGrid, IncrementMatchesGroupDivision) {
  Rng rng(4);
  const auto path = lift(random_request(rng, 9, 3, LiftMode::piecewise_linear));
  for (std::size_t i = 0; i < path.size(); ++i) {
    for (std::size_t j = i; j < path.size(); ++j) {
      const auto direct = group_mul(group_inv(path.value(i)), path.value(j));
      EXPECT_LE(relative_error(path.increment(i, j), direct), kAlgebraicTolerance);
    }
  }
}

// ---- p-variation

// Exhaustive sup over all 2^{N-2} partitions, increments by group division.
double enumerate_homog(const RoughPathGrid& path, double p) {
  const std::size_t n = path.size();
  double best1 = 0.0, best2 = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 2)); ++mask) {
    double s1 = 0.0, s2 = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 1; k < n; ++k) {
      const bool keep = k == n - 1 || ((mask >> (k - 1)) & 1u);
      if (!keep) continue;
      const auto inc = group_mul(group_inv(path.value(prev)), path.value(k));
      s1 += std::pow(inc.a.norm(), p);
      s2 += std::pow(inc.M.norm(), p / 2.0);
      prev = k;
    }
    best1 = std::max(best1, s1);
    best2 = std::max(best2, s2);
  }
  return std::pow(best1, 1.0 / p) + std::sqrt(std::pow(best2, 2.0 / p));
}

TEST(PVariation, DynamicProgramEqualsEnumeration) {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t points = 2 + static_cast<std::size_t>(trial % 11);
    const auto mode = trial % 2 ? LiftMode::piecewise_linear : LiftMode::piecewise_constant_ito;
    const auto path = lift(random_request(rng, points, 1 + trial % 3, mode));
    const double p = 2.0 + 0.99 * rng.uniform();
    const double dp = p_var_homog(path, p);
    const double brute = enumerate_homog(path, p);
    EXPECT_NEAR(dp, brute, 1e-12 * std::max(1.0, brute)) << "points=" << points;
  }
}

TEST(PVariation, SingleIncrement) {
  const auto path = scalar_path({0.0, 1.0}, {0.0, 1.0}, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(p_var_homog(path, 2.5), 1.0);
}

TEST(PVariation, TwoOppositeUnitIncrements) {
  const auto path = lift_piecewise_linear(
      {{0.0, 0.5, 1.0}, (Matrix(3, 1) << 0.0, 1.0, 0.0).finished(), LiftMode::piecewise_linear});
  for (double p : {2.0, 2.5, 2.9}) {
    EXPECT_NEAR(first_level_variation(path, p), std::pow(2.0, 1.0 / p), 1e-14);
  }
}

TEST(PVariation, MonotonePathHasUnitVariation) {
  Matrix t(17, 1);
  for (int k = 0; k < 17; ++k) t(k, 0) = k / 16.0;
  const auto path = lift_piecewise_linear({uniform_grid(16), t, LiftMode::piecewise_linear});
  for (double p : {1.0, 1.5, 2.0, 2.7}) EXPECT_NEAR(first_level_variation(path, p), 1.0, 1e-14);
}

TEST(PVariation, NonIncreasingInP) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto path = lift(random_request(rng, 40, 2, LiftMode::piecewise_linear));
    double prev = first_level_variation(path, 1.0);
    for (double p = 1.25; p < 4.0; p += 0.25) {
      const double cur = first_level_variation(path, p);
      EXPECT_LE(cur, prev * (1 + 1e-13));
      prev = cur;
    }
  }
}

TEST(PVariation, RejectsExponentOutsideRange) {
  const auto path = scalar_path({0.0, 1.0}, {0.0, 1.0}, {0.0, 0.5});
  EXPECT_THROW(p_var_homog(path, 1.9), std::invalid_argument);
  EXPECT_THROW(p_var_homog(path, 3.0), std::invalid_argument);
  EXPECT_THROW(p_var_inhomog(path, 3.5), std::invalid_argument);
}

TEST(PVariation, UpperBoundDominates) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto mode = trial % 2 ? LiftMode::piecewise_linear : LiftMode::piecewise_constant_ito;
    const auto path = lift(random_request(rng, 30, 2, mode));
    EXPECT_GE(p_var_homog_upper_bound(path, 2.4), p_var_homog(path, 2.4) * (1 - 1e-12));
  }
}

TEST(PVariationDistance, ZeroAndSymmetric) {
  Rng rng(8);
  const auto req = random_request(rng, 12, 2, LiftMode::piecewise_linear);
  auto other = req;
  other.base_values += 0.3 * Matrix::Random(12, 2);
  const auto x = lift(req), y = lift(other);
  EXPECT_EQ(p_var_inhomog_dist(x, x, 2.5), 0.0);
  EXPECT_NEAR(p_var_inhomog_dist(x, y, 2.5), p_var_inhomog_dist(y, x, 2.5), 1e-14);
}

TEST(PVariationDistance, LinearPathsOfDifferentSpeed) {
  const auto grid = uniform_grid(8);
  Matrix slow(9, 1), fast(9, 1);
  for (int k = 0; k < 9; ++k) {
    slow(k, 0) = grid[k];
    fast(k, 0) = 2.0 * grid[k];
  }
  const auto x = lift_piecewise_linear({grid, slow, LiftMode::piecewise_linear});
  const auto y = lift_piecewise_linear({grid, fast, LiftMode::piecewise_linear});
  for (double p : {2.0, 2.5}) EXPECT_NEAR(p_var_inhomog_dist(x, y, p), 2.5, 1e-13);
}

TEST(PVariationDistance, GridMismatchThrows) {
  const auto a = pure_area_path(Matrix::Zero(1, 1), uniform_grid(4));
  const auto b = pure_area_path(Matrix::Zero(1, 1), uniform_grid(5));
  EXPECT_THROW(p_var_inhomog_dist(a, b, 2.5), std::invalid_argument);
}

TEST(HolderNorm, LinearPathAndConstantPath) {
  Matrix t(5, 1);
  for (int k = 0; k < 5; ++k) t(k, 0) = k / 4.0;
  const auto path = lift_piecewise_linear({uniform_grid(4), t, LiftMode::piecewise_linear});
  // X_{s,t} = t - s and XX_{s,t} = (t - s)^2 / 2.
  EXPECT_NEAR(holder_norm(path, 1.0), 1.0 + std::sqrt(0.5), 1e-14);
  const auto flat = pure_area_path(Matrix::Zero(2, 2), uniform_grid(6));
  EXPECT_EQ(holder_norm(flat, 0.4), 0.0);
}

TEST(HolderNorm, MatchesBruteForce) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto path = lift(random_request(rng, 15, 2, LiftMode::piecewise_linear));
    const double alpha = 0.3 + 0.2 * rng.uniform();
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      for (std::size_t j = i + 1; j < path.size(); ++j) {
        const auto inc = group_mul(group_inv(path.value(i)), path.value(j));
        const double dt = path.time(j) - path.time(i);
        a = std::max(a, inc.a.norm() / std::pow(dt, alpha));
        b = std::max(b, inc.M.norm() / std::pow(dt, 2 * alpha));
      }
    }
    EXPECT_NEAR(holder_norm(path, alpha), a + std::sqrt(b), 1e-12 * (a + std::sqrt(b)));
  }
}

}  // namespace
}  // namespace roughlab
