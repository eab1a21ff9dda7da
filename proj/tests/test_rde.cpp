#include "roughlab/lifts.hpp"
#include "roughlab/rde.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace roughlab {
namespace {

RoughPathGrid linear_driver(std::size_t steps, double slope = 1.0) {
  const auto grid = uniform_grid(steps);
  Matrix x(static_cast<Eigen::Index>(steps + 1), 1);
  for (std::size_t k = 0; k <= steps; ++k) x(static_cast<Eigen::Index>(k), 0) = slope * grid[k];
  return lift_piecewise_linear({grid, x, LiftMode::piecewise_linear});
}

VectorFieldBundle square_field() {
  VectorFieldBundle vf;
  vf.dim_state = 1;
  vf.dim_noise = 1;
  vf.diffusion = [](std::span<const double> y, std::span<double> out) { out[0] = y[0] * y[0]; };
  vf.diffusion_jacobian = [](std::span<const double> y, std::span<double> out) { out[0] = 2 * y[0]; };
  return vf;
}

TEST(SolveRde, IdentityDriverIsExplicitEuler) {
  VectorFieldBundle vf = scalar_linear_field(0.0, 1.0);
  vf.drift = [](std::span<const double> y, std::span<double> out) { out[0] = std::sin(y[0]) + 1.0; };
  const auto driver = pure_area_path(Matrix::Zero(1, 1), uniform_grid(50));
  const auto sol = solve_rde(vf, driver, Vector::Constant(1, 0.3));
  double y = 0.3;
  for (int k = 0; k < 50; ++k) y += (std::sin(y) + 1.0) * 0.02;
  EXPECT_DOUBLE_EQ(sol.terminal()(0), y);
  ASSERT_EQ(sol.times.size(), 51u);
}

TEST(SolveRde, SmoothDriverConvergesToExponential) {
  const auto vf = scalar_linear_field(0.0, 1.0);
  double prev_err = 0.0;
  for (std::size_t steps : {16, 32, 64, 128}) {
    const double err = std::abs(solve_rde(vf, linear_driver(steps), Vector::Ones(1)).terminal()(0) - std::exp(1.0));
    if (prev_err > 0.0) EXPECT_GE(std::log2(prev_err / err), 1.0);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 1e-3);
}

TEST(SolveRde, PureAreaDriverGivesExponentialOfGamma) {
  const auto vf = scalar_linear_field(0.0, 1.0);
  const double g = 0.7;
  double prev_err = 0.0;
  for (std::size_t steps : {16, 32, 64, 128}) {
    const auto driver = pure_area_path(Matrix::Constant(1, 1, g), uniform_grid(steps));
    const double err = std::abs(solve_rde(vf, driver, Vector::Ones(1)).terminal()(0) - std::exp(g));
    if (prev_err > 0.0) EXPECT_GE(std::log2(prev_err / err), 0.95);
    prev_err = err;
  }
}

TEST(SolveRde, RecordStrideKeepsEndpoints) {
  const auto vf = scalar_linear_field(0.0, 1.0);
  RdeOptions opt;
  opt.record_stride = 3;
  const auto sol = solve_rde(vf, linear_driver(10), Vector::Ones(1), opt);
  EXPECT_EQ(sol.times, (std::vector<double>{0.0, 0.3, 0.6, 0.9, 1.0}));
  EXPECT_EQ(sol.states.rows(), 5);
}

TEST(SolveRde, RemainderProxyShrinksUnderRefinement) {
  const auto vf = scalar_linear_field(0.0, 1.0);
  const auto coarse = solve_rde(vf, linear_driver(16), Vector::Ones(1));
  const auto fine = solve_rde(vf, linear_driver(64), Vector::Ones(1));
  EXPECT_GT(coarse.max_remainder_proxy, 0.0);
  EXPECT_LT(fine.max_remainder_proxy, coarse.max_remainder_proxy / 4.0);
}

TEST(SolveRde, BlowUpCarriesTime) {
  try {
    solve_rde(square_field(), linear_driver(200, 5.0), Vector::Ones(1));
    FAIL() << "expected blow-up";
  } catch (const BlowUpError& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), 1.0);
  }
}

TEST(SolveRde, DimensionMismatchThrows) {
  const auto vf = scalar_linear_field(0.0, 1.0);
  EXPECT_THROW(solve_rde(vf, pure_area_path(Matrix::Zero(2, 2), uniform_grid(4)), Vector::Ones(1)),
               std::invalid_argument);
  EXPECT_THROW(solve_rde(vf, linear_driver(4), Vector::Ones(2)), std::invalid_argument);
}

TEST(FiniteDiffCheck, LinearFieldIsExact) {
  Matrix a(2, 2);
  a << 0.1, 0.2, -0.3, 0.0;
  std::vector<Matrix> b{Matrix::Random(2, 2), Matrix::Random(2, 2), Matrix::Random(2, 2)};
  EXPECT_LT(finite_diff_check_dv(linear_field(a, b), 200, 1e-3, 1), 1e-9);
  EXPECT_LT(finite_diff_check_dv(heisenberg_field(), 200, 1e-3, 1), 1e-10);
  EXPECT_EQ(finite_diff_check_dv(constant_field(Vector::Ones(2), Matrix::Ones(2, 3)), 50, 1e-3, 1), 0.0);
}

TEST(FiniteDiffCheck, QuadraticFieldErrorIsSecondOrder) {
  // V = y^2 has exact central differences; use V = y^3 for a visible O(h^2).
  VectorFieldBundle vf;
  vf.dim_state = 1;
  vf.dim_noise = 1;
  vf.diffusion = [](std::span<const double> y, std::span<double> out) { out[0] = y[0] * y[0] * y[0]; };
  vf.diffusion_jacobian = [](std::span<const double> y, std::span<double> out) { out[0] = 3 * y[0] * y[0]; };
  EXPECT_LT(finite_diff_check_dv(square_field(), 100, 1e-2, 3), 1e-12);
  const double e1 = finite_diff_check_dv(vf, 100, 1e-2, 3);
  const double e2 = finite_diff_check_dv(vf, 100, 5e-3, 3);
  EXPECT_GT(e1, 0.0);
  EXPECT_NEAR(e1 / e2, 4.0, 0.05);
}

TEST(FiniteDiffCheck, FlagsWrongJacobian) {
  VectorFieldBundle vf = square_field();
  vf.diffusion_jacobian = [](std::span<const double> y, std::span<double> out) { out[0] = y[0]; };
  EXPECT_GT(finite_diff_check_dv(vf, 100, 1e-3, 4), 0.1);
}

TEST(SolveSde, NoNoiseIsEulerOde) {
  VectorFieldBundle vf = scalar_linear_field(-0.5, 1.0);
  const auto sol = solve_sde_euler_maruyama(vf, SdeMode::ito, Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                                            20, 3, Vector::Ones(1));
  EXPECT_NEAR(sol.terminal()(0), std::pow(1.0 - 0.5 / 20, 20), 1e-14);
}

double sde_mean(SdeMode mode, double sigma2, double gamma, int samples) {
  const auto vf = scalar_linear_field(0.0, 1.0);
  double sum = 0.0, sq = 0.0;
  RdeOptions opt;
  opt.record_stride = 1000;
  for (int r = 0; r < samples; ++r) {
    Rng rng(21, r, StreamPurpose::sde);
    const double x = solve_sde_euler_maruyama(vf, mode, Matrix::Constant(1, 1, sigma2),
                                              Matrix::Constant(1, 1, gamma), 64, rng,
                                              Vector::Ones(1), opt)
                         .terminal()(0);
    sum += x;
    sq += x * x;
  }
  return sum / samples;
}

TEST(SolveSde, GeometricBrownianMean) {
  constexpr int kSamples = 40000;
  const double mean = sde_mean(SdeMode::ito, 0.25, 1.0 / 12.0, kSamples);
  // Var X(1) = e^{2 Gamma} (e^{sigma^2} - 1) for the exact law.
  const double se = std::sqrt(std::exp(2.0 / 12.0) * (std::exp(0.25) - 1.0) / kSamples);
  EXPECT_NEAR(mean, std::exp(1.0 / 12.0), 3 * se);
}

TEST(SolveSde, StratonovichAddsHalfSigma) {
  constexpr int kSamples = 40000;
  const double strat = sde_mean(SdeMode::stratonovich, 0.25, 0.0, kSamples);
  const double ito = sde_mean(SdeMode::ito, 0.25, 0.125, kSamples);
  // Same seeds and same effective drift: identical paths.
  EXPECT_DOUBLE_EQ(strat, ito);
  const double se = std::sqrt(std::exp(0.25) * (std::exp(0.25) - 1.0) / kSamples);
  EXPECT_NEAR(strat, std::exp(0.125), 3 * se);
}

TEST(SolveSde, RejectsIndefiniteSigma) {
  const auto vf = heisenberg_field();
  Matrix bad(2, 2);
  bad << 0.0, 1.0, 1.0, 0.0;
  EXPECT_THROW(solve_sde_euler_maruyama(vf, SdeMode::ito, bad, Matrix::Zero(2, 2), 4, 1, Vector::Zero(2)),
               std::invalid_argument);
}

TEST(Heisenberg, AreaDriftFeedsSecondCoordinate) {
  Matrix gamma(2, 2);
  gamma << 0.0, 0.4, -0.4, 0.0;
  const auto sol = solve_rde(heisenberg_field(), pure_area_path(gamma, uniform_grid(8)), Vector::Zero(2));
  EXPECT_NEAR(sol.terminal()(0), 0.0, 1e-15);
  EXPECT_NEAR(sol.terminal()(1), 0.4, 1e-14);
}

}  // namespace
}  // namespace roughlab
