#include "roughlab/homogenize.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace roughlab {
namespace {

const MapDriver kDoubling{MapKind::doubling, 0.0, 1000};

FastSlowConfig doubling_config(VectorFieldBundle field, const char* obs = "centered-id") {
  FastSlowConfig cfg;
  cfg.field = std::move(field);
  cfg.driver = MapSource{kDoubling, named_observable(obs)};
  cfg.n = 256;
  cfg.replicas = 64;
  cfg.seed = 11;
  cfg.threads = 2;
  return cfg;
}

OUDriver unit_ou() {
  OUDriver d;
  d.friction = Matrix::Identity(1, 1);
  d.epsilon = 0.2;
  d.mesh = 1000;
  return d;
}

TEST(DiscreteFastSlow, ZeroDiffusionGivesDriftOnly) {
  Vector c(2);
  c << 0.3, -1.25;
  auto cfg = doubling_config(constant_field(c, Matrix::Zero(2, 1)));
  cfg.xi = Vector::Constant(2, 0.5);
  const auto s = run_discrete_fast_slow(cfg);
  for (Eigen::Index r = 0; r < s.terminal.rows(); ++r) {
    EXPECT_NEAR(s.terminal(r, 0), 0.8, 1e-12);
    EXPECT_NEAR(s.terminal(r, 1), -0.75, 1e-12);
  }
}

TEST(DiscreteFastSlow, UnitDiffusionTelescopesToScaledSum) {
  auto cfg = doubling_config(constant_field(Vector::Zero(1), Matrix::Identity(1, 1)));
  cfg.xi = Vector::Constant(1, 2.0);
  const auto s = run_discrete_fast_slow(cfg);
  const FastSource source(cfg.driver);
  std::vector<double> seq(cfg.n);
  for (std::size_t r = 0; r < cfg.replicas; ++r) {
    source.sequence(cfg.seed, r, cfg.n, seq);
    double sum = 0.0;
    for (double v : seq) sum += v;
    EXPECT_NEAR(s.terminal(static_cast<Eigen::Index>(r), 0),
                2.0 + sum / std::sqrt(static_cast<double>(cfg.n)), 1e-12);
  }
}

TEST(DiscreteFastSlow, MatchesRdeSolverOnItoLift) {
  auto cfg = doubling_config(scalar_linear_field(0.5, 1.0));
  cfg.verify_replicas = 16;
  const auto s = run_discrete_fast_slow(cfg);
  EXPECT_EQ(s.verified, 16u);
  EXPECT_LE(s.equivalence_error, 1e-12);

  auto heis = doubling_config(heisenberg_field(), "centered-id,cos");
  const auto h = run_discrete_fast_slow(heis);
  EXPECT_LE(h.equivalence_error, 1e-12);
}

TEST(DiscreteFastSlow, ThreadCountDoesNotChangeOutput) {
  auto cfg = doubling_config(scalar_linear_field(0.0, 1.0));
  cfg.threads = 1;
  const auto a = run_discrete_fast_slow(cfg);
  cfg.threads = 3;
  const auto b = run_discrete_fast_slow(cfg);
  EXPECT_EQ(a.terminal, b.terminal);
  EXPECT_EQ(a.path_norms, b.path_norms);
}

TEST(DiscreteFastSlow, RejectsMismatchedNoiseDimension) {
  auto cfg = doubling_config(heisenberg_field());
  EXPECT_THROW(run_discrete_fast_slow(cfg), std::invalid_argument);
  cfg.driver = unit_ou();
  EXPECT_THROW(run_discrete_fast_slow(cfg), std::invalid_argument);
}

TEST(ContinuousFastSlow, ZeroDiffusionMatchesOde) {
  FastSlowConfig cfg;
  cfg.field = linear_field(Matrix::Constant(1, 1, -1.0), {Matrix::Zero(1, 1)});
  cfg.driver = unit_ou();
  cfg.replicas = 8;
  const auto s = run_continuous_fast_slow(cfg);
  for (Eigen::Index r = 0; r < s.terminal.rows(); ++r)
    EXPECT_NEAR(s.terminal(r, 0), std::exp(-1.0), 1e-8);
}

TEST(ContinuousFastSlow, UnitDiffusionFollowsDriver) {
  FastSlowConfig cfg;
  cfg.field = constant_field(Vector::Zero(1), Matrix::Identity(1, 1));
  cfg.driver = unit_ou();
  cfg.replicas = 8;
  cfg.seed = 5;
  cfg.xi = Vector::Zero(1);
  const auto s = run_continuous_fast_slow(cfg);
  const OUPathSampler sampler(unit_ou());
  for (std::size_t r = 0; r < cfg.replicas; ++r) {
    Rng rng(cfg.seed, r, StreamPurpose::ou);
    const Matrix w = sampler.sample_values(rng);
    EXPECT_NEAR(s.terminal(static_cast<Eigen::Index>(r), 0), w(w.rows() - 1, 0), 1e-12);
  }
}

TEST(LimitSde, RequiresStepsOnRecordingGrid) {
  auto cfg = doubling_config(scalar_linear_field(0.0, 1.0));
  LimitSde limit{Matrix::Constant(1, 1, 0.25), Matrix::Zero(1, 1), SdeMode::ito, 100};
  EXPECT_THROW(run_limit_sde(cfg, limit), std::invalid_argument);
  limit.steps = 128;
  const auto s = run_limit_sde(cfg, limit);
  EXPECT_EQ(s.terminal.rows(), 64);
}

TEST(CompareLaws, IdenticalSamplesAgree) {
  auto cfg = doubling_config(scalar_linear_field(0.0, 1.0));
  cfg.replicas = 1000;
  const auto s = run_discrete_fast_slow(cfg);
  const auto cmp = compare_laws(s, s);
  ASSERT_EQ(cmp.coords.size(), 1u);
  EXPECT_EQ(cmp.coords[0].ks.statistic, 0.0);
  EXPECT_EQ(cmp.coords[0].mean_gap, 0.0);
  EXPECT_EQ(cmp.coords[0].wasserstein1, 0.0);
  EXPECT_TRUE(cmp.pass);
}

TEST(CompareLaws, RejectsSmallOrUnequalSamples) {
  auto cfg = doubling_config(scalar_linear_field(0.0, 1.0));
  const auto small = run_discrete_fast_slow(cfg);
  EXPECT_THROW(compare_laws(small, small), std::invalid_argument);
  cfg.replicas = 65;
  const auto other = run_discrete_fast_slow(cfg);
  EXPECT_THROW(compare_laws(small, other, {0.01, 10}), std::invalid_argument);
  EXPECT_NO_THROW(compare_laws(small, small, {0.01, 10}));
}

// Doubling map with v = y - 1/2 drives x' = x dW: the limit is geometric
// Brownian motion with sigma = 1/4 and Ito drift gamma = 1/12.
TEST(CorrectionAblation, GeometricBrownianMotionNeedsTheDrift) {
  auto cfg = doubling_config(scalar_linear_field(0.0, 1.0));
  cfg.n = 512;
  cfg.replicas = 2000;
  const LimitSde limit{Matrix::Constant(1, 1, 0.25), Matrix::Constant(1, 1, 1.0 / 12.0),
                       SdeMode::ito, 512};
  const auto report = correction_ablation(cfg, limit);
  EXPECT_TRUE(report.correction_active);
  EXPECT_TRUE(report.corrected.pass);
  EXPECT_TRUE(report.uncorrected_mean_fails);
  EXPECT_TRUE(report.pass);
  EXPECT_NEAR(report.corrected.coords[0].mean_a, std::exp(1.0 / 12.0),
              4.0 * report.corrected.coords[0].mean_gap_stderr);
}

TEST(CorrectionAblation, ZeroGammaOrConstantFieldIsInactive) {
  auto cfg = doubling_config(scalar_linear_field(0.0, 1.0), "cos");
  cfg.replicas = 1000;
  const LimitSde zero{Matrix::Constant(1, 1, 0.5), Matrix::Zero(1, 1), SdeMode::ito, 256};
  const auto a = correction_ablation(cfg, zero);
  EXPECT_FALSE(a.correction_active);
  EXPECT_EQ(a.corrected.coords[0].ks.statistic, a.uncorrected.coords[0].ks.statistic);
  EXPECT_FALSE(a.pass);

  auto flat = doubling_config(constant_field(Vector::Zero(1), Matrix::Identity(1, 1)));
  flat.replicas = 1000;
  const LimitSde gamma{Matrix::Constant(1, 1, 0.25), Matrix::Constant(1, 1, 1.0 / 12.0),
                       SdeMode::ito, 256};
  EXPECT_FALSE(correction_ablation(flat, gamma).correction_active);
}

TEST(CalibrateLimit, ConventionFollowsDriver) {
  auto cfg = doubling_config(scalar_linear_field(0.0, 1.0));
  const auto ito = calibrate_limit(cfg, 2000, 3, 256);
  EXPECT_EQ(ito.mode, SdeMode::ito);
  EXPECT_NEAR(ito.sigma(0, 0), 0.25, 0.03);
  EXPECT_NEAR(ito.gamma(0, 0), 1.0 / 12.0, 0.02);

  cfg.driver = unit_ou();
  const auto strat = calibrate_limit(cfg, 200, 3, 256);
  EXPECT_EQ(strat.mode, SdeMode::stratonovich);
  EXPECT_NEAR(strat.gamma(0, 0), 0.0, 1e-12);
}

}  // namespace
}  // namespace roughlab
