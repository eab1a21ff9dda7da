#include "roughlab/estimators.hpp"
#include "roughlab/lifts.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace roughlab {
namespace {

const MapDriver kDoubling{MapKind::doubling, 0.0, 1000};

DriverSpec doubling(const char* obs) { return MapSource{kDoubling, named_observable(obs)}; }

bool within(double est, double se, double truth, double k = 3.0) {
  return std::abs(est - truth) <= k * se;
}

TEST(Jackknife, MeanErrorIsSampleStdOverRootN) {
  const std::vector<double> x{1.0, 2.0, 4.0, 7.0};
  const auto jk = jackknife_mean(x);
  EXPECT_DOUBLE_EQ(jk.estimate, 3.5);
  const double s2 = (6.25 + 2.25 + 0.25 + 12.25) / 3.0;
  EXPECT_NEAR(jk.stderr_, std::sqrt(s2 / 4.0), 1e-14);
  const auto generic = jackknife({x}, [](std::span<const double> m) { return m[0]; });
  EXPECT_NEAR(generic.stderr_, jk.stderr_, 1e-14);
}

TEST(LinearFit, RecoversLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto fit = linear_fit(x, y);
  EXPECT_NEAR(fit.slope, 2.0, 1e-14);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
}

TEST(EstimateSigma, ZeroObservable) {
  const auto s = estimate_batch(doubling("zero"), 100, 50);
  EXPECT_TRUE(s.sigma_hat.isZero(0.0));
  EXPECT_TRUE(s.gamma_hat.isZero(0.0));
}

TEST(EstimateSigma, RefusesUncenteredObservable) {
  Observable raw = centered_identity();
  raw.mean_zero = false;
  EXPECT_THROW(estimate_batch(MapSource{kDoubling, raw}, 10, 10), std::invalid_argument);
}

TEST(EstimateSigma, DoublingOracles) {
  BatchOptions opt{.seed = 3};
  const auto id = estimate_batch(doubling("centered-id"), 1000, 3000, opt);
  EXPECT_TRUE(within(id.sigma_hat(0, 0), id.sigma_stderr(0, 0), 0.25));
  EXPECT_TRUE(within(id.gamma_hat(0, 0), id.gamma_stderr(0, 0), 1.0 / 12.0));
  const auto cs = estimate_batch(doubling("cos"), 1000, 3000, opt);
  EXPECT_TRUE(within(cs.sigma_hat(0, 0), cs.sigma_stderr(0, 0), 0.5));
  EXPECT_TRUE(within(cs.gamma_hat(0, 0), cs.gamma_stderr(0, 0), 0.0));
  EXPECT_TRUE(id.sigma_psd_within_error());
}

TEST(EstimateSigma, ThreadCountDoesNotChangeResults) {
  const auto a = estimate_batch(doubling("centered-id,cos"), 200, 97, {.seed = 4, .threads = 1});
  const auto b = estimate_batch(doubling("centered-id,cos"), 200, 97, {.seed = 4, .threads = 3});
  EXPECT_EQ(a.sigma_hat, b.sigma_hat);
  EXPECT_EQ(a.gamma_hat, b.gamma_hat);
  EXPECT_EQ(a.sigma_stderr, b.sigma_stderr);
}

TEST(EstimateSigma, ItoDecompositionHoldsOnAverage) {
  // Per sample: W (x) W = WW + WW^T + n^{-1} sum v (x) v.
  const auto driver = doubling("centered-id,cos");
  const FastSource src(driver);
  constexpr std::size_t kN = 64;
  Matrix lhs = Matrix::Zero(2, 2), rhs = Matrix::Zero(2, 2);
  for (std::size_t r = 0; r < 200; ++r) {
    std::vector<double> seq(kN * 2);
    src.sequence(5, r, kN, seq);
    SumAccumulator acc(2);
    for (std::size_t j = 0; j < kN; ++j) acc.push(std::span<const double>(seq).subspan(2 * j, 2));
    const Vector w = acc.sum();
    lhs += w * w.transpose();
    rhs += acc.strict() + acc.strict().transpose() + acc.diagonal();
  }
  EXPECT_LE(relative_error(lhs, rhs), 1e-12);
}

TEST(GreenKubo, ZeroLagIsSampleSecondMoment) {
  const auto driver = doubling("centered-id");
  const auto gk = estimate_sigma_green_kubo(driver, 500, 20, {.lag_max = 0}, {.seed = 6});
  const FastSource src(driver);
  double total = 0.0;
  for (std::size_t r = 0; r < 20; ++r) {
    std::vector<double> seq(500);
    src.sequence(6, r, 500, seq);
    double s = 0.0;
    for (double v : seq) s += v * v;
    total += s / 500.0;
  }
  EXPECT_NEAR(gk.sigma_hat(0, 0), total / 20.0, 1e-14);
  EXPECT_EQ(gk.lag_max, 0u);
}

TEST(GreenKubo, DoublingSeriesAndAgreementWithBatch) {
  BatchOptions opt{.seed = 7};
  const auto gk = estimate_sigma_green_kubo(doubling("centered-id"), 2000, 400, {.lag_max = 30}, opt);
  EXPECT_TRUE(within(gk.sigma_hat(0, 0), gk.sigma_stderr(0, 0) + gk.truncation_tail, 0.25));
  const auto batch = estimate_sigma_batch(doubling("centered-id"), 2000, 2000, opt);
  const double combined = std::hypot(gk.sigma_stderr(0, 0), batch.sigma_stderr(0, 0));
  EXPECT_TRUE(within(gk.sigma_hat(0, 0), combined, batch.sigma_hat(0, 0)));
}

TEST(GreenKubo, AutomaticLagStopsEarlyForCosine) {
  const auto gk = estimate_sigma_green_kubo(doubling("cos"), 2000, 200, {}, {.seed = 8});
  EXPECT_TRUE(gk.lag_auto);
  EXPECT_FALSE(gk.lag_cap_hit);
  EXPECT_LE(gk.lag_max, 8u);
  EXPECT_TRUE(within(gk.sigma_hat(0, 0), gk.sigma_stderr(0, 0), 0.5));
}

TEST(EstimateGamma, SeriesAndEmpiricalAgree) {
  BatchOptions opt{.seed = 9};
  const auto series = estimate_gamma(doubling("centered-id"), 2000, 400, GammaMethod::series, {}, opt);
  EXPECT_TRUE(within(series.gamma_hat(0, 0), series.gamma_stderr(0, 0), 1.0 / 12.0));
  const auto emp = estimate_gamma(doubling("centered-id"), 2000, 2000, GammaMethod::empirical, {}, opt);
  const double combined = std::hypot(series.gamma_stderr(0, 0), emp.gamma_stderr(0, 0));
  EXPECT_TRUE(within(series.gamma_hat(0, 0), combined, emp.gamma_hat(0, 0)));
  EXPECT_FALSE(emp.has_sigma);
}

TEST(EstimateGamma, SeriesRejectsOu) {
  EXPECT_THROW(estimate_gamma(OUDriver{Matrix::Identity(1, 1), 0.1, 1000}, 10, 10, GammaMethod::series),
               std::invalid_argument);
}

TEST(EstimateGamma, OuAreaDriftVanishesForSymmetricFriction) {
  Matrix f(2, 2);
  f << 2.0, 0.5, 0.5, 1.0;
  const auto s = estimate_batch(OUDriver{f, 0.2, 1000}, 1, 3000, {.seed = 10});
  EXPECT_TRUE(within(s.gamma_hat(0, 1), s.gamma_stderr(0, 1), 0.0));
  EXPECT_DOUBLE_EQ(s.gamma_hat(0, 1), -s.gamma_hat(1, 0));
}

TEST(MomentScaling, IidGaussianHasExactScaling) {
  const DriverSpec walk = WalkDriver{WalkLaw::gaussian, 1, Matrix::Identity(1, 1)};
  const auto rep = moment_scaling_diagnostic(walk, 2.0, {64, 256, 1024, 4096}, 2000, 0.1, {.seed = 11});
  EXPECT_NEAR(rep.slope_v, 0.5, std::max(0.05, 3 * rep.slope_v_stderr));
  EXPECT_NEAR(rep.slope_s, 1.0, std::max(0.05, 3 * rep.slope_s_stderr));
  EXPECT_TRUE(rep.pass_v);
  EXPECT_TRUE(rep.pass_s);
}

TEST(MomentScaling, RejectsBadInput) {
  EXPECT_THROW(moment_scaling_diagnostic(doubling("cos"), 1.0, {8, 16}, 10), std::invalid_argument);
  EXPECT_THROW(moment_scaling_diagnostic(doubling("cos"), 2.0, {16, 8}, 10), std::invalid_argument);
}

TEST(Tightness, ConstantPathsHaveZeroMoments) {
  std::vector<std::vector<RoughPathGrid>> batches;
  const std::vector<std::size_t> n_list{8, 16};
  for (auto n : n_list) batches.push_back({pure_area_path(Matrix::Zero(1, 1), uniform_grid(n))});
  const auto rep = pvar_moment_diagnostic(batches, n_list, 2.5, 1.0);
  EXPECT_EQ(rep.moment[0], 0.0);
  EXPECT_TRUE(rep.pass);
}

TEST(Tightness, BrownianLiftsAreFlat) {
  const Matrix sigma = Matrix::Identity(2, 2), gamma = Matrix::Zero(2, 2);
  const PathFactory paths = [&](std::size_t n, std::uint64_t r) {
    Rng rng(stream_key(12, n, StreamPurpose::brownian), r, StreamPurpose::brownian);
    return brownian_rough_path(sigma, gamma, n, rng);
  };
  const auto rep = pvar_moment_diagnostic(paths, {64, 128, 256, 512}, 200, 2.5, 1.0);
  EXPECT_LE(std::abs(rep.slope), 0.1) << rep.slope << " +- " << rep.slope_stderr;
}

TEST(KolmogorovSurvival, ReferenceValues) {
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.26999967167735456, 1e-12);
  EXPECT_NEAR(kolmogorov_survival(0.5), 0.9639452436648751, 1e-12);
  EXPECT_NEAR(kolmogorov_survival(1.18 - 1e-12), kolmogorov_survival(1.18 + 1e-12), 1e-10);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
  EXPECT_LT(kolmogorov_survival(3.0), 1e-6);
}

TEST(KsTest, NullCalibration) {
  int rejections = 0;
  int two_sample_rejections = 0;
  for (int run = 0; run < 1000; ++run) {
    Rng rng(13, run, StreamPurpose::calibration);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::vector<double> a(300), b(300);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng);
    rejections += ks_test_normal(a, 2.0).p_value <= 0.001;
    two_sample_rejections += ks_two_sample(a, b).p_value <= 0.001;
  }
  EXPECT_LE(rejections, 1);
  EXPECT_LE(two_sample_rejections, 1);
}

TEST(KsTest, DetectsWrongScaleAndIdenticalSamples) {
  Rng rng(14);
  std::normal_distribution<double> normal;
  std::vector<double> a(2000);
  for (auto& x : a) x = normal(rng);
  EXPECT_LT(ks_test_normal(a, 1.5).p_value, 1e-6);
  EXPECT_EQ(ks_two_sample(a, a).statistic, 0.0);
  EXPECT_THROW(ks_test_normal(a, 0.0), std::invalid_argument);
}

TEST(Wasserstein, ShiftedSample) {
  const std::vector<double> a{0.0, 1.0, 3.0}, b{0.5, 1.5, 3.5};
  EXPECT_NEAR(wasserstein1(a, b), 0.5, 1e-15);
  EXPECT_EQ(wasserstein1(a, a), 0.0);
}

}  // namespace
}  // namespace roughlab
