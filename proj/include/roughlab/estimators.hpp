#pragma once

// Monte-Carlo estimators for the limit covariance and area drift, moment
// scaling and tightness diagnostics, and Kolmogorov-Smirnov tests. Every
// replica draws from its own (seed, replica) stream and results are reduced
// with pairwise sums in replica order, so thread count never changes output.

#include "roughlab/drivers.hpp"
#include "roughlab/rough_core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roughlab {

struct LimitStatistics {
  std::size_t dim = 0;
  std::size_t n = 0;
  std::size_t replicas = 0;

  bool has_sigma = false;
  Matrix sigma_hat;
  Matrix sigma_stderr;
  std::string sigma_method;

  bool has_gamma = false;
  Matrix gamma_hat;
  Matrix gamma_stderr;
  std::string gamma_method;

  // Lag-series metadata.
  std::size_t lag_max = 0;
  bool lag_auto = false;
  bool lag_cap_hit = false;
  double truncation_tail = 0.0;

  /// Smallest eigenvalue of sigma_hat exceeds -3 max(sigma_stderr).
  bool sigma_psd_within_error() const;
};

// ---------------------------------------------------------------- helpers

struct JackknifeResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Jackknife over replicas for a smooth function of K column means;
/// columns[k][r] is the k-th per-replica quantity of replica r.
JackknifeResult jackknife(const std::vector<std::vector<double>>& columns,
                          const std::function<double(std::span<const double>)>& statistic);
/// Mean with its jackknife standard error (equal to s / sqrt(R)).
JackknifeResult jackknife_mean(std::span<const double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------- Sigma and Gamma

struct BatchOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

/// Monte-Carlo mean of n^{-1} v_n (x) v_n (sigma) and of the Ito iterated
/// sum W_n(1) = n^{-1} sum_{i<j} v_i (x) v_j (gamma), with jackknife
/// errors. For the OU driver n is ignored: both come from W_eps(1) on the
/// driver's mesh and gamma is the antisymmetric part of the Stratonovich
/// second level, the area drift of the physical Brownian motion.
LimitStatistics estimate_batch(const DriverSpec& driver, std::size_t n, std::size_t replicas,
                               const BatchOptions& options = {});
LimitStatistics estimate_sigma_batch(const DriverSpec& driver, std::size_t n,
                                     std::size_t replicas, const BatchOptions& options = {});

struct LagSeriesOptions {
  /// Empty selects the first lag starting a run of 5 lags whose estimates all
  /// sit below twice their standard error.
  std::optional<std::size_t> lag_max;
  std::size_t lag_cap = 256;
};

/// C_0 + sum_{k=1}^{L} (C_k + C_k^T), with C_k = <v_j (x) v_{j+k}> averaged
/// along each orbit of length n, then across replicas. The truncation tail is
/// the max-abs entry of the last ten retained lag terms.
LimitStatistics estimate_sigma_green_kubo(const DriverSpec& driver, std::size_t n,
                                          std::size_t replicas,
                                          const LagSeriesOptions& lags = {},
                                          const BatchOptions& options = {});

enum class GammaMethod { empirical, series };

/// empirical: mean of W_n(1) (see estimate_batch). series: sum_{k=1}^{L} C_k,
/// available for map and walk drivers.
LimitStatistics estimate_gamma(const DriverSpec& driver, std::size_t n, std::size_t replicas,
                               GammaMethod method, const LagSeriesOptions& lags = {},
                               const BatchOptions& options = {});

// ---------------------------------------------------------------- diagnostics

struct MomentScalingReport {
  double q = 0.0;
  std::vector<std::size_t> n_list;
  std::vector<double> norm_v;  // (E |v_n|^{2q})^{1/(2q)}
  std::vector<double> norm_s;  // (E |S_n|^q)^{1/q}
  double slope_v = 0.0;
  double slope_v_stderr = 0.0;
  double slope_s = 0.0;
  double slope_s_stderr = 0.0;
  double tol = 0.0;
  bool pass_v = false;  // slope_v <= 1/2 + tol
  bool pass_s = false;  // slope_s <= 1 + tol
};

/// One orbit of length max(n_list) per replica; the prefix sums at each n
/// give v_n and S_n. Slopes are OLS on log-log with jackknife errors.
MomentScalingReport moment_scaling_diagnostic(const DriverSpec& driver, double q,
                                              const std::vector<std::size_t>& n_list,
                                              std::size_t replicas, double tol = 0.1,
                                              const BatchOptions& options = {});

enum class TightnessNorm { pvar_homogeneous, holder };

struct TightnessReport {
  double p = 0.0;
  double q = 0.0;
  std::vector<std::size_t> n_list;
  std::vector<double> moment;  // E |||X|||^{2q}
  std::vector<double> moment_stderr;
  double slope = 0.0;  // of log moment against log n
  double slope_stderr = 0.0;
  double tol = 0.0;
  bool pass = false;  // slope <= tol
};

struct TightnessOptions {
  TightnessNorm norm = TightnessNorm::pvar_homogeneous;
  double holder_alpha = 0.4;
  double tol = 0.1;
};

/// batches[k] holds equally many rough paths at scale n_list[k].
TightnessReport pvar_moment_diagnostic(const std::vector<std::vector<RoughPathGrid>>& batches,
                                       const std::vector<std::size_t>& n_list, double p,
                                       double q, const TightnessOptions& norm = {},
                                       std::size_t threads = 0);

/// Same, generating replicas on the fly; paths(n, replica) must be
/// deterministic and thread-safe.
using PathFactory = std::function<RoughPathGrid(std::size_t n, std::uint64_t replica)>;
TightnessReport pvar_moment_diagnostic(const PathFactory& paths,
                                       const std::vector<std::size_t>& n_list,
                                       std::size_t replicas, double p, double q,
                                       const TightnessOptions& norm = {},
                                       std::size_t threads = 0);

/// Ito lifts of the scaled Birkhoff paths of a map or walk driver. Replica j
/// reuses one fast orbit at every n, so scales are coupled.
PathFactory iterated_sum_factory(const DriverSpec& driver, std::uint64_t seed);

// ---------------------------------------------------------------- KS

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov survival function Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

/// Two-sided one-sample test against N(mean, sigma^2); asymptotic p-value
/// with the Stephens small-sample correction. Throws if sigma <= 0.
KsResult ks_test_normal(std::span<const double> samples, double sigma, double mean = 0.0);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Wasserstein-1 distance between empirical laws.
double wasserstein1(std::span<const double> a, std::span<const double> b);

}  // namespace roughlab
