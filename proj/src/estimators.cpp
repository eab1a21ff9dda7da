#include "roughlab/estimators.hpp"

#include "roughlab/linalg.hpp"
#include "roughlab/parallel.hpp"
#include "roughlab/summation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace roughlab {

bool LimitStatistics::sigma_psd_within_error() const {
  if (!has_sigma) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(sigma_hat), Eigen::EigenvaluesOnly);
  const double band = sigma_stderr.size() ? 3.0 * sigma_stderr.cwiseAbs().maxCoeff() : 0.0;
  return eig.eigenvalues().minCoeff() > -band - 1e-12;
}

// ---------------------------------------------------------------- helpers

JackknifeResult jackknife(const std::vector<std::vector<double>>& columns,
                          const std::function<double(std::span<const double>)>& statistic) {
  if (columns.empty() || columns.front().empty()) {
    throw std::invalid_argument("jackknife: no data");
  }
  const std::size_t k = columns.size();
  const std::size_t r = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != r) throw std::invalid_argument("jackknife: ragged columns");
  }
  std::vector<double> totals(k), means(k);
  for (std::size_t i = 0; i < k; ++i) {
    totals[i] = pairwise_sum(columns[i]);
    means[i] = totals[i] / static_cast<double>(r);
  }
  JackknifeResult out;
  out.estimate = statistic(means);
  if (r < 2) return out;
  std::vector<double> loo(k), theta(r);
  const double denom = static_cast<double>(r - 1);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < k; ++i) loo[i] = (totals[i] - columns[i][j]) / denom;
    theta[j] = statistic(loo);
  }
  const double bar = pairwise_mean(theta);
  std::vector<double> dev(r);
  for (std::size_t j = 0; j < r; ++j) dev[j] = (theta[j] - bar) * (theta[j] - bar);
  out.stderr_ = std::sqrt(denom / static_cast<double>(r) * pairwise_sum(dev));
  return out;
}

JackknifeResult jackknife_mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("jackknife_mean: no data");
  JackknifeResult out;
  out.estimate = pairwise_mean(x);
  if (x.size() < 2) return out;
  std::vector<double> dev(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) dev[j] = (x[j] - out.estimate) * (x[j] - out.estimate);
  const double n = static_cast<double>(x.size());
  out.stderr_ = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
  return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_fit: need at least two paired points");
  }
  const double xm = pairwise_mean(x);
  const double ym = pairwise_mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  return fit;
}

namespace {

void require_mean_zero(const DriverSpec& driver) {
  if (const auto* s = std::get_if<MapSource>(&driver)) {
    if (!s->observable.mean_zero) {
      throw std::invalid_argument("observable '" + s->observable.name +
                                  "' is not declared mean-zero; center it first");
    }
  }
}

// Per-replica values stored as rows of a replicas x width table, reduced
// column-wise into a mean matrix and its jackknife standard error.
struct ReplicaTable {
  std::size_t replicas;
  std::size_t width;
  std::vector<double> data;

  ReplicaTable(std::size_t r, std::size_t w) : replicas(r), width(w), data(r * w, 0.0) {}
  std::span<double> row(std::size_t r) { return {data.data() + r * width, width}; }
  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(replicas);
    for (std::size_t r = 0; r < replicas; ++r) out[r] = data[r * width + c];
    return out;
  }
  // Columns [offset, offset + m*m) read as a row-major m x m matrix.
  void reduce_matrix(std::size_t offset, std::size_t m, Matrix& mean, Matrix& err) const {
    const auto mi = static_cast<Eigen::Index>(m);
    mean.resize(mi, mi);
    err.resize(mi, mi);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const auto col = column(offset + i * m + j);
        const auto jk = jackknife_mean(col);
        mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = jk.estimate;
        err(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = jk.stderr_;
      }
    }
  }
};

void require_counts(std::size_t n, std::size_t replicas) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
}

}  // namespace

// ---------------------------------------------------------------- Sigma and Gamma

LimitStatistics estimate_batch(const DriverSpec& driver, std::size_t n, std::size_t replicas,
                               const BatchOptions& options) {
  require_counts(n, replicas);
  require_mean_zero(driver);
  const std::size_t m = driver_dim(driver);
  const std::size_t mm = m * m;
  // Row layout: W(1) (x) W(1) then the second level, both m x m row-major.
  ReplicaTable table(replicas, 2 * mm);
  const bool ou = std::holds_alternative<OUDriver>(driver);

  if (ou) {
    const OUPathSampler sampler(std::get<OUDriver>(driver), 1.0);
    parallel_for(replicas, options.threads, [&](std::size_t r) {
      Rng rng(options.seed, r, StreamPurpose::ou);
      const RoughPathGrid path = sampler.sample(rng);
      const auto x = path.first(path.size() - 1);
      const auto xx = path.second(path.size() - 1);
      auto row = table.row(r);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) row[i * m + j] = x[i] * x[j];
      }
      for (std::size_t k = 0; k < mm; ++k) {
        const std::size_t i = k / m, j = k % m;
        row[mm + k] = 0.5 * (xx[i * m + j] - xx[j * m + i]);
      }
    });
  } else {
    const FastSource source(driver);
    parallel_for(replicas, options.threads, [&](std::size_t r) {
      std::vector<double> seq(n * m);
      source.sequence(options.seed, r, n, seq);
      SumAccumulator acc(m);
      for (std::size_t j = 0; j < n; ++j) acc.push(std::span<const double>(seq).subspan(j * m, m));
      const Vector s = acc.sum();
      const Matrix w2 = acc.strict();
      const double inv_n = 1.0 / static_cast<double>(n);
      auto row = table.row(r);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
          row[i * m + j] = s(ii) * s(jj) * inv_n;
          row[mm + i * m + j] = w2(ii, jj) * inv_n;
        }
      }
    });
  }

  LimitStatistics out;
  out.dim = m;
  out.n = ou ? 0 : n;
  out.replicas = replicas;
  out.has_sigma = true;
  out.has_gamma = true;
  out.sigma_method = "batch";
  out.gamma_method = ou ? "empirical-stratonovich" : "empirical-ito";
  table.reduce_matrix(0, m, out.sigma_hat, out.sigma_stderr);
  table.reduce_matrix(mm, m, out.gamma_hat, out.gamma_stderr);
  out.sigma_hat = sym(out.sigma_hat);
  return out;
}

LimitStatistics estimate_sigma_batch(const DriverSpec& driver, std::size_t n,
                                     std::size_t replicas, const BatchOptions& options) {
  LimitStatistics s = estimate_batch(driver, n, replicas, options);
  s.has_gamma = false;
  s.gamma_hat.resize(0, 0);
  s.gamma_stderr.resize(0, 0);
  s.gamma_method.clear();
  return s;
}

namespace {

constexpr std::size_t kLagChunk = 32;

// Four independent partial sums keep the loop throughput-bound.
double strided_dot(const double* a, const double* b, std::size_t stride, std::size_t count) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t t = 0;
  for (; t + 4 <= count; t += 4) {
    s0 += a[t * stride] * b[t * stride];
    s1 += a[(t + 1) * stride] * b[(t + 1) * stride];
    s2 += a[(t + 2) * stride] * b[(t + 2) * stride];
    s3 += a[(t + 3) * stride] * b[(t + 3) * stride];
  }
  for (; t < count; ++t) s0 += a[t * stride] * b[t * stride];
  return (s0 + s1) + (s2 + s3);
}
constexpr std::size_t kQuietRun = 5;

// Lag correlations C_k for k in [k0, k1) of every replica; row r holds
// (k - k0) * m * m + i * m + j.
ReplicaTable lag_table(const FastSource& source, std::size_t n, std::size_t replicas,
                       std::size_t k0, std::size_t k1, const BatchOptions& options) {
  const std::size_t m = source.dim();
  const std::size_t mm = m * m;
  ReplicaTable table(replicas, (k1 - k0) * mm);
  parallel_for(replicas, options.threads, [&](std::size_t r) {
    std::vector<double> seq(n * m);
    source.sequence(options.seed, r, n, seq);
    auto row = table.row(r);
    for (std::size_t k = k0; k < k1; ++k) {
      const std::size_t count = n - k;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const double s = strided_dot(seq.data() + i, seq.data() + k * m + j, m, count);
          row[(k - k0) * mm + i * m + j] = s / static_cast<double>(count);
        }
      }
    }
  });
  return table;
}

struct LagData {
  std::size_t m = 0;
  std::size_t lag = 0;
  bool automatic = false;
  bool cap_hit = false;
  std::vector<ReplicaTable> chunks;  // consecutive lag ranges starting at 0

  std::size_t computed() const {
    std::size_t c = 0;
    for (const auto& t : chunks) c += t.width / (m * m);
    return c;
  }
  // Per-replica C_k entry (i, j).
  double at(std::size_t r, std::size_t k, std::size_t i, std::size_t j) const {
    for (const auto& t : chunks) {
      const std::size_t lags = t.width / (m * m);
      if (k < lags) return t.data[r * t.width + k * m * m + i * m + j];
      k -= lags;
    }
    throw std::out_of_range("lag not computed");
  }
};

LagData collect_lags(const DriverSpec& driver, std::size_t n, std::size_t replicas,
                     const LagSeriesOptions& lags, const BatchOptions& options) {
  require_counts(n, replicas);
  require_mean_zero(driver);
  const FastSource source(driver);
  LagData data;
  data.m = source.dim();
  const std::size_t max_lag = n - 1;
  if (lags.lag_max) {
    if (*lags.lag_max > max_lag) throw std::invalid_argument("lag_max must be < n");
    data.lag = *lags.lag_max;
    data.chunks.push_back(lag_table(source, n, replicas, 0, data.lag + 1, options));
    return data;
  }
  data.automatic = true;
  const std::size_t cap = std::min(lags.lag_cap, max_lag);
  const std::size_t mm = data.m * data.m;
  std::vector<bool> quiet;  // quiet[k]: every entry of mean C_k below 2 stderr
  std::size_t next = 0;
  while (true) {
    const std::size_t hi = std::min(next + kLagChunk, cap + 1);
    if (hi > next) {
      data.chunks.push_back(lag_table(source, n, replicas, next, hi, options));
      const ReplicaTable& t = data.chunks.back();
      for (std::size_t k = next; k < hi; ++k) {
        bool q = true;
        for (std::size_t e = 0; e < mm; ++e) {
          const auto jk = jackknife_mean(t.column((k - next) * mm + e));
          if (!(std::abs(jk.estimate) < 2.0 * jk.stderr_)) q = false;
        }
        quiet.push_back(q);
      }
      next = hi;
    }
    for (std::size_t k = 1; k + kQuietRun <= quiet.size(); ++k) {
      bool run = true;
      for (std::size_t u = k; u < k + kQuietRun; ++u) run = run && quiet[u];
      if (run) {
        data.lag = k;
        return data;
      }
    }
    if (next > cap) {
      data.lag = cap;
      data.cap_hit = true;
      return data;
    }
  }
}

// Reduces sum_k weight(k) * C_k (+ transposes) per replica.
void reduce_series(const LagData& data, std::size_t replicas, bool symmetric, Matrix& mean,
                   Matrix& err) {
  const std::size_t m = data.m;
  ReplicaTable table(replicas, m * m);
  for (std::size_t r = 0; r < replicas; ++r) {
    auto row = table.row(r);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double s = symmetric ? data.at(r, 0, i, j) : 0.0;
        for (std::size_t k = 1; k <= data.lag; ++k) {
          s += data.at(r, k, i, j);
          if (symmetric) s += data.at(r, k, j, i);
        }
        row[i * m + j] = s;
      }
    }
  }
  table.reduce_matrix(0, m, mean, err);
}

double series_tail(const LagData& data, std::size_t replicas, bool symmetric) {
  if (data.lag == 0) return 0.0;
  const std::size_t m = data.m;
  const std::size_t first = data.lag >= 10 ? data.lag - 9 : 1;
  double worst = 0.0;
  std::vector<double> col(replicas);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = first; k <= data.lag; ++k) {
        for (std::size_t r = 0; r < replicas; ++r) {
          col[r] = data.at(r, k, i, j) + (symmetric ? data.at(r, k, j, i) : 0.0);
        }
        s += pairwise_mean(col);
      }
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

}  // namespace

LimitStatistics estimate_sigma_green_kubo(const DriverSpec& driver, std::size_t n,
                                          std::size_t replicas, const LagSeriesOptions& lags,
                                          const BatchOptions& options) {
  const LagData data = collect_lags(driver, n, replicas, lags, options);
  LimitStatistics out;
  out.dim = data.m;
  out.n = n;
  out.replicas = replicas;
  out.has_sigma = true;
  out.sigma_method = "green-kubo";
  out.lag_max = data.lag;
  out.lag_auto = data.automatic;
  out.lag_cap_hit = data.cap_hit;
  reduce_series(data, replicas, true, out.sigma_hat, out.sigma_stderr);
  out.sigma_hat = sym(out.sigma_hat);
  out.truncation_tail = series_tail(data, replicas, true);
  return out;
}

LimitStatistics estimate_gamma(const DriverSpec& driver, std::size_t n, std::size_t replicas,
                               GammaMethod method, const LagSeriesOptions& lags,
                               const BatchOptions& options) {
  if (method == GammaMethod::empirical) {
    LimitStatistics s = estimate_batch(driver, n, replicas, options);
    s.has_sigma = false;
    s.sigma_hat.resize(0, 0);
    s.sigma_stderr.resize(0, 0);
    s.sigma_method.clear();
    return s;
  }
  if (std::holds_alternative<OUDriver>(driver)) {
    throw std::invalid_argument(
        "series gamma is defined for discrete-time drivers; use the empirical method for OU");
  }
  const LagData data = collect_lags(driver, n, replicas, lags, options);
  LimitStatistics out;
  out.dim = data.m;
  out.n = n;
  out.replicas = replicas;
  out.has_gamma = true;
  out.gamma_method = "series";
  out.lag_max = data.lag;
  out.lag_auto = data.automatic;
  out.lag_cap_hit = data.cap_hit;
  reduce_series(data, replicas, false, out.gamma_hat, out.gamma_stderr);
  out.truncation_tail = series_tail(data, replicas, false);
  return out;
}

// ---------------------------------------------------------------- diagnostics

namespace {

std::vector<double> log_values(const std::vector<std::size_t>& n_list) {
  std::vector<double> x(n_list.size());
  for (std::size_t k = 0; k < n_list.size(); ++k) x[k] = std::log(static_cast<double>(n_list[k]));
  return x;
}

void check_n_list(const std::vector<std::size_t>& n_list) {
  if (n_list.size() < 2) throw std::invalid_argument("n_list needs at least two scales");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 1 || (k > 0 && n_list[k] <= n_list[k - 1])) {
      throw std::invalid_argument("n_list must be positive and strictly increasing");
    }
  }
}

// OLS slope of (1/power) log(mean_k) on log n over columns [offset, offset+K).
std::function<double(std::span<const double>)> log_slope(std::vector<double> x,
                                                         std::size_t offset, double power) {
  return [x = std::move(x), offset, power](std::span<const double> means) {
    std::vector<double> y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = std::log(means[offset + k]) / power;
    return linear_fit(x, y).slope;
  };
}

}  // namespace

MomentScalingReport moment_scaling_diagnostic(const DriverSpec& driver, double q,
                                              const std::vector<std::size_t>& n_list,
                                              std::size_t replicas, double tol,
                                              const BatchOptions& options) {
  if (!(q > 1.0)) throw std::invalid_argument("moment_scaling_diagnostic: q must exceed 1");
  check_n_list(n_list);
  require_counts(1, replicas);
  require_mean_zero(driver);
  if (std::holds_alternative<OUDriver>(driver)) {
    throw std::invalid_argument("moment_scaling_diagnostic: needs a map or walk driver");
  }
  const FastSource source(driver);
  const std::size_t m = source.dim();
  const std::size_t kn = n_list.size();
  const std::size_t n_max = n_list.back();
  ReplicaTable table(replicas, 2 * kn);
  parallel_for(replicas, options.threads, [&](std::size_t r) {
    std::vector<double> seq(n_max * m);
    source.sequence(options.seed, r, n_max, seq);
    SumAccumulator acc(m);
    auto row = table.row(r);
    std::size_t next = 0;
    for (std::size_t j = 0; j < n_max; ++j) {
      acc.push(std::span<const double>(seq).subspan(j * m, m));
      if (acc.count() == n_list[next]) {
        row[next] = std::pow(acc.sum().squaredNorm(), q);  // |v_n|^{2q}
        row[kn + next] = std::pow(acc.iterated_sum().norm(), q);
        ++next;
      }
    }
  });
  std::vector<std::vector<double>> columns(2 * kn);
  for (std::size_t c = 0; c < 2 * kn; ++c) columns[c] = table.column(c);
  const auto x = log_values(n_list);

  MomentScalingReport rep;
  rep.q = q;
  rep.n_list = n_list;
  rep.tol = tol;
  for (std::size_t k = 0; k < kn; ++k) {
    rep.norm_v.push_back(std::pow(pairwise_mean(columns[k]), 1.0 / (2.0 * q)));
    rep.norm_s.push_back(std::pow(pairwise_mean(columns[kn + k]), 1.0 / q));
  }
  const auto jv = jackknife(columns, log_slope(x, 0, 2.0 * q));
  const auto js = jackknife(columns, log_slope(x, kn, q));
  rep.slope_v = jv.estimate;
  rep.slope_v_stderr = jv.stderr_;
  rep.slope_s = js.estimate;
  rep.slope_s_stderr = js.stderr_;
  rep.pass_v = rep.slope_v <= 0.5 + tol;
  rep.pass_s = rep.slope_s <= 1.0 + tol;
  return rep;
}

namespace {

double path_norm(const RoughPathGrid& path, double p, const TightnessOptions& opt) {
  return opt.norm == TightnessNorm::holder ? holder_norm(path, opt.holder_alpha)
                                           : p_var_homog(path, p);
}

TightnessReport finish_tightness(std::vector<std::vector<double>> columns,
                                 const std::vector<std::size_t>& n_list, double p, double q,
                                 double tol) {
  TightnessReport rep;
  rep.p = p;
  rep.q = q;
  rep.n_list = n_list;
  rep.tol = tol;
  for (const auto& c : columns) {
    const auto jk = jackknife_mean(c);
    rep.moment.push_back(jk.estimate);
    rep.moment_stderr.push_back(jk.stderr_);
  }
  const bool degenerate =
      std::any_of(rep.moment.begin(), rep.moment.end(), [](double v) { return !(v > 0.0); });
  if (degenerate) {
    // Constant paths: all moments vanish and there is nothing to grow.
    rep.pass = std::all_of(rep.moment.begin(), rep.moment.end(), [](double v) { return v == 0.0; });
    return rep;
  }
  const auto jk = jackknife(columns, log_slope(log_values(n_list), 0, 1.0));
  rep.slope = jk.estimate;
  rep.slope_stderr = jk.stderr_;
  rep.pass = rep.slope <= tol;
  return rep;
}

}  // namespace

TightnessReport pvar_moment_diagnostic(const std::vector<std::vector<RoughPathGrid>>& batches,
                                       const std::vector<std::size_t>& n_list, double p,
                                       double q, const TightnessOptions& norm,
                                       std::size_t threads) {
  check_n_list(n_list);
  if (batches.size() != n_list.size()) {
    throw std::invalid_argument("pvar_moment_diagnostic: one batch per scale");
  }
  if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("pvar_moment_diagnostic: p must lie in (2, 3)");
  if (!(q > 0.0)) throw std::invalid_argument("pvar_moment_diagnostic: q must be positive");
  const std::size_t r = batches.front().size();
  for (const auto& b : batches) {
    if (b.size() != r || r == 0) throw std::invalid_argument("pvar_moment_diagnostic: equal non-empty batches required");
  }
  std::vector<std::vector<double>> columns(n_list.size(), std::vector<double>(r));
  parallel_for(n_list.size() * r, threads, [&](std::size_t idx) {
    const std::size_t k = idx / r, j = idx % r;
    columns[k][j] = std::pow(path_norm(batches[k][j], p, norm), 2.0 * q);
  });
  return finish_tightness(std::move(columns), n_list, p, q, norm.tol);
}

TightnessReport pvar_moment_diagnostic(const PathFactory& paths,
                                       const std::vector<std::size_t>& n_list,
                                       std::size_t replicas, double p, double q,
                                       const TightnessOptions& norm, std::size_t threads) {
  check_n_list(n_list);
  require_counts(1, replicas);
  if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("pvar_moment_diagnostic: p must lie in (2, 3)");
  if (!(q > 0.0)) throw std::invalid_argument("pvar_moment_diagnostic: q must be positive");
  std::vector<std::vector<double>> columns(n_list.size(), std::vector<double>(replicas));
  parallel_for(n_list.size() * replicas, threads, [&](std::size_t idx) {
    const std::size_t k = idx / replicas, j = idx % replicas;
    columns[k][j] = std::pow(path_norm(paths(n_list[k], j), p, norm), 2.0 * q);
  });
  return finish_tightness(std::move(columns), n_list, p, q, norm.tol);
}

PathFactory iterated_sum_factory(const DriverSpec& driver, std::uint64_t seed) {
  if (std::holds_alternative<OUDriver>(driver)) {
    throw std::invalid_argument("iterated_sum_factory: needs a map or walk driver");
  }
  require_mean_zero(driver);
  auto source = std::make_shared<const FastSource>(driver);
  return [source, seed](std::size_t n, std::uint64_t replica) {
    const std::size_t m = source->dim();
    std::vector<double> seq(n * m);
    // Replica j uses the same orbit at every scale (a prefix of one stream).
    // The moments at different n are then positively correlated, which the
    // joint jackknife accounts for and which sharpens the slope.
    source->sequence(seed, replica, n, seq);
    return iterated_sum_path(seq, m).lift;
  };
}

// ---------------------------------------------------------------- KS

double kolmogorov_survival(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // Theta-function form converges fast for small x.
    const double y = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double t = std::exp(-static_cast<double>((2 * k - 1) * (2 * k - 1)) * y);
      s += t;
      if (t < 1e-18) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? t : -t);
    if (t < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

double stephens(double d, double en) { return kolmogorov_survival((en + 0.12 + 0.11 / en) * d); }

}  // namespace

KsResult ks_test_normal(std::span<const double> samples, double sigma, double mean) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("ks_test_normal: sigma must be positive");
  }
  if (samples.empty()) throw std::invalid_argument("ks_test_normal: no samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 0.5 * std::erfc(-(x[i] - mean) / (sigma * std::numbers::sqrt2));
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, stephens(d, std::sqrt(n))};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, stephens(d, std::sqrt(na * nb / (na + nb)))};
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double v = (j >= y.size() || (i < x.size() && x[i] <= y[j])) ? x[i] : y[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (v - prev);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    prev = v;
  }
  return total;
}

}  // namespace roughlab
