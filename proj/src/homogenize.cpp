#include "roughlab/homogenize.hpp"

#include "roughlab/parallel.hpp"
#include "roughlab/summation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace roughlab {

namespace {

void check_field(const FastSlowConfig& cfg, std::size_t m) {
  const auto& f = cfg.field;
  if (f.dim_state == 0) throw std::invalid_argument("fast-slow: state dimension is zero");
  if (f.dim_noise != m)
    throw std::invalid_argument("fast-slow: field noise dimension " +
                                std::to_string(f.dim_noise) + " != driver dimension " +
                                std::to_string(m));
  if (!f.diffusion) throw std::invalid_argument("fast-slow: diffusion is required");
  if (cfg.replicas == 0) throw std::invalid_argument("fast-slow: replicas must be positive");
  if (cfg.record_intervals == 0)
    throw std::invalid_argument("fast-slow: record_intervals must be positive");
  if (cfg.xi.size() != 0 && static_cast<std::size_t>(cfg.xi.size()) != f.dim_state)
    throw std::invalid_argument("fast-slow: xi has the wrong dimension");
}

Vector initial_state(const FastSlowConfig& cfg) {
  if (cfg.xi.size() == 0) return Vector::Ones(static_cast<Eigen::Index>(cfg.field.dim_state));
  return cfg.xi;
}

void check_finite(std::span<const double> y, double bound, double t) {
  for (double v : y)
    if (!std::isfinite(v) || std::abs(v) > bound)
      throw BlowUpError(t, "fast-slow: slow state left the blow-up bound at t = " +
                               std::to_string(t));
}

// Record indices floor(steps * k / K) for k = 0..K.
std::vector<std::size_t> record_indices(std::size_t steps, std::size_t intervals) {
  std::vector<std::size_t> idx(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) idx[k] = steps * k / intervals;
  return idx;
}

// Collects terminal rows and path norms from per-replica coarse paths.
SlowSample assemble(const std::vector<Matrix>& coarse, double p) {
  SlowSample out;
  const std::size_t r = coarse.size();
  const Eigen::Index d = coarse.front().cols();
  out.terminal.resize(static_cast<Eigen::Index>(r), d);
  out.path_norms.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    out.terminal.row(static_cast<Eigen::Index>(i)) = coarse[i].row(coarse[i].rows() - 1);
    out.path_norms[i] = path_p_variation(coarse[i], p);
  }
  return out;
}

}  // namespace

SlowSample run_discrete_fast_slow(const FastSlowConfig& cfg) {
  if (std::holds_alternative<OUDriver>(cfg.driver))
    throw std::invalid_argument("run_discrete_fast_slow: OU driver is continuous");
  if (cfg.n == 0) throw std::invalid_argument("run_discrete_fast_slow: n must be positive");
  const FastSource source(cfg.driver);
  const std::size_t m = source.dim();
  check_field(cfg, m);
  const std::size_t d = cfg.field.dim_state;
  const std::size_t n = cfg.n;
  const Vector xi = initial_state(cfg);
  const auto rec = record_indices(n, cfg.record_intervals);
  const double dt = 1.0 / static_cast<double>(n);
  const double scale = std::sqrt(dt);
  const std::size_t verify = std::min(cfg.verify_replicas, cfg.replicas);

  std::vector<Matrix> coarse(cfg.replicas);
  std::vector<double> mismatch(verify, 0.0);

  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    std::vector<double> seq(n * m);
    source.sequence(cfg.seed, r, n, seq);
    std::vector<double> x(xi.data(), xi.data() + d), drift(d, 0.0), b(d * m);
    Matrix path(static_cast<Eigen::Index>(cfg.record_intervals + 1),
                static_cast<Eigen::Index>(d));
    const bool keep_full = r < verify;
    Matrix full;
    if (keep_full) full.resize(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(d));
    auto store = [&](std::size_t j, std::size_t& next) {
      while (next < rec.size() && rec[next] == j) {
        for (std::size_t k = 0; k < d; ++k)
          path(static_cast<Eigen::Index>(next), static_cast<Eigen::Index>(k)) = x[k];
        ++next;
      }
      if (keep_full)
        for (std::size_t k = 0; k < d; ++k)
          full(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = x[k];
    };
    std::size_t next = 0;
    store(0, next);
    for (std::size_t j = 0; j < n; ++j) {
      if (cfg.field.drift) cfg.field.drift(x, drift);
      cfg.field.diffusion(x, b);
      const double* v = seq.data() + j * m;
      for (std::size_t k = 0; k < d; ++k) {
        double noise = 0.0;
        for (std::size_t c = 0; c < m; ++c) noise += b[k * m + c] * v[c];
        x[k] += drift[k] * dt + scale * noise;
      }
      check_finite(x, cfg.blowup_bound, static_cast<double>(j + 1) * dt);
      store(j + 1, next);
    }
    coarse[r] = std::move(path);

    if (keep_full) {
      // The same recursion is the step-2 Euler scheme on the Ito lift, whose
      // one-step second level vanishes.
      const auto lift = iterated_sum_path(seq, m).lift;
      RdeOptions opts;
      opts.blowup_bound = cfg.blowup_bound;
      opts.remainder_proxy = false;
      const RDESolution sol = solve_rde(cfg.field, lift, xi, opts);
      double worst = 0.0;
      for (Eigen::Index j = 0; j < full.rows(); ++j) {
        const double err = (full.row(j) - sol.states.row(j)).norm();
        worst = std::max(worst, err / std::max(1.0, full.row(j).norm()));
      }
      mismatch[r] = worst;
    }
  });

  SlowSample out = assemble(coarse, cfg.pvar_p);
  out.verified = verify;
  for (double e : mismatch) out.equivalence_error = std::max(out.equivalence_error, e);
  return out;
}

SlowSample run_continuous_fast_slow(const FastSlowConfig& cfg) {
  const auto* ou = std::get_if<OUDriver>(&cfg.driver);
  if (ou == nullptr)
    throw std::invalid_argument("run_continuous_fast_slow: needs the OU driver");
  validate(*ou);
  const std::size_t m = static_cast<std::size_t>(ou->friction.rows());
  check_field(cfg, m);
  const std::size_t d = cfg.field.dim_state;
  const OUPathSampler sampler(*ou, 1.0);
  const std::size_t steps = sampler.times().size() - 1;
  const auto rec = record_indices(steps, cfg.record_intervals);
  const Vector xi = initial_state(cfg);

  std::vector<Matrix> coarse(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, r, StreamPurpose::ou);
    const Matrix w = sampler.sample_values(rng);
    const auto& times = sampler.times();
    std::vector<double> x(xi.data(), xi.data() + d), rate(m), drift(d, 0.0), b(d * m),
        stage(d), k1(d), k2(d), k3(d), k4(d);
    // x' = a(x) + b(x) rate with rate = dW/dt constant on the interval.
    auto rhs = [&](std::span<const double> y, std::span<double> out) {
      if (cfg.field.drift) cfg.field.drift(y, drift);
      cfg.field.diffusion(y, b);
      for (std::size_t k = 0; k < d; ++k) {
        double s = drift[k];
        for (std::size_t c = 0; c < m; ++c) s += b[k * m + c] * rate[c];
        out[k] = s;
      }
    };
    Matrix path(static_cast<Eigen::Index>(cfg.record_intervals + 1),
                static_cast<Eigen::Index>(d));
    std::size_t next = 0;
    auto store = [&](std::size_t j) {
      while (next < rec.size() && rec[next] == j) {
        for (std::size_t k = 0; k < d; ++k)
          path(static_cast<Eigen::Index>(next), static_cast<Eigen::Index>(k)) = x[k];
        ++next;
      }
    };
    store(0);
    for (std::size_t j = 0; j < steps; ++j) {
      const double h = times[j + 1] - times[j];
      for (std::size_t c = 0; c < m; ++c)
        rate[c] = (w(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(c)) -
                   w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c))) /
                  h;
      rhs(x, k1);
      for (std::size_t k = 0; k < d; ++k) stage[k] = x[k] + 0.5 * h * k1[k];
      rhs(stage, k2);
      for (std::size_t k = 0; k < d; ++k) stage[k] = x[k] + 0.5 * h * k2[k];
      rhs(stage, k3);
      for (std::size_t k = 0; k < d; ++k) stage[k] = x[k] + h * k3[k];
      rhs(stage, k4);
      for (std::size_t k = 0; k < d; ++k)
        x[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      check_finite(x, cfg.blowup_bound, times[j + 1]);
      store(j + 1);
    }
    coarse[r] = std::move(path);
  });
  return assemble(coarse, cfg.pvar_p);
}

SlowSample run_limit_sde(const FastSlowConfig& cfg, const LimitSde& limit) {
  const std::size_t m = cfg.field.dim_noise;
  check_field(cfg, m);
  const auto mi = static_cast<Eigen::Index>(m);
  if (limit.sigma.rows() != mi || limit.sigma.cols() != mi || limit.gamma.rows() != mi ||
      limit.gamma.cols() != mi)
    throw std::invalid_argument("run_limit_sde: sigma and gamma must be m x m");
  if (limit.steps == 0 || limit.steps % cfg.record_intervals != 0)
    throw std::invalid_argument("run_limit_sde: steps must be a positive multiple of "
                                "record_intervals");
  const Vector xi = initial_state(cfg);
  RdeOptions opts;
  opts.blowup_bound = cfg.blowup_bound;
  opts.record_stride = limit.steps / cfg.record_intervals;
  opts.remainder_proxy = false;

  std::vector<Matrix> coarse(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, r, StreamPurpose::sde);
    coarse[r] = solve_sde_euler_maruyama(cfg.field, limit.mode, limit.sigma, limit.gamma,
                                         limit.steps, rng, xi, opts)
                    .states;
  });
  return assemble(coarse, cfg.pvar_p);
}

LimitSde calibrate_limit(const FastSlowConfig& cfg, std::size_t replicas, std::uint64_t seed,
                         std::size_t steps) {
  BatchOptions opts;
  opts.seed = seed;
  opts.threads = cfg.threads;
  const LimitStatistics stats = estimate_batch(cfg.driver, cfg.n, replicas, opts);
  LimitSde out;
  out.sigma = stats.sigma_hat;
  out.gamma = stats.gamma_hat;
  out.mode = std::holds_alternative<OUDriver>(cfg.driver) ? SdeMode::stratonovich : SdeMode::ito;
  out.steps = steps;
  return out;
}

namespace {

CoordinateComparison compare_coordinate(std::span<const double> a, std::span<const double> b,
                                        double alpha) {
  CoordinateComparison c;
  c.ks = ks_two_sample(a, b);
  c.ks_pass = c.ks.p_value > alpha;
  const auto ma = jackknife_mean(a);
  const auto mb = jackknife_mean(b);
  c.mean_a = ma.estimate;
  c.mean_b = mb.estimate;
  c.mean_gap = ma.estimate - mb.estimate;
  c.mean_gap_stderr = std::hypot(ma.stderr_, mb.stderr_);
  c.mean_pass = std::abs(c.mean_gap) <= 3.0 * c.mean_gap_stderr;

  auto variance = [](std::span<const double> x) {
    std::vector<std::vector<double>> cols(2, std::vector<double>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      cols[0][i] = x[i];
      cols[1][i] = x[i] * x[i];
    }
    return jackknife(cols, [](std::span<const double> mu) { return mu[1] - mu[0] * mu[0]; });
  };
  const auto va = variance(a);
  const auto vb = variance(b);
  c.var_a = va.estimate;
  c.var_b = vb.estimate;
  c.var_gap = va.estimate - vb.estimate;
  c.var_gap_stderr = std::hypot(va.stderr_, vb.stderr_);
  c.wasserstein1 = wasserstein1(a, b);
  return c;
}

}  // namespace

LawComparison compare_laws(const SlowSample& a, const SlowSample& b,
                           const CompareOptions& options) {
  const auto ra = static_cast<std::size_t>(a.terminal.rows());
  const auto rb = static_cast<std::size_t>(b.terminal.rows());
  if (ra != rb) throw std::invalid_argument("compare_laws: sample sizes differ");
  if (ra < options.min_samples)
    throw std::invalid_argument("compare_laws: need at least " +
                                std::to_string(options.min_samples) + " samples");
  if (a.terminal.cols() != b.terminal.cols())
    throw std::invalid_argument("compare_laws: state dimensions differ");
  LawComparison out;
  out.alpha = options.alpha;
  out.pass = true;
  for (Eigen::Index k = 0; k < a.terminal.cols(); ++k) {
    const Vector ca = a.terminal.col(k);
    const Vector cb = b.terminal.col(k);
    auto c = compare_coordinate({ca.data(), ra}, {cb.data(), rb}, options.alpha);
    out.pass = out.pass && c.ks_pass && c.mean_pass;
    out.coords.push_back(c);
  }
  out.path_norm_ks = ks_two_sample(a.path_norms, b.path_norms);
  out.path_norm_pass = out.path_norm_ks.p_value > options.alpha;
  out.pass = out.pass && out.path_norm_pass;
  return out;
}

AblationReport correction_ablation(const FastSlowConfig& cfg, const LimitSde& limit,
                                   const CompareOptions& options) {
  AblationReport report;
  report.limit = limit;
  const SlowSample slow = std::holds_alternative<OUDriver>(cfg.driver)
                              ? run_continuous_fast_slow(cfg)
                              : run_discrete_fast_slow(cfg);

  // The correction drift DV V : gamma at the starting point and along the
  // slow sample decides whether the ablation can be told apart at all.
  Step2Euler stepper(cfg.field);
  std::vector<double> corr(cfg.field.dim_state);
  const Matrix gamma_rm = limit.gamma;
  std::vector<double> mat(static_cast<std::size_t>(gamma_rm.size()));
  for (Eigen::Index i = 0; i < gamma_rm.rows(); ++i)
    for (Eigen::Index j = 0; j < gamma_rm.cols(); ++j)
      mat[static_cast<std::size_t>(i * gamma_rm.cols() + j)] = gamma_rm(i, j);
  const Eigen::Index probes = std::min<Eigen::Index>(slow.terminal.rows(), 64);
  for (Eigen::Index r = -1; r < probes && !report.correction_active; ++r) {
    const Vector y = r < 0 ? initial_state(cfg) : Vector(slow.terminal.row(r).transpose());
    stepper.correction({y.data(), static_cast<std::size_t>(y.size())}, mat, corr);
    for (double c : corr)
      if (std::abs(c) > 1e-12) report.correction_active = true;
  }

  LimitSde bare = limit;
  bare.gamma = Matrix::Zero(limit.gamma.rows(), limit.gamma.cols());
  report.corrected = compare_laws(slow, run_limit_sde(cfg, limit), options);
  report.uncorrected = compare_laws(slow, run_limit_sde(cfg, bare), options);
  for (const auto& c : report.uncorrected.coords)
    if (!c.mean_pass) report.uncorrected_mean_fails = true;
  report.pass = report.corrected.pass && report.uncorrected_mean_fails;
  return report;
}

}  // namespace roughlab
