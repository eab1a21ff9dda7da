#include "cli_commands.hpp"

#include "roughlab/estimators.hpp"
#include "roughlab/homogenize.hpp"
#include "roughlab/lifts.hpp"
#include "roughlab/linalg.hpp"
#include "roughlab/rng.hpp"
#include "roughlab/rough_core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace roughlab::cli {

namespace {

std::string entry(const std::string& name, Eigen::Index i, Eigen::Index j) {
  return name + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
}

std::string coord(const std::string& name, Eigen::Index k) {
  return name + "[" + std::to_string(k) + "]";
}

ResultRow checked(std::string experiment, std::string params, std::string quantity,
                  double estimate, double stderr_value, double reference) {
  ResultRow r{std::move(experiment), std::move(params), std::move(quantity), estimate,
              stderr_value, reference, std::nullopt};
  r.pass = std::abs(estimate - reference) <= std::max(3.0 * stderr_value, 1e-12);
  return r;
}

ResultRow info(std::string experiment, std::string params, std::string quantity, double estimate,
               std::optional<double> stderr_value = std::nullopt) {
  return {std::move(experiment), std::move(params), std::move(quantity), estimate, stderr_value,
          std::nullopt, std::nullopt};
}

ResultRow flag(std::string experiment, std::string params, std::string quantity, double estimate,
               bool pass, std::optional<double> reference = std::nullopt) {
  return {std::move(experiment), std::move(params), std::move(quantity), estimate, std::nullopt,
          reference, pass};
}

// ------------------------------------------------------------ lift-check

Level2Increment random_element(Rng& rng, Eigen::Index m) {
  std::normal_distribution<double> normal;
  Level2Increment x{Vector(m), Matrix(m, m)};
  for (Eigen::Index i = 0; i < m; ++i) x.a(i) = normal(rng);
  for (Eigen::Index i = 0; i < m * m; ++i) x.M.data()[i] = normal(rng);
  return x;
}

LiftRequest random_request(Rng& rng, std::size_t points, Eigen::Index m, LiftMode mode) {
  std::normal_distribution<double> normal;
  std::vector<double> times(points);
  double t = 0.0;
  for (std::size_t k = 1; k < points; ++k) times[k] = (t += 0.1 + rng.uniform());
  for (auto& s : times) s /= t;
  Matrix values = Matrix::Zero(static_cast<Eigen::Index>(points), m);
  for (Eigen::Index k = 1; k < values.rows(); ++k)
    for (Eigen::Index i = 0; i < m; ++i) values(k, i) = values(k - 1, i) + normal(rng);
  return {std::move(times), std::move(values), mode};
}

double enumerate_pvar(const RoughPathGrid& path, double p) {
  const std::size_t n = path.size();
  double best1 = 0.0, best2 = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 2)); ++mask) {
    double s1 = 0.0, s2 = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (k != n - 1 && ((mask >> (k - 1)) & 1u) == 0) continue;
      const auto inc = path.increment(prev, k);
      s1 += std::pow(inc.a.norm(), p);
      s2 += std::pow(inc.M.norm(), p / 2.0);
      prev = k;
    }
    best1 = std::max(best1, s1);
    best2 = std::max(best2, s2);
  }
  return std::pow(best1, 1.0 / p) + std::pow(best2, 1.0 / p);
}

}  // namespace

std::vector<ResultRow> run_lift_check(const RunConfig& cfg) {
  Rng rng(cfg.seed, 0, StreamPurpose::auxiliary);
  double group = 0.0, chen = 0.0, defect = 0.0, ito = 0.0, pvar = 0.0;
  for (std::size_t c = 0; c < cfg.cases; ++c) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(c % 4);
    const auto x = random_element(rng, m), y = random_element(rng, m), z = random_element(rng, m);
    const auto e = Level2Increment::identity(m);
    group = std::max({group,
                      relative_error(group_mul(group_mul(x, y), z), group_mul(x, group_mul(y, z))),
                      relative_error(group_mul(x, e), x), relative_error(group_mul(e, x), x),
                      relative_error(group_mul(x, group_inv(x)), e),
                      relative_error(group_mul(group_inv(x), x), e)});

    const std::size_t points = 3 + c % 18;
    const auto mode = c % 2 ? LiftMode::piecewise_linear : LiftMode::piecewise_constant_ito;
    const auto path = lift(random_request(rng, points, m, mode));
    const std::size_t s = rng() % (points - 2);
    const std::size_t u = s + 1 + rng() % (points - 2 - s);
    const std::size_t t = u + 1 + rng() % (points - 1 - u);
    chen = std::max(chen, relative_error(group_mul(path.increment(s, u), path.increment(u, t)),
                                         path.increment(s, t)));

    const auto req_lin = random_request(rng, points, m, LiftMode::piecewise_linear);
    const auto geo = lift(req_lin);
    const auto inc = geo.increment(s, t);
    defect = std::max(defect, relative_error(sym_defect(inc), Matrix::Zero(m, m)) /
                                  std::max(1.0, inc.a.squaredNorm()));

    auto req_ito = req_lin;
    req_ito.mode = LiftMode::piecewise_constant_ito;
    const auto cad = lift(req_ito);
    Matrix jumps = Matrix::Zero(m, m);
    for (std::size_t k = 1; k <= t; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const Vector d = (req_ito.base_values.row(kk) - req_ito.base_values.row(kk - 1)).transpose();
      jumps += d * d.transpose();
    }
    const auto whole = cad.increment(0, t);
    ito = std::max(ito, relative_error(whole.a * whole.a.transpose(),
                                       whole.M + whole.M.transpose() + jumps));
  }
  const std::size_t pvar_cases = std::max<std::size_t>(10, cfg.cases / 10);
  for (std::size_t c = 0; c < pvar_cases; ++c) {
    const std::size_t points = 2 + c % 11;
    const auto mode = c % 2 ? LiftMode::piecewise_linear : LiftMode::piecewise_constant_ito;
    const auto path = lift(random_request(rng, points, 1 + static_cast<Eigen::Index>(c % 3), mode));
    const double p = 2.0 + 0.9 * rng.uniform() + 0.05;
    const double dp = p_var_homog(path, p);
    const double brute = enumerate_pvar(path, p);
    pvar = std::max(pvar, std::abs(dp - brute) / std::max(1.0, brute));
  }
  const std::string params = "cases=" + std::to_string(cfg.cases);
  const double tol = kAlgebraicTolerance;
  return {
      flag("lift-check:group-laws", params, "max_relative_error", group, group <= tol, 0.0),
      flag("lift-check:chen", params, "max_relative_error", chen, chen <= tol, 0.0),
      flag("lift-check:geometric-defect", params, "max_relative_error", defect, defect <= tol, 0.0),
      flag("lift-check:ito-jumps", params, "max_relative_error", ito, ito <= tol, 0.0),
      flag("lift-check:pvar-exact", "cases=" + std::to_string(pvar_cases), "max_relative_error",
           pvar, pvar <= tol, 0.0),
  };
}

// ------------------------------------------------------------ estimate

namespace {

struct Oracle {
  Matrix sigma;
  Matrix gamma;
};

// OU: Sigma = M^{-1} M^{-T}; the area drift is antisym(P M^{-T}) with
// M P + P M^T = I. Both carry an O(epsilon^2) finite-scale bias.
std::optional<Oracle> known_oracle(const RunConfig& cfg, const DriverSpec& driver) {
  if (const auto* ou = std::get_if<OUDriver>(&driver)) {
    const Eigen::Index m = ou->friction.rows();
    const Matrix inv = ou->friction.inverse();
    const Matrix p = solve_lyapunov(ou->friction, Matrix::Identity(m, m));
    return Oracle{inv * inv.transpose(), antisym(p * inv.transpose())};
  }
  if (cfg.driver == "walk") {
    const auto d = static_cast<Eigen::Index>(cfg.walk_dim);
    return Oracle{Matrix::Identity(d, d), Matrix::Zero(d, d)};
  }
  if (cfg.driver != "doubling") return std::nullopt;
  if (cfg.observable == "centered-id")
    return Oracle{Matrix::Constant(1, 1, 0.25), Matrix::Constant(1, 1, 1.0 / 12.0)};
  if (cfg.observable == "cos") return Oracle{Matrix::Constant(1, 1, 0.5), Matrix::Zero(1, 1)};
  if (cfg.observable == "zero") return Oracle{Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  return std::nullopt;
}

void matrix_rows(std::vector<ResultRow>& rows, const std::string& experiment,
                 const std::string& params, const std::string& name, const Matrix& est,
                 const Matrix& se, const Matrix* reference) {
  for (Eigen::Index i = 0; i < est.rows(); ++i)
    for (Eigen::Index j = 0; j < est.cols(); ++j) {
      if (reference != nullptr)
        rows.push_back(checked(experiment, params, entry(name, i, j), est(i, j), se(i, j),
                               (*reference)(i, j)));
      else
        rows.push_back(info(experiment, params, entry(name, i, j), est(i, j), se(i, j)));
    }
}

}  // namespace

std::vector<ResultRow> run_estimate(const RunConfig& cfg) {
  const DriverSpec driver = make_driver(cfg);
  const auto oracle = known_oracle(cfg, driver);
  const BatchOptions opts{cfg.seed, cfg.threads};
  std::vector<ResultRow> rows;

  const auto batch = estimate_batch(driver, cfg.n, cfg.replicas, opts);
  const std::string bp = cfg.driver == "ou" ? "epsilon=" + format_number(cfg.epsilon) +
                                                  ";mesh=" + std::to_string(cfg.mesh)
                                            : "";
  matrix_rows(rows, "estimate:batch", bp, "sigma", batch.sigma_hat, batch.sigma_stderr,
              oracle ? &oracle->sigma : nullptr);
  matrix_rows(rows, "estimate:batch", bp, "gamma", batch.gamma_hat, batch.gamma_stderr,
              oracle ? &oracle->gamma : nullptr);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (batch.sigma_hat + batch.sigma_hat.transpose()));
  rows.push_back(flag("estimate:batch", bp, "sigma_min_eigenvalue", eig.eigenvalues().minCoeff(),
                      batch.sigma_psd_within_error()));

  if (cfg.driver != "ou") {
    LagSeriesOptions lags;
    if (cfg.lag_max > 0) lags.lag_max = cfg.lag_max;
    const auto gk = estimate_sigma_green_kubo(driver, cfg.n, cfg.replicas, lags, opts);
    const std::string gp = "lag_max=" + std::to_string(gk.lag_max) +
                           (gk.lag_auto ? ";lag=auto" : "") + (gk.lag_cap_hit ? ";cap_hit" : "");
    matrix_rows(rows, "estimate:green-kubo", gp, "sigma", gk.sigma_hat, gk.sigma_stderr,
                oracle ? &oracle->sigma : nullptr);
    rows.push_back(info("estimate:green-kubo", gp, "truncation_tail", gk.truncation_tail));

    const auto series = estimate_gamma(driver, cfg.n, cfg.replicas, GammaMethod::series, lags, opts);
    const std::string sp = "lag_max=" + std::to_string(series.lag_max) +
                           (series.lag_auto ? ";lag=auto" : "");
    matrix_rows(rows, "estimate:series", sp, "gamma", series.gamma_hat, series.gamma_stderr,
                oracle ? &oracle->gamma : nullptr);
  }
  return rows;
}

// ------------------------------------------------------------ moments

std::vector<ResultRow> run_moments(const RunConfig& cfg) {
  const DriverSpec driver = make_driver(cfg);
  const BatchOptions opts{cfg.seed, cfg.threads};
  std::vector<ResultRow> rows;
  const std::string qp = "q=" + format_number(cfg.q);

  const auto ms = moment_scaling_diagnostic(driver, cfg.q, cfg.n_list, cfg.replicas, cfg.tol, opts);
  for (std::size_t k = 0; k < ms.n_list.size(); ++k) {
    const std::string np = qp + ";n=" + std::to_string(ms.n_list[k]);
    rows.push_back(info("moments:scaling", np, "norm_v", ms.norm_v[k]));
    rows.push_back(info("moments:scaling", np, "norm_s", ms.norm_s[k]));
  }
  const std::string tp = qp + ";tol=" + format_number(cfg.tol);
  rows.push_back({"moments:scaling", tp, "slope_v", ms.slope_v, ms.slope_v_stderr, 0.5, ms.pass_v});
  rows.push_back({"moments:scaling", tp, "slope_s", ms.slope_s, ms.slope_s_stderr, 1.0, ms.pass_s});

  if (cfg.tightness_replicas > 0) {
    TightnessOptions topt;
    topt.tol = cfg.tol;
    const auto tr = pvar_moment_diagnostic(iterated_sum_factory(driver, cfg.seed),
                                           cfg.tightness_n_list, cfg.tightness_replicas, cfg.p,
                                           1.0, topt, cfg.threads);
    const std::string pp = "p=" + format_number(cfg.p) + ";moment=2";
    for (std::size_t k = 0; k < tr.n_list.size(); ++k)
      rows.push_back(info("moments:tightness", pp + ";n=" + std::to_string(tr.n_list[k]),
                          "pvar_moment", tr.moment[k], tr.moment_stderr[k]));
    rows.push_back({"moments:tightness", pp + ";tol=" + format_number(cfg.tol), "slope",
                    tr.slope, tr.slope_stderr, 0.0, tr.pass});
  }
  return rows;
}

// ------------------------------------------------------------ homogenize / ablate

std::size_t effective_sde_steps(const RunConfig& cfg) {
  if (cfg.sde_steps > 0) return cfg.sde_steps;
  const std::size_t base = cfg.driver == "ou" ? cfg.mesh : cfg.n;
  return std::max<std::size_t>(32, (base + 31) / 32 * 32);
}

namespace {

LimitSde calibrated(const RunConfig& cfg, const FastSlowConfig& fs) {
  const std::size_t reps = cfg.calibration_replicas > 0 ? cfg.calibration_replicas : cfg.replicas;
  return calibrate_limit(fs, reps, calibration_seed(cfg.seed), effective_sde_steps(cfg));
}

// E X(1) of the linear equation when the limit is known in closed form.
std::optional<double> known_mean(const RunConfig& cfg) {
  if (cfg.driver != "doubling" || cfg.b != "linear") return std::nullopt;
  if (cfg.observable == "centered-id") return cfg.xi * std::exp(cfg.drift_rate + 1.0 / 12.0);
  if (cfg.observable == "cos") return cfg.xi * std::exp(cfg.drift_rate);
  return std::nullopt;
}

std::string limit_params(const LimitSde& limit) {
  return std::string("mode=") + (limit.mode == SdeMode::ito ? "ito" : "stratonovich") +
         ";steps=" + std::to_string(limit.steps);
}

void limit_rows(std::vector<ResultRow>& rows, const std::string& experiment,
                const LimitSde& limit) {
  const std::string params = limit_params(limit);
  for (Eigen::Index i = 0; i < limit.sigma.rows(); ++i)
    for (Eigen::Index j = 0; j < limit.sigma.cols(); ++j) {
      rows.push_back(info(experiment, params, entry("sigma_calibrated", i, j), limit.sigma(i, j)));
      rows.push_back(info(experiment, params, entry("gamma_calibrated", i, j), limit.gamma(i, j)));
    }
}

void comparison_rows(std::vector<ResultRow>& rows, const std::string& experiment,
                     const LawComparison& cmp, const std::string& params) {
  for (std::size_t k = 0; k < cmp.coords.size(); ++k) {
    const auto& c = cmp.coords[k];
    const auto ki = static_cast<Eigen::Index>(k);
    rows.push_back(flag(experiment, params, coord("ks_pvalue", ki), c.ks.p_value, c.ks_pass));
    rows.push_back(info(experiment, params, coord("ks_statistic", ki), c.ks.statistic));
    ResultRow gap{experiment, params, coord("mean_gap", ki), c.mean_gap, c.mean_gap_stderr, 0.0,
                  c.mean_pass};
    rows.push_back(gap);
    rows.push_back(info(experiment, params, coord("var_gap", ki), c.var_gap, c.var_gap_stderr));
    rows.push_back(info(experiment, params, coord("wasserstein1", ki), c.wasserstein1));
  }
  rows.push_back(flag(experiment, params, "path_norm_ks_pvalue", cmp.path_norm_ks.p_value,
                      cmp.path_norm_pass));
}

SlowSample run_fast_slow(const FastSlowConfig& fs) {
  return std::holds_alternative<OUDriver>(fs.driver) ? run_continuous_fast_slow(fs)
                                                     : run_discrete_fast_slow(fs);
}

}  // namespace

std::vector<ResultRow> run_homogenize(const RunConfig& cfg) {
  const FastSlowConfig fs = make_fast_slow(cfg);
  std::vector<ResultRow> rows;
  const SlowSample slow = run_fast_slow(fs);
  const std::string sp = "b=" + cfg.b + ";xi=" + format_number(cfg.xi) +
                         ";drift_rate=" + format_number(cfg.drift_rate);
  if (slow.verified > 0)
    rows.push_back(flag("homogenize:fast-slow", sp + ";verified=" + std::to_string(slow.verified),
                        "rde_equivalence_error", slow.equivalence_error,
                        slow.equivalence_error <= kAlgebraicTolerance, 0.0));
  const auto reference = known_mean(cfg);
  for (Eigen::Index k = 0; k < slow.terminal.cols(); ++k) {
    const Vector col = slow.terminal.col(k);
    const auto mean = jackknife_mean({col.data(), static_cast<std::size_t>(col.size())});
    if (reference && k == 0)
      rows.push_back(checked("homogenize:fast-slow", sp, coord("mean_x1", k), mean.estimate,
                             mean.stderr_, *reference));
    else
      rows.push_back(info("homogenize:fast-slow", sp, coord("mean_x1", k), mean.estimate,
                          mean.stderr_));
  }

  const LimitSde limit = calibrated(cfg, fs);
  limit_rows(rows, "homogenize:calibration", limit);
  const SlowSample sde = run_limit_sde(fs, limit);
  const auto cmp = compare_laws(slow, sde, {cfg.alpha, 1000});
  comparison_rows(rows, "homogenize:limit-sde", cmp,
                  limit_params(limit) + ";alpha=" + format_number(cfg.alpha));
  rows.push_back(flag("homogenize:limit-sde", "alpha=" + format_number(cfg.alpha), "law_match",
                      cmp.pass ? 1.0 : 0.0, cmp.pass));
  return rows;
}

std::vector<ResultRow> run_ablate(const RunConfig& cfg) {
  const FastSlowConfig fs = make_fast_slow(cfg);
  const LimitSde limit = calibrated(cfg, fs);
  const auto report = correction_ablation(fs, limit, {cfg.alpha, 1000});
  std::vector<ResultRow> rows;
  limit_rows(rows, "ablate:calibration", limit);
  const std::string ap = limit_params(limit) + ";alpha=" + format_number(cfg.alpha);
  comparison_rows(rows, "ablate:corrected", report.corrected, ap);
  comparison_rows(rows, "ablate:uncorrected", report.uncorrected, ap + ";gamma=0");
  // For the uncorrected run a failing mean test is the expected outcome, so
  // its rows are informational and the verdict lives in the summary rows.
  for (auto& r : rows)
    if (r.experiment == "ablate:uncorrected") r.pass.reset();
  rows.push_back(flag("ablate:summary", ap, "correction_active",
                      report.correction_active ? 1.0 : 0.0, report.correction_active));
  rows.push_back(flag("ablate:summary", ap, "uncorrected_mean_fails",
                      report.uncorrected_mean_fails ? 1.0 : 0.0, report.uncorrected_mean_fails));
  rows.push_back(flag("ablate:summary", ap, "ablation_pass", report.pass ? 1.0 : 0.0, report.pass));
  return rows;
}

std::vector<ResultRow> run_subcommand(const RunConfig& cfg) {
  if (cfg.subcommand == "lift-check") return run_lift_check(cfg);
  if (cfg.subcommand == "estimate") return run_estimate(cfg);
  if (cfg.subcommand == "moments") return run_moments(cfg);
  if (cfg.subcommand == "homogenize") return run_homogenize(cfg);
  if (cfg.subcommand == "ablate") return run_ablate(cfg);
  throw std::invalid_argument("unknown subcommand '" + cfg.subcommand + "'");
}

}  // namespace roughlab::cli
