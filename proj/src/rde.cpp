#include "roughlab/rde.hpp"

#include "roughlab/linalg.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace roughlab {

Step2Euler::Step2Euler(const VectorFieldBundle& vf)
    : vf_(vf),
      drift_(vf.dim_state, 0.0),
      diff_(vf.dim_state * vf.dim_noise, 0.0),
      jac_(vf.dim_state * vf.dim_state * vf.dim_noise, 0.0),
      tmp_(vf.dim_state * vf.dim_noise, 0.0),
      corr_(vf.dim_state, 0.0) {
  if (vf.dim_state == 0 || vf.dim_noise == 0) {
    throw std::invalid_argument("VectorFieldBundle: dimensions must be positive");
  }
  if (!vf.diffusion || !vf.diffusion_jacobian) {
    throw std::invalid_argument("VectorFieldBundle: diffusion and its jacobian are required");
  }
}

void Step2Euler::correction(std::span<const double> y, std::span<const double> mat,
                            std::span<double> out) {
  const std::size_t d = vf_.dim_state;
  const std::size_t m = vf_.dim_noise;
  vf_.diffusion(y, diff_);
  vf_.diffusion_jacobian(y, jac_);
  // tmp^a_c = sum_b V^a_b mat^{b,c}
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t c = 0; c < m; ++c) {
      double s = 0.0;
      for (std::size_t b = 0; b < m; ++b) s += diff_[a * m + b] * mat[b * m + c];
      tmp_[a * m + c] = s;
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t c = 0; c < m; ++c) s += jac_[(a * d + k) * m + c] * tmp_[a * m + c];
    }
    out[k] = s;
  }
}

void Step2Euler::advance(std::span<double> y, double dt, std::span<const double> dx,
                         std::span<const double> dxx) {
  const std::size_t d = vf_.dim_state;
  const std::size_t m = vf_.dim_noise;
  if (!dxx.empty()) {
    correction(y, dxx, corr_);  // also leaves V(y) in diff_
  } else {
    vf_.diffusion(y, diff_);
    std::fill(corr_.begin(), corr_.end(), 0.0);
  }
  if (vf_.drift) {
    vf_.drift(y, drift_);
  } else {
    std::fill(drift_.begin(), drift_.end(), 0.0);
  }
  for (std::size_t k = 0; k < d; ++k) {
    double noise = 0.0;
    for (std::size_t b = 0; b < m; ++b) noise += diff_[k * m + b] * dx[b];
    y[k] += drift_[k] * dt + noise + corr_[k];
  }
}

namespace {

void guard(std::span<const double> y, double bound, double t) {
  for (double v : y) {
    if (!std::isfinite(v) || std::abs(v) > bound) {
      std::ostringstream msg;
      msg << "solution left the blow-up bound " << bound << " at t = " << t;
      throw BlowUpError(t, msg.str());
    }
  }
}

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

struct Recorder {
  Recorder(std::size_t steps, std::size_t stride, std::size_t d) : stride_(std::max<std::size_t>(stride, 1)) {
    const std::size_t rows = steps / stride_ + 1 + (steps % stride_ != 0 ? 1 : 0);
    states.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    times.reserve(rows);
    steps_ = steps;
  }
  void maybe_record(std::size_t k, double t, std::span<const double> y) {
    if (k % stride_ != 0 && k != steps_) return;
    const auto row = static_cast<Eigen::Index>(times.size());
    for (std::size_t i = 0; i < y.size(); ++i) states(row, static_cast<Eigen::Index>(i)) = y[i];
    times.push_back(t);
  }
  std::size_t stride_;
  std::size_t steps_;
  std::vector<double> times;
  Matrix states;
};

}  // namespace

RDESolution solve_rde(const VectorFieldBundle& vf, const RoughPathGrid& driver,
                      const Vector& y0, const RdeOptions& options) {
  if (driver.dim() != vf.dim_noise) {
    throw std::invalid_argument("solve_rde: driver dimension does not match the vector fields");
  }
  if (static_cast<std::size_t>(y0.size()) != vf.dim_state) {
    throw std::invalid_argument("solve_rde: initial state has the wrong dimension");
  }
  const std::size_t d = vf.dim_state;
  const std::size_t m = vf.dim_noise;
  const std::size_t steps = driver.size() - 1;
  Step2Euler stepper(vf);
  std::vector<double> y(y0.data(), y0.data() + d);
  std::vector<double> dx(m), dxx(m * m), probe(d), corr(d);
  Recorder rec(steps, options.record_stride, d);
  RDESolution sol;

  auto load_increment = [&](std::size_t i, std::size_t j) {
    const auto xi = driver.first(i), xj = driver.first(j);
    const auto mi = driver.second(i), mj = driver.second(j);
    for (std::size_t a = 0; a < m; ++a) dx[a] = xj[a] - xi[a];
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        dxx[a * m + b] = mj[a * m + b] - mi[a * m + b] - xi[a] * dx[b];
      }
    }
  };

  guard(y, options.blowup_bound, 0.0);
  rec.maybe_record(0, driver.time(0), y);
  std::vector<double> two_step_start;
  for (std::size_t k = 0; k < steps; ++k) {
    const double dt = driver.time(k + 1) - driver.time(k);
    if (options.remainder_proxy && k % 2 == 0 && k + 2 <= steps) {
      // One coarse step over [t_k, t_{k+2}], compared after the two fine ones.
      probe = y;
      load_increment(k, k + 2);
      stepper.advance(probe, driver.time(k + 2) - driver.time(k), dx, dxx);
      two_step_start = probe;
    }
    load_increment(k, k + 1);
    stepper.correction(y, dxx, corr);
    sol.max_second_order_term = std::max(sol.max_second_order_term, sup_norm(corr));
    stepper.advance(y, dt, dx, dxx);
    guard(y, options.blowup_bound, driver.time(k + 1));
    if (options.remainder_proxy && k % 2 == 1 && !two_step_start.empty()) {
      double r = 0.0;
      for (std::size_t i = 0; i < d; ++i) r = std::max(r, std::abs(y[i] - two_step_start[i]));
      sol.max_remainder_proxy = std::max(sol.max_remainder_proxy, r);
      two_step_start.clear();
    }
    rec.maybe_record(k + 1, driver.time(k + 1), y);
  }
  sol.times = std::move(rec.times);
  sol.states = std::move(rec.states);
  return sol;
}

RDESolution solve_sde_euler_maruyama(const VectorFieldBundle& vf, SdeMode mode,
                                     const Matrix& sigma, const Matrix& gamma,
                                     std::size_t steps, Rng& rng, const Vector& y0,
                                     const RdeOptions& options) {
  const std::size_t d = vf.dim_state;
  const std::size_t m = vf.dim_noise;
  const auto mi = static_cast<Eigen::Index>(m);
  if (sigma.rows() != mi || sigma.cols() != mi || gamma.rows() != mi || gamma.cols() != mi) {
    throw std::invalid_argument("solve_sde_euler_maruyama: sigma and gamma must be m x m");
  }
  if (static_cast<std::size_t>(y0.size()) != d) {
    throw std::invalid_argument("solve_sde_euler_maruyama: initial state has the wrong dimension");
  }
  if (steps < 1) throw std::invalid_argument("solve_sde_euler_maruyama: steps must be >= 1");
  const Matrix root = psd_sqrt(sigma);
  Matrix effective = gamma;
  if (mode == SdeMode::stratonovich) effective += 0.5 * sigma;
  // Row-major copy for the contraction; the increment of the drift
  // correction over a step of length h is h * effective.
  std::vector<double> gamma_rm(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      gamma_rm[a * m + b] = effective(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  const bool has_correction = !effective.isZero(0.0);

  Step2Euler stepper(vf);
  std::vector<double> y(y0.data(), y0.data() + d), dx(m), dxx(m * m), z(m);
  const double h = 1.0 / static_cast<double>(steps);
  const double sqrt_h = std::sqrt(h);
  std::normal_distribution<double> normal;
  Recorder rec(steps, options.record_stride, d);
  guard(y, options.blowup_bound, 0.0);
  rec.maybe_record(0, 0.0, y);
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t a = 0; a < m; ++a) z[a] = normal(rng);
    for (std::size_t a = 0; a < m; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < m; ++b) s += root(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * z[b];
      dx[a] = sqrt_h * s;
    }
    for (std::size_t i = 0; i < m * m; ++i) dxx[i] = h * gamma_rm[i];
    stepper.advance(y, h, dx, has_correction ? std::span<const double>(dxx) : std::span<const double>());
    const double t = static_cast<double>(k + 1) * h;
    guard(y, options.blowup_bound, t);
    rec.maybe_record(k + 1, t, y);
  }
  RDESolution sol;
  sol.times = std::move(rec.times);
  sol.states = std::move(rec.states);
  return sol;
}

RDESolution solve_sde_euler_maruyama(const VectorFieldBundle& vf, SdeMode mode,
                                     const Matrix& sigma, const Matrix& gamma,
                                     std::size_t steps, std::uint64_t seed,
                                     const Vector& y0, const RdeOptions& options) {
  Rng rng(seed, 0, StreamPurpose::sde);
  return solve_sde_euler_maruyama(vf, mode, sigma, gamma, steps, rng, y0, options);
}

double finite_diff_check_dv(const VectorFieldBundle& vf, std::size_t samples, double h,
                            std::uint64_t seed, double state_scale) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check_dv: h must be positive");
  const std::size_t d = vf.dim_state;
  const std::size_t m = vf.dim_noise;
  Step2Euler stepper(vf);
  Rng rng(seed, 0, StreamPurpose::auxiliary);
  std::normal_distribution<double> normal;
  std::vector<double> y(d), mat(m * m), exact(d), shifted(d);
  std::vector<double> plus(d * m), minus(d * m), v(d * m), fd_jac(d * d * m);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& yi : y) yi = state_scale * normal(rng);
    for (auto& mi : mat) mi = normal(rng);
    stepper.correction(y, mat, exact);
    vf.diffusion(y, v);
    for (std::size_t a = 0; a < d; ++a) {
      shifted = y;
      shifted[a] = y[a] + h;
      vf.diffusion(shifted, plus);
      shifted[a] = y[a] - h;
      vf.diffusion(shifted, minus);
      for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t c = 0; c < m; ++c) {
          fd_jac[(a * d + k) * m + c] = (plus[k * m + c] - minus[k * m + c]) / (2.0 * h);
        }
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      double approx = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
          for (std::size_t c = 0; c < m; ++c) {
            approx += fd_jac[(a * d + k) * m + c] * v[a * m + b] * mat[b * m + c];
          }
        }
      }
      worst = std::max(worst, std::abs(approx - exact[k]));
    }
  }
  return worst;
}

VectorFieldBundle linear_field(const Matrix& drift, const std::vector<Matrix>& diffusion) {
  const auto d = static_cast<std::size_t>(drift.rows());
  const std::size_t m = diffusion.size();
  if (drift.cols() != drift.rows() || m == 0) {
    throw std::invalid_argument("linear_field: drift must be square and m >= 1");
  }
  for (const auto& b : diffusion) {
    if (b.rows() != drift.rows() || b.cols() != drift.rows()) {
      throw std::invalid_argument("linear_field: each diffusion matrix must be d x d");
    }
  }
  VectorFieldBundle vf;
  vf.dim_state = d;
  vf.dim_noise = m;
  vf.drift = [drift, d](std::span<const double> y, std::span<double> out) {
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (std::size_t a = 0; a < d; ++a) s += drift(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)) * y[a];
      out[k] = s;
    }
  };
  vf.diffusion = [diffusion, d, m](std::span<const double> y, std::span<double> out) {
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t b = 0; b < m; ++b) {
        double s = 0.0;
        for (std::size_t a = 0; a < d; ++a) s += diffusion[b](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)) * y[a];
        out[k * m + b] = s;
      }
    }
  };
  vf.diffusion_jacobian = [diffusion, d, m](std::span<const double>, std::span<double> out) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t b = 0; b < m; ++b) {
          out[(a * d + k) * m + b] = diffusion[b](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a));
        }
      }
    }
  };
  return vf;
}

VectorFieldBundle scalar_linear_field(double drift_rate, double diffusion_rate) {
  return linear_field(Matrix::Constant(1, 1, drift_rate),
                      {Matrix::Constant(1, 1, diffusion_rate)});
}

VectorFieldBundle constant_field(const Vector& drift, const Matrix& diffusion) {
  const auto d = static_cast<std::size_t>(diffusion.rows());
  const auto m = static_cast<std::size_t>(diffusion.cols());
  if (static_cast<std::size_t>(drift.size()) != d || d == 0 || m == 0) {
    throw std::invalid_argument("constant_field: drift must have d entries");
  }
  VectorFieldBundle vf;
  vf.dim_state = d;
  vf.dim_noise = m;
  vf.drift = [drift](std::span<const double>, std::span<double> out) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = drift(static_cast<Eigen::Index>(k));
  };
  vf.diffusion = [diffusion, d, m](std::span<const double>, std::span<double> out) {
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t b = 0; b < m; ++b) {
        out[k * m + b] = diffusion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b));
      }
    }
  };
  vf.diffusion_jacobian = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  return vf;
}

VectorFieldBundle heisenberg_field() {
  VectorFieldBundle vf;
  vf.dim_state = 2;
  vf.dim_noise = 2;
  vf.diffusion = [](std::span<const double> y, std::span<double> out) {
    out[0] = 1.0;
    out[1] = 0.0;
    out[2] = 0.0;
    out[3] = y[0];
  };
  vf.diffusion_jacobian = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[(0 * 2 + 1) * 2 + 1] = 1.0;  // d_1 V^2_2
  };
  return vf;
}

}  // namespace roughlab
