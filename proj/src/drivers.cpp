#include "roughlab/drivers.hpp"

#include "roughlab/linalg.hpp"
#include "roughlab/parallel.hpp"
#include "roughlab/summation.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace roughlab {

// ---------------------------------------------------------------- maps

void validate(const MapDriver& d) {
  if (!(d.gamma >= 0.0 && d.gamma < 0.5)) {
    throw std::invalid_argument("MapDriver: gamma must lie in [0, 1/2)");
  }
  if (d.kind == MapKind::doubling && d.gamma != 0.0) {
    throw std::invalid_argument("MapDriver: the doubling map takes no gamma");
  }
}

double map_step(const MapDriver& d, double y) {
  if (y >= 0.5) return std::min(1.0, 2.0 * y - 1.0);
  if (d.kind == MapKind::doubling || d.gamma == 0.0) return 2.0 * y;
  return std::min(1.0, y * (1.0 + std::pow(2.0 * y, d.gamma)));
}

std::vector<double> iterate_map(const MapDriver& d, double y0, std::size_t n) {
  validate(d);
  if (!(y0 >= 0.0 && y0 <= 1.0)) {
    throw std::invalid_argument("iterate_map: y0 must lie in [0, 1]");
  }
  std::vector<double> orbit(n);
  double y = y0;
  for (std::size_t j = 0; j < n; ++j) {
    orbit[j] = y;
    y = map_step(d, y);
  }
  return orbit;
}

OrbitStream::OrbitStream(const MapDriver& d, Rng& rng)
    : driver_(d), rng_(&rng), bit_window_(d.kind == MapKind::doubling || d.gamma == 0.0) {
  validate(d);
  if (bit_window_) {
    window_ = rng();
  } else {
    y_ = rng.uniform();
    for (std::size_t k = 0; k < d.burn_in; ++k) y_ = map_step(driver_, y_);
  }
}

double OrbitStream::next() {
  if (!bit_window_) {
    const double out = y_;
    y_ = map_step(driver_, y_);
    return out;
  }
  const double out = static_cast<double>(window_ >> 11) * 0x1.0p-53;
  if (bits_left_ == 0) {
    bits_ = (*rng_)();
    bits_left_ = 64;
  }
  window_ = (window_ << 1) | (bits_ & 1u);
  bits_ >>= 1;
  --bits_left_;
  return out;
}

// ---------------------------------------------------------------- observables

Observable centered_identity() {
  return {1, [](double y, std::span<double> out) { out[0] = y - 0.5; }, true, "centered-id"};
}

Observable cosine() {
  return {1,
          [](double y, std::span<double> out) { out[0] = std::cos(2.0 * std::numbers::pi * y); },
          true, "cos"};
}

Observable zero_observable(std::size_t dim) {
  return {dim, [](double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); },
          true, "zero"};
}

Observable stack_observables(const std::vector<Observable>& parts) {
  if (parts.empty()) throw std::invalid_argument("stack_observables: nothing to stack");
  if (parts.size() == 1) return parts.front();
  Observable out;
  out.dim = 0;
  out.mean_zero = true;
  for (const auto& p : parts) {
    out.dim += p.dim;
    out.mean_zero = out.mean_zero && p.mean_zero;
    out.name += (out.name.empty() ? "" : ",") + p.name;
  }
  out.eval = [parts](double y, std::span<double> o) {
    std::size_t offset = 0;
    for (const auto& p : parts) {
      p.eval(y, o.subspan(offset, p.dim));
      offset += p.dim;
    }
  };
  return out;
}

Observable named_observable(const std::string& name) {
  std::vector<Observable> parts;
  std::stringstream ss(name);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "centered-id") {
      parts.push_back(centered_identity());
    } else if (item == "cos") {
      parts.push_back(cosine());
    } else if (item == "zero") {
      parts.push_back(zero_observable());
    } else {
      throw std::invalid_argument("unknown observable '" + item +
                                  "' (expected centered-id, cos or zero)");
    }
  }
  return stack_observables(parts);
}

Observable center_observable(const Observable& v, const MapDriver& d, std::uint64_t seed,
                             std::size_t pilot_replicas, std::size_t pilot_length,
                             std::size_t threads) {
  validate(d);
  if (pilot_replicas == 0 || pilot_length == 0) {
    throw std::invalid_argument("center_observable: empty pilot");
  }
  const std::size_t m = v.dim;
  std::vector<double> means(pilot_replicas * m, 0.0);
  parallel_for(pilot_replicas, threads, [&](std::size_t r) {
    Rng rng(seed, r, StreamPurpose::pilot);
    OrbitStream orbit(d, rng);
    std::vector<double> vals(pilot_length * m);
    for (std::size_t j = 0; j < pilot_length; ++j) {
      v.eval(orbit.next(), std::span<double>(vals).subspan(j * m, m));
    }
    std::vector<double> column(pilot_length);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < pilot_length; ++j) column[j] = vals[j * m + i];
      means[r * m + i] = pairwise_mean(column);
    }
  });
  std::vector<double> mean(m);
  std::vector<double> column(pilot_replicas);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < pilot_replicas; ++r) column[r] = means[r * m + i];
    mean[i] = pairwise_mean(column);
  }
  Observable out;
  out.dim = m;
  out.mean_zero = true;
  out.name = v.name + "-centered";
  out.eval = [inner = v.eval, mean](double y, std::span<double> o) {
    inner(y, o);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= mean[i];
  };
  return out;
}

// ---------------------------------------------------------------- walks and OU

void validate(const OUDriver& d) {
  if (d.friction.rows() < 1 || d.friction.rows() != d.friction.cols() || !d.friction.allFinite()) {
    throw std::invalid_argument("OUDriver: friction must be a finite square matrix");
  }
  if (!(min_real_eigenvalue(d.friction) > 0.0)) {
    throw std::invalid_argument("OUDriver: friction spectrum must have positive real part");
  }
  if (!(d.epsilon > 0.0) || !std::isfinite(d.epsilon)) {
    throw std::invalid_argument("OUDriver: epsilon must be positive");
  }
  const double rho = spectral_radius(d.friction);
  const double per_relaxation = static_cast<double>(d.mesh) * d.epsilon * d.epsilon / rho;
  if (per_relaxation < 10.0) {
    std::ostringstream msg;
    msg << "OUDriver: mesh " << d.mesh << " gives " << per_relaxation
        << " steps per OU relaxation time; need mesh >= "
        << std::ceil(10.0 * rho / (d.epsilon * d.epsilon));
    throw std::invalid_argument(msg.str());
  }
}

void validate(const WalkDriver& d) {
  if (d.law == WalkLaw::rademacher) {
    if (d.dim < 1) throw std::invalid_argument("WalkDriver: dim must be >= 1");
    return;
  }
  if (d.sigma.rows() < 1 || !is_psd(d.sigma)) {
    throw std::invalid_argument("WalkDriver: gaussian law needs a PSD covariance");
  }
}

OUTransition::OUTransition(const Matrix& friction, double h) {
  const Eigen::Index m = friction.rows();
  if (friction.cols() != m || m < 1) throw std::invalid_argument("OUTransition: square friction required");
  if (!(h > 0.0)) throw std::invalid_argument("OUTransition: step must be positive");
  // Augmented state Z = (Y, J), dZ = A Z dt + G dB with A = [[-F, 0], [I, 0]],
  // G = [I; 0]. Van Loan: exp(h [[-A, G G^T], [0, A^T]]) has exp(A^T h) in
  // the lower-right block and exp(-A h) Q in the upper-right one.
  const Eigen::Index n = 2 * m;
  Matrix a = Matrix::Zero(n, n);
  a.topLeftCorner(m, m) = -friction;
  a.bottomLeftCorner(m, m) = Matrix::Identity(m, m);
  Matrix ggt = Matrix::Zero(n, n);
  ggt.topLeftCorner(m, m) = Matrix::Identity(m, m);
  Matrix c = Matrix::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = -a * h;
  c.topRightCorner(n, n) = ggt * h;
  c.bottomRightCorner(n, n) = a.transpose() * h;
  const Matrix e = c.exp();
  const Matrix expah = e.bottomRightCorner(n, n).transpose();
  const Matrix q = expah * e.topRightCorner(n, n);
  decay_ = expah.topLeftCorner(m, m);
  integrator_ = expah.bottomLeftCorner(m, m);
  noise_root_ = psd_sqrt(sym(q));
  stationary_ = sym(solve_lyapunov(friction, Matrix::Identity(m, m)));
  stationary_root_ = psd_sqrt(stationary_);
}

void OUTransition::draw_stationary(Vector& y, Rng& rng) const {
  std::normal_distribution<double> normal;
  Vector z(stationary_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  y = stationary_root_ * z;
}

void OUTransition::step(Vector& y, Vector& integral, Rng& rng) const {
  std::normal_distribution<double> normal;
  const Eigen::Index m = decay_.rows();
  Vector z(2 * m);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Vector xi = noise_root_ * z;
  integral = integrator_ * y + xi.tail(m);
  y = decay_ * y + xi.head(m);
}

namespace {

std::size_t horizon_steps(std::size_t mesh, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon * static_cast<double>(mesh)));
  if (steps < 1) throw std::invalid_argument("horizon shorter than one mesh step");
  return steps;
}

}  // namespace

OUPathSampler::OUPathSampler(const OUDriver& d, double horizon)
    : driver_((validate(d), d)),
      times_(uniform_grid(horizon_steps(d.mesh, horizon),
                          static_cast<double>(horizon_steps(d.mesh, horizon)) /
                              static_cast<double>(d.mesh))),
      transition_(d.friction, 1.0 / (static_cast<double>(d.mesh) * d.epsilon * d.epsilon)) {}

Matrix OUPathSampler::sample_values(Rng& rng) const {
  const Eigen::Index m = driver_.friction.rows();
  const auto rows = static_cast<Eigen::Index>(times_.size());
  Matrix values(rows, m);
  values.row(0).setZero();
  Vector y, integral(m);
  transition_.draw_stationary(y, rng);
  Vector total = Vector::Zero(m);
  for (Eigen::Index k = 1; k < rows; ++k) {
    transition_.step(y, integral, rng);
    total += integral;
    values.row(k) = driver_.epsilon * total.transpose();
  }
  return values;
}

RoughPathGrid OUPathSampler::sample(Rng& rng) const {
  return lift_piecewise_linear({times_, sample_values(rng), LiftMode::piecewise_linear});
}

RoughPathGrid ou_rough_path(const OUDriver& d, double horizon, Rng& rng) {
  return OUPathSampler(d, horizon).sample(rng);
}

namespace {

void draw_walk_step(const WalkDriver& d, const Matrix& root, Rng& rng,
                    std::normal_distribution<double>& normal, std::span<double> out) {
  if (d.law == WalkLaw::rademacher) {
    for (auto& o : out) o = (rng() >> 63) != 0 ? 1.0 : -1.0;
    return;
  }
  const Eigen::Index m = root.rows();
  Vector z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
  const Vector x = root * z;
  for (Eigen::Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = x(i);
}

std::size_t walk_dim(const WalkDriver& d) {
  return d.law == WalkLaw::rademacher ? d.dim : static_cast<std::size_t>(d.sigma.rows());
}

}  // namespace

RoughPathGrid walk_rough_path(const WalkDriver& d, std::size_t n, LiftMode mode, Rng& rng) {
  validate(d);
  if (n < 1) throw std::invalid_argument("walk_rough_path: n must be >= 1");
  const std::size_t m = walk_dim(d);
  const Matrix root = d.law == WalkLaw::gaussian ? psd_sqrt(d.sigma) : Matrix();
  std::normal_distribution<double> normal;
  std::vector<double> seq(n * m);
  for (std::size_t j = 0; j < n; ++j) {
    draw_walk_step(d, root, rng, normal, std::span<double>(seq).subspan(j * m, m));
  }
  BirkhoffPath b = birkhoff_path(seq, m);
  b.path.mode = mode;
  return lift(b.path);
}

// ---------------------------------------------------------------- sources

std::size_t driver_dim(const DriverSpec& d) {
  if (const auto* s = std::get_if<MapSource>(&d)) return s->observable.dim;
  if (const auto* o = std::get_if<OUDriver>(&d)) return static_cast<std::size_t>(o->friction.rows());
  return walk_dim(std::get<WalkDriver>(d));
}

std::string driver_name(const DriverSpec& d) {
  if (const auto* s = std::get_if<MapSource>(&d)) {
    if (s->map.kind == MapKind::doubling) return "doubling";
    std::ostringstream out;
    out << "lsv(" << s->map.gamma << ")";
    return out.str();
  }
  if (std::holds_alternative<OUDriver>(d)) return "ou";
  return std::get<WalkDriver>(d).law == WalkLaw::rademacher ? "walk-rademacher" : "walk-gaussian";
}

FastSource::FastSource(DriverSpec spec) : spec_(std::move(spec)), dim_(driver_dim(spec_)) {
  if (const auto* s = std::get_if<MapSource>(&spec_)) {
    validate(s->map);
    if (!s->observable.eval || s->observable.dim < 1) {
      throw std::invalid_argument("FastSource: observable has no evaluation rule");
    }
  } else if (const auto* o = std::get_if<OUDriver>(&spec_)) {
    if (o->friction.rows() < 1 || o->friction.rows() != o->friction.cols() ||
        !(min_real_eigenvalue(o->friction) > 0.0)) {
      throw std::invalid_argument("OUDriver: friction spectrum must have positive real part");
    }
    unit_ou_ = std::make_shared<OUTransition>(o->friction, 1.0);
  } else {
    const auto& w = std::get<WalkDriver>(spec_);
    validate(w);
    if (w.law == WalkLaw::gaussian) walk_root_ = psd_sqrt(w.sigma);
  }
}

void FastSource::sequence(std::uint64_t seed, std::uint64_t replica, std::size_t n,
                          std::span<double> out) const {
  const std::size_t m = dim_;
  if (out.size() < n * m) throw std::invalid_argument("FastSource::sequence: output too small");
  if (const auto* s = std::get_if<MapSource>(&spec_)) {
    Rng rng(seed, replica, StreamPurpose::fast_orbit);
    OrbitStream orbit(s->map, rng);
    for (std::size_t j = 0; j < n; ++j) s->observable.eval(orbit.next(), out.subspan(j * m, m));
    return;
  }
  if (unit_ou_) {
    Rng rng(seed, replica, StreamPurpose::ou);
    Vector y, integral(static_cast<Eigen::Index>(m));
    unit_ou_->draw_stationary(y, rng);
    for (std::size_t j = 0; j < n; ++j) {
      unit_ou_->step(y, integral, rng);
      for (std::size_t i = 0; i < m; ++i) out[j * m + i] = integral(static_cast<Eigen::Index>(i));
    }
    return;
  }
  const auto& w = std::get<WalkDriver>(spec_);
  Rng rng(seed, replica, StreamPurpose::walk);
  std::normal_distribution<double> normal;
  for (std::size_t j = 0; j < n; ++j) draw_walk_step(w, walk_root_, rng, normal, out.subspan(j * m, m));
}

SumAccumulator::SumAccumulator(std::size_t m)
    : m_(m), sum_(m, 0.0), strict_(m * m, 0.0), diag_(m * m, 0.0) {}

void SumAccumulator::push(std::span<const double> v) {
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) {
      strict_[i * m_ + j] += sum_[i] * v[j];
      diag_[i * m_ + j] += v[i] * v[j];
    }
  }
  for (std::size_t i = 0; i < m_; ++i) sum_[i] += v[i];
  ++count_;
}

Vector SumAccumulator::sum() const {
  return Eigen::Map<const Vector>(sum_.data(), static_cast<Eigen::Index>(m_));
}

Matrix SumAccumulator::strict() const {
  const auto m = static_cast<Eigen::Index>(m_);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      strict_.data(), m, m);
}

Matrix SumAccumulator::diagonal() const {
  const auto m = static_cast<Eigen::Index>(m_);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      diag_.data(), m, m);
}

BirkhoffPath birkhoff_path(std::span<const double> seq, std::size_t m) {
  if (m < 1 || seq.size() % m != 0 || seq.empty()) {
    throw std::invalid_argument("birkhoff_path: need n >= 1 observations of dimension m");
  }
  const std::size_t n = seq.size() / m;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  BirkhoffPath out;
  out.path.times = uniform_grid(n);
  out.path.mode = LiftMode::piecewise_constant_ito;
  out.path.base_values = Matrix::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(m));
  Vector running = Vector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) running(static_cast<Eigen::Index>(i)) += seq[j * m + i];
    out.path.base_values.row(static_cast<Eigen::Index>(j + 1)) = scale * running.transpose();
  }
  out.raw_sum = running;
  return out;
}

namespace {

std::vector<double> evaluate(const Observable& v, std::span<const double> orbit) {
  std::vector<double> seq(orbit.size() * v.dim);
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    v.eval(orbit[j], std::span<double>(seq).subspan(j * v.dim, v.dim));
  }
  return seq;
}

}  // namespace

BirkhoffPath birkhoff_path(const Observable& v, std::span<const double> orbit) {
  return birkhoff_path(evaluate(v, orbit), v.dim);
}

BirkhoffPath birkhoff_path(const MapDriver& d, const Observable& v, double y0, std::size_t n) {
  const auto orbit = iterate_map(d, y0, n);
  return birkhoff_path(v, orbit);
}

IteratedSumPath iterated_sum_path(std::span<const double> seq, std::size_t m) {
  BirkhoffPath b = birkhoff_path(seq, m);
  SumAccumulator acc(m);
  for (std::size_t j = 0; j < seq.size() / m; ++j) acc.push(seq.subspan(j * m, m));
  return {lift_piecewise_constant_ito(b.path), acc.iterated_sum(), b.raw_sum};
}

IteratedSumPath iterated_sum_path(const Observable& v, std::span<const double> orbit) {
  return iterated_sum_path(evaluate(v, orbit), v.dim);
}

IteratedSumPath iterated_sum_path(const MapDriver& d, const Observable& v, double y0,
                                  std::size_t n) {
  const auto orbit = iterate_map(d, y0, n);
  return iterated_sum_path(v, orbit);
}

}  // namespace roughlab
