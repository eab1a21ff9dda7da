#pragma once

// Fast dynamics: the doubling and LSV interval maps with observables, IID
// walks, and the integrated Ornstein-Uhlenbeck process. Each produces a
// stationary sequence of R^m-valued fast observations and, after scaling and
// lifting, a rough path.

#include "roughlab/lifts.hpp"
#include "roughlab/rng.hpp"
#include "roughlab/rough_core.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace roughlab {

// ---------------------------------------------------------------- maps

enum class MapKind { doubling, lsv };

/// kind = lsv uses T y = y (1 + (2y)^gamma) on [0, 1/2) and 2y - 1 on
/// [1/2, 1]; gamma = 0 is the doubling map. Orbits start from Lebesgue and
/// discard burn_in iterates.
struct MapDriver {
  MapKind kind = MapKind::doubling;
  double gamma = 0.0;
  std::size_t burn_in = 1000;
};

/// Throws unless gamma is in [0, 1/2).
void validate(const MapDriver& d);

double map_step(const MapDriver& d, double y);

/// (y0, T y0, ..., T^{n-1} y0) in plain double arithmetic. y0 in [0, 1].
std::vector<double> iterate_map(const MapDriver& d, double y0, std::size_t n);

/// Streams an orbit started from a Lebesgue-distributed point.
///
/// For the doubling map (and lsv with gamma = 0) doubles collapse to 0 after
/// about 53 steps, so the state is kept as a 64-bit window on the binary
/// expansion of the start point: each step shifts one bit out and one fresh
/// random bit in. The emitted value is the top 53 bits, which is the exact
/// orbit of a Lebesgue point rounded down to double precision. Other maps are
/// iterated in doubles after burn_in steps.
class OrbitStream {
 public:
  OrbitStream(const MapDriver& d, Rng& rng);
  double next();

 private:
  MapDriver driver_;
  Rng* rng_;
  bool bit_window_;
  std::uint64_t window_ = 0;
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
  double y_ = 0.0;
};

// ---------------------------------------------------------------- observables

/// v : [0, 1] -> R^dim. mean_zero declares that v integrates to zero against
/// the invariant measure of the map it is used with; estimators refuse
/// observables without the flag.
struct Observable {
  std::size_t dim = 1;
  std::function<void(double y, std::span<double> out)> eval;
  bool mean_zero = false;
  std::string name;
};

/// y - 1/2 and cos(2 pi y). Both are flagged mean-zero for Lebesgue measure,
/// which is invariant for the doubling map; LSV drivers need
/// center_observable first.
Observable centered_identity();
Observable cosine();
Observable zero_observable(std::size_t dim = 1);
/// "centered-id", "cos" or "zero". Comma-separated names stack coordinates.
Observable named_observable(const std::string& name);
/// Coordinates of each part, in order.
Observable stack_observables(const std::vector<Observable>& parts);

/// v - mean, where mean is a pilot ergodic average under the map
/// (pilot_replicas orbits of pilot_length points). Result is flagged
/// mean-zero.
Observable center_observable(const Observable& v, const MapDriver& d, std::uint64_t seed,
                             std::size_t pilot_replicas = 64,
                             std::size_t pilot_length = std::size_t{1} << 18,
                             std::size_t threads = 0);

// ---------------------------------------------------------------- walks and OU

enum class WalkLaw { rademacher, gaussian };

/// IID increments. rademacher uses independent +-1 coordinates (covariance
/// I of size dim); gaussian uses N(0, sigma).
struct WalkDriver {
  WalkLaw law = WalkLaw::rademacher;
  std::size_t dim = 1;
  Matrix sigma;
};

/// dY = -friction Y dt + dB in R^m, started stationary; W_eps(t) =
/// eps * int_0^{t/eps^2} Y ds. mesh is the number of grid steps per unit of
/// slow time.
struct OUDriver {
  Matrix friction;
  double epsilon = 0.1;
  std::size_t mesh = 1000;
};

/// Throws unless friction has spectrum in the open right half plane,
/// epsilon > 0 and there are at least 10 grid steps per 1/spectral_radius of
/// OU time.
void validate(const OUDriver& d);
void validate(const WalkDriver& d);

/// Exact one-step law of (Y, int Y) for the OU process over an OU-time step
/// h, from the matrix exponential of the augmented drift (Van Loan).
class OUTransition {
 public:
  OUTransition(const Matrix& friction, double h);
  std::size_t dim() const { return static_cast<std::size_t>(decay_.rows()); }
  /// Stationary covariance P: friction P + P friction^T = I.
  const Matrix& stationary_cov() const { return stationary_; }
  void draw_stationary(Vector& y, Rng& rng) const;
  /// Advances y over one step and writes int_t^{t+h} Y ds into integral.
  void step(Vector& y, Vector& integral, Rng& rng) const;

 private:
  Matrix decay_;       // exp(-friction h)
  Matrix integrator_;  // int_0^h exp(-friction s) ds
  Matrix noise_root_;  // symmetric root of the joint noise covariance
  Matrix stationary_root_;
  Matrix stationary_;
};

/// Sampler for W_eps on the grid {k / mesh : k <= horizon * mesh}.
class OUPathSampler {
 public:
  OUPathSampler(const OUDriver& d, double horizon = 1.0);
  const std::vector<double>& times() const { return times_; }
  /// Rows are W_eps at the grid times.
  Matrix sample_values(Rng& rng) const;
  RoughPathGrid sample(Rng& rng) const;

 private:
  OUDriver driver_;
  std::vector<double> times_;
  OUTransition transition_;
};

RoughPathGrid ou_rough_path(const OUDriver& d, double horizon, Rng& rng);

/// eps Z_{floor(t/eps^2)}, eps = n^{-1/2}, on the grid {k/n}, lifted with
/// mode.
RoughPathGrid walk_rough_path(const WalkDriver& d, std::size_t n, LiftMode mode, Rng& rng);

// ---------------------------------------------------------------- sums

struct MapSource {
  MapDriver map;
  Observable observable;
};

using DriverSpec = std::variant<MapSource, OUDriver, WalkDriver>;

std::size_t driver_dim(const DriverSpec& d);
std::string driver_name(const DriverSpec& d);

/// Prepared driver: draws the fast observation sequence of a replica.
/// Maps give v(T^j y); walks the IID increments; OU the integrals of Y over
/// consecutive unit OU-time intervals. Const methods are thread-safe.
class FastSource {
 public:
  explicit FastSource(DriverSpec spec);
  const DriverSpec& spec() const { return spec_; }
  std::size_t dim() const { return dim_; }
  /// Fills out (n x dim, row-major) for replica r of the given seed.
  void sequence(std::uint64_t seed, std::uint64_t replica, std::size_t n,
                std::span<double> out) const;

 private:
  DriverSpec spec_;
  std::size_t dim_;
  std::shared_ptr<const OUTransition> unit_ou_;
  Matrix walk_root_;
};

/// Running sums of an R^m sequence: v_n, the strict double sum
/// sum_{i<j} v_i (x) v_j and the diagonal sum_j v_j (x) v_j.
class SumAccumulator {
 public:
  explicit SumAccumulator(std::size_t m);
  void push(std::span<const double> v);
  std::size_t count() const { return count_; }
  std::size_t dim() const { return m_; }
  Vector sum() const;
  Matrix strict() const;
  Matrix diagonal() const;
  /// S_n = sum_{i<=j} v_i (x) v_j.
  Matrix iterated_sum() const { return strict() + diagonal(); }

 private:
  std::size_t m_;
  std::size_t count_ = 0;
  std::vector<double> sum_, strict_, diag_;
};

/// Piecewise-constant cadlag path t -> n^{-1/2} v_{floor(nt)} on {j/n} for a
/// sequence of n observations (rows of seq), plus the raw sum v_n.
struct BirkhoffPath {
  LiftRequest path;
  Vector raw_sum;
};
BirkhoffPath birkhoff_path(std::span<const double> seq, std::size_t m);
BirkhoffPath birkhoff_path(const Observable& v, std::span<const double> orbit);
BirkhoffPath birkhoff_path(const MapDriver& d, const Observable& v, double y0, std::size_t n);

/// Ito lift of the Birkhoff path (the strict double sum scaled by 1/n) and
/// S_n; n W_n(1) = S_n - sum_j v_j (x) v_j.
struct IteratedSumPath {
  RoughPathGrid lift;
  Matrix iterated_sum;
  Vector raw_sum;
};
IteratedSumPath iterated_sum_path(std::span<const double> seq, std::size_t m);
IteratedSumPath iterated_sum_path(const Observable& v, std::span<const double> orbit);
IteratedSumPath iterated_sum_path(const MapDriver& d, const Observable& v, double y0,
                                  std::size_t n);

}  // namespace roughlab
