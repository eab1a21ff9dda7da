#pragma once

// Step-2 Euler (Davie) solver for rough differential equations
//   dY = V0(Y-) dt + V(Y-) dX,
// and an Euler-Maruyama solver for the corrected limit SDEs.

#include "roughlab/rng.hpp"
#include "roughlab/rough_core.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughlab {

/// Writes f(y) into out. Sizes are fixed by the owning bundle.
using FieldFn = std::function<void(std::span<const double> y, std::span<double> out)>;

/// Coefficients of an RDE on R^d driven by an R^m rough path.
///   drift:              out[k]               = V0^k(y)           (may be empty)
///   diffusion:          out[k*m + b]         = V^k_b(y)
///   diffusion_jacobian: out[(a*d + k)*m + b] = d_a V^k_b(y)
/// The jacobian must be the derivative of diffusion; finite_diff_check_dv
/// measures the mismatch.
struct VectorFieldBundle {
  std::size_t dim_state = 0;
  std::size_t dim_noise = 0;
  FieldFn drift;
  FieldFn diffusion;
  FieldFn diffusion_jacobian;
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Evaluates the step-2 Euler map with reusable scratch space. Not shareable
/// across threads; make one per worker.
class Step2Euler {
 public:
  explicit Step2Euler(const VectorFieldBundle& vf);

  const VectorFieldBundle& field() const { return vf_; }

  /// out = sum_{a,b,c} d_a V_c(y) V^a_b(y) mat^{b,c}; mat is m x m row-major.
  void correction(std::span<const double> y, std::span<const double> mat,
                  std::span<double> out);

  /// y <- y + V0(y) dt + V(y) dx + DV(y) V(y) dxx. dxx may be empty.
  void advance(std::span<double> y, double dt, std::span<const double> dx,
               std::span<const double> dxx);

 private:
  const VectorFieldBundle& vf_;
  std::vector<double> drift_, diff_, jac_, tmp_, corr_;
};

struct RdeOptions {
  double blowup_bound = 1e8;
  /// Store every k-th state (and always the last); 1 keeps the full path.
  std::size_t record_stride = 1;
  /// Estimate the dropped Davie remainder by comparing one step over
  /// [t_i, t_{i+2}] against two steps.
  bool remainder_proxy = true;
};

struct RDESolution {
  std::vector<double> times;
  Matrix states;  // rows = recorded times
  double max_remainder_proxy = 0.0;
  double max_second_order_term = 0.0;

  Vector terminal() const { return states.row(states.rows() - 1).transpose(); }
};

RDESolution solve_rde(const VectorFieldBundle& vf, const RoughPathGrid& driver,
                      const Vector& y0, const RdeOptions& options = {});

enum class SdeMode { ito, stratonovich };

/// Simulates dX = (V0 + DV V : Gamma_eff) dt + V dB on [0, 1] with `steps`
/// Euler-Maruyama steps, Cov(B(1)) = sigma. In ito mode Gamma_eff = gamma;
/// stratonovich mode reads the equation with a Stratonovich integral and
/// converts, Gamma_eff = gamma + sigma / 2.
RDESolution solve_sde_euler_maruyama(const VectorFieldBundle& vf, SdeMode mode,
                                     const Matrix& sigma, const Matrix& gamma,
                                     std::size_t steps, Rng& rng, const Vector& y0,
                                     const RdeOptions& options = {});
RDESolution solve_sde_euler_maruyama(const VectorFieldBundle& vf, SdeMode mode,
                                     const Matrix& sigma, const Matrix& gamma,
                                     std::size_t steps, std::uint64_t seed,
                                     const Vector& y0, const RdeOptions& options = {});

/// Max over random states y ~ N(0, state_scale^2 I) and random m x m
/// matrices of |DV contraction - contraction from central differences of V|.
double finite_diff_check_dv(const VectorFieldBundle& vf, std::size_t samples,
                            double h, std::uint64_t seed, double state_scale = 1.0);

// Built-in coefficient families.

/// V0(y) = A y and V_b(y) = B_b y for each noise direction b.
VectorFieldBundle linear_field(const Matrix& drift, const std::vector<Matrix>& diffusion);
/// d = m = 1: V0(y) = drift_rate y, V(y) = diffusion_rate y.
VectorFieldBundle scalar_linear_field(double drift_rate, double diffusion_rate);
/// Constant drift and diffusion (DV = 0).
VectorFieldBundle constant_field(const Vector& drift, const Matrix& diffusion);
/// d = m = 2, V(y) = [[1, 0], [0, y_1]], zero drift. The bracket [V_1, V_2]
/// is nonzero, so an antisymmetric area drift shows up in the slow motion.
VectorFieldBundle heisenberg_field();

}  // namespace roughlab
