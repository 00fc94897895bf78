// Truncated Q-Wiener noise on a sine basis and Cameron-Martin controls.
//
// H = L^2((0,1); R^3) with orthonormal basis e_k(x) ê_j, e_k = sqrt(2) sin(k pi x),
// Q e_k ê_j = lambda_k e_k ê_j with lambda_k = k^-alpha, and G the identity on
// modes. The Cameron-Martin space H0 = Q^{1/2} H has the orthonormal basis
// sqrt(lambda_k) e_k ê_j; controls are stored in those coordinates.

#ifndef LLB_NOISE_HPP
#define LLB_NOISE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "llb/field.hpp"
#include "llb/rng.hpp"

namespace llb {

/// K x 3 coefficient block, one row per sine mode, one column per direction.
using ModeMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

class CovarianceSpec {
 public:
  CovarianceSpec(int mode_count, double decay_exponent);

  int mode_count() const { return static_cast<int>(sqrt_lambda_.size()); }
  double decay_exponent() const { return alpha_; }
  double lambda(int k) const;  // 1-based mode index
  const Eigen::VectorXd& sqrt_lambda() const { return sqrt_lambda_; }
  /// Partial H^1 trace sum_{k<=K} 3 lambda_k (1 + (k pi)^2).
  double h1_trace() const { return h1_trace_; }

  /// Test-only: replace every amplitude (e.g. zero to switch noise off).
  CovarianceSpec with_amplitudes(const Eigen::VectorXd& sqrt_lambda) const;

 private:
  double alpha_;
  Eigen::VectorXd sqrt_lambda_;
  double h1_trace_;
};

CovarianceSpec make_covariance(int mode_count, double decay_exponent = 4.0);

/// Raw Brownian increments: entry (k, j) ~ N(0, dt), not yet scaled by
/// sqrt(lambda_k).
struct WienerIncrement {
  ModeMatrix coefficients;
  double dt = 0;
};

WienerIncrement sample_increment(const CovarianceSpec& spec, double dt,
                                 RngStream& rng);

/// Precomputed synthesis matrix S(i, k) = sqrt(lambda_k) sqrt(2) sin(k pi x_i),
/// so a coefficient block C maps to the field S * C.
class ModeSynthesis {
 public:
  ModeSynthesis(const CovarianceSpec& spec, const Grid& grid);

  const Grid& grid() const { return grid_; }
  int mode_count() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }

  /// Field of a coefficient block with at most mode_count() rows.
  FieldXd synthesize(const ModeMatrix& coefficients) const;

 private:
  Grid grid_;
  Eigen::MatrixXd basis_;
};

FieldXd noise_field(const CovarianceSpec& spec, const WienerIncrement& incr,
                    const Grid& grid);

/// Piecewise-constant control h(t) in H0 coordinates on a uniform time grid.
class ControlPath {
 public:
  ControlPath() = default;
  ControlPath(int steps, double dt, int mode_count);

  int steps() const { return static_cast<int>(coefficients_.size()); }
  int mode_count() const { return mode_count_; }
  double dt() const { return dt_; }

  ModeMatrix& at(int step);
  const ModeMatrix& at(int step) const;

  /// 1/2 sum_n dt sum_{k,j} c_{k,j}(t_n)^2.
  double h0_cost() const;
  ControlPath scaled(double factor) const;
  bool is_zero() const;

 private:
  int mode_count_ = 0;
  double dt_ = 0;
  std::vector<ModeMatrix> coefficients_;
};

FieldXd control_field(const CovarianceSpec& spec, const ControlPath& ctrl,
                      int step, const Grid& grid);

/// Scales ctrl onto the ball int_0^T ||h||_H0^2 dt <= M when outside it.
ControlPath project_to_ball(const ControlPath& ctrl, double M);

/// CSV with header "step,k,j,coefficient"; k and j are 1-based.
void write_control_csv(std::ostream& os, const ControlPath& ctrl);
ControlPath read_control_csv(std::istream& is, int steps, double dt);

/// Raw increments for every step of a trajectory, shared between coupled
/// systems so they consume bit-identical noise.
struct NoisePath {
  double dt = 0;
  std::vector<ModeMatrix> increments;

  /// FNV-1a over the increment bytes.
  std::uint64_t digest() const;
};

NoisePath draw_noise_path(const CovarianceSpec& spec, double dt, int steps,
                          RngStream& rng);

}  // namespace llb

#endif  // LLB_NOISE_HPP
