// Semi-implicit Euler-Maruyama integration of the 1-D LLB family:
//
//   du = nu1 Lap u dt + gamma u x Lap u dt - nu2 (1 + mu |u|^2) u dt
//        + sqrt(eps) u x G dW + (u x G) h dt
//
// and its linearization around a deterministic base path u0,
//
//   dV = nu1 Lap V dt + gamma (V x Lap u0 + u0 x Lap V) dt
//        - nu2 V dt - nu2 mu (2 (u0.V) u0 + |u0|^2 V) dt + u0 x G dW.
//
// Diffusion is implicit (one tridiagonal solve per component), every other
// term explicit.

#ifndef LLB_DYNAMICS_HPP
#define LLB_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "llb/field.hpp"
#include "llb/noise.hpp"
#include "llb/rng.hpp"

namespace llb {

struct ModelParams {
  double nu1 = 1.0;
  double nu2 = 1.0;
  double gamma = 1.0;
  double mu = 1.0;
  double epsilon = 0.0;

  void validate() const;
};

struct TimeGrid {
  double horizon = 1.0;
  int steps = 1;

  double dt() const { return horizon / steps; }
  double time(int step) const { return horizon * step / steps; }
  void validate() const;
};

enum class SystemKind {
  Deterministic,
  Stochastic,
  ControlledStochastic,
  Skeleton,
  LinearizedCLT,
};

const char* to_string(SystemKind kind);

/// Test hooks. Turning off implicit diffusion drops nu1 Lap u from the update
/// (the Laplacian inside the cross term is kept).
struct StepHooks {
  bool implicit_diffusion = true;
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// a sin(pi x) ê1 + b sin(2 pi x) ê2
FieldXd initial_profile(const Grid& grid, double a = 1.0, double b = 0.5);

/// gamma u x Lap u - nu2 (1 + mu |u|^2) u, without the diffusion term.
FieldXd explicit_rhs(const Grid& grid, const FieldXd& u,
                     const ModelParams& params);

/// Drift of the linearized system around base, without nu1 Lap V.
FieldXd linearized_rhs(const Grid& grid, const FieldXd& v, const FieldXd& base,
                       const ModelParams& params);

/// One step u+ = (I - dt nu1 Lap)^{-1} [u + dt f(u) + u x (sqrt(eps) dB + dt h)].
/// noise is the synthesized Wiener increment field dB and control the field
/// h(t_n); either may be null. Throws BlowUpError on non-finite output.
FieldXd step(const Grid& grid, const FieldXd& u, const ModelParams& params,
             double dt, const FieldXd* noise = nullptr,
             const FieldXd* control = nullptr, StepHooks hooks = {});

struct TrajectoryRecord {
  SystemKind kind = SystemKind::Deterministic;
  Grid grid{3};
  ModelParams params;
  TimeGrid tgrid;
  int stride = 1;
  std::vector<int> snapshot_steps;
  std::vector<FieldXd> snapshots;
  /// One report per time step 0..N.
  std::vector<EnergyReport<double>> reports;
  std::optional<StreamId> stream;
  std::uint64_t noise_digest = 0;
  /// max_n dt gamma ||u_n||_inf / h^2, the explicit precession step ratio.
  double max_precession_ratio = 0;

  bool has_every_step() const {
    return static_cast<int>(snapshots.size()) == tgrid.steps + 1;
  }
  /// Snapshot at a time step; requires that step to be stored.
  const FieldXd& at_step(int step) const;
  const FieldXd& final_state() const { return snapshots.back(); }
};

struct IntegrateOptions {
  const ControlPath* control = nullptr;
  /// Shared raw increments; takes precedence over stream.
  const NoisePath* noise = nullptr;
  std::optional<StreamId> stream;
  const TrajectoryRecord* base = nullptr;
  /// 0 selects the default (every step up to 10^4 steps).
  int snapshot_stride = 0;
  double linf_ceiling = 1e3;
  StepHooks hooks;
};

int default_stride(int steps);

TrajectoryRecord integrate(SystemKind kind, const FieldXd& initial,
                           const ModelParams& params, const TimeGrid& tgrid,
                           const CovarianceSpec& spec, const Grid& grid,
                           const IntegrateOptions& options = {});

}  // namespace llb

#endif  // LLB_DYNAMICS_HPP
