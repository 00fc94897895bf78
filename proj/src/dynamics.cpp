#include "llb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace llb {

void ModelParams::validate() const {
  std::ostringstream err;
  if (!(nu1 > 0)) err << "nu1 must be > 0; ";
  if (!(nu2 >= 0)) err << "nu2 must be >= 0; ";
  if (!(mu >= 0)) err << "mu must be >= 0; ";
  if (!std::isfinite(gamma)) err << "gamma must be finite; ";
  if (!(epsilon >= 0 && epsilon <= 1)) err << "epsilon must lie in [0, 1]; ";
  if (!err.str().empty()) {
    throw std::invalid_argument("model parameters: " + err.str());
  }
}

void TimeGrid::validate() const {
  if (!(horizon > 0) || steps < 1) {
    throw std::invalid_argument("time grid: need horizon > 0 and steps >= 1");
  }
}

const char* to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::Deterministic: return "deterministic";
    case SystemKind::Stochastic: return "stochastic";
    case SystemKind::ControlledStochastic: return "controlled-stochastic";
    case SystemKind::Skeleton: return "skeleton";
    case SystemKind::LinearizedCLT: return "linearized-clt";
  }
  return "unknown";
}

FieldXd initial_profile(const Grid& grid, double a, double b) {
  FieldXd u = grid.zeros();
  for (Eigen::Index i = 0; i < grid.n_interior(); ++i) {
    const double x = grid.node(i);
    u(i, 0) = a * std::sin(std::numbers::pi * x);
    u(i, 1) = b * std::sin(2.0 * std::numbers::pi * x);
  }
  return u;
}

FieldXd explicit_rhs(const Grid& grid, const FieldXd& u,
                     const ModelParams& params) {
  FieldXd out = grid.zeros();
  if (params.gamma != 0.0) {
    out = params.gamma * cross(u, laplacian(grid, u));
  }
  if (params.nu2 != 0.0) {
    const Eigen::ArrayXd factor =
        1.0 + params.mu * u.rowwise().squaredNorm().array();
    out -= params.nu2 * (u.array().colwise() * factor).matrix();
  }
  return out;
}

FieldXd linearized_rhs(const Grid& grid, const FieldXd& v, const FieldXd& base,
                       const ModelParams& params) {
  FieldXd out = grid.zeros();
  if (params.gamma != 0.0) {
    out = params.gamma *
          (cross(v, laplacian(grid, base)) + cross(base, laplacian(grid, v)));
  }
  if (params.nu2 != 0.0) {
    const Eigen::ArrayXd base_dot_v = dot(base, v).array();
    const Eigen::ArrayXd base_sq = base.rowwise().squaredNorm().array();
    out -= params.nu2 * v;
    out -= params.nu2 * params.mu *
           ((base.array().colwise() * (2.0 * base_dot_v)) +
            (v.array().colwise() * base_sq))
               .matrix();
  }
  return out;
}

namespace {

FieldXd finish_step(const Grid& grid, FieldXd predictor, double c,
                    bool implicit) {
  FieldXd next = implicit ? helmholtz_solve(grid, predictor, c)
                          : std::move(predictor);
  if (!next.allFinite()) {
    throw BlowUpError(-1, "non-finite value in solution");
  }
  return next;
}

}  // namespace

FieldXd step(const Grid& grid, const FieldXd& u, const ModelParams& params,
             double dt, const FieldXd* noise, const FieldXd* control,
             StepHooks hooks) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be > 0");
  FieldXd predictor = u + dt * explicit_rhs(grid, u, params);
  const bool with_noise = noise != nullptr && params.epsilon != 0.0;
  if (with_noise || control != nullptr) {
    FieldXd forcing = grid.zeros();
    if (with_noise) forcing += std::sqrt(params.epsilon) * (*noise);
    if (control != nullptr) forcing += dt * (*control);
    predictor += cross(u, forcing);
  }
  return finish_step(grid, std::move(predictor), dt * params.nu1,
                     hooks.implicit_diffusion);
}

const FieldXd& TrajectoryRecord::at_step(int step) const {
  // The final step is stored even when it is off-stride.
  if (step == tgrid.steps && !snapshots.empty()) return snapshots.back();
  if (step < 0 || step > tgrid.steps || step % stride != 0) {
    throw std::out_of_range("trajectory: step " + std::to_string(step) +
                            " not stored");
  }
  return snapshots[step / stride];
}

int default_stride(int steps) {
  constexpr int kMaxStored = 10000;
  return steps <= kMaxStored ? 1 : (steps + kMaxStored - 1) / kMaxStored;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("integrate: ") + what);
}

}  // namespace

TrajectoryRecord integrate(SystemKind kind, const FieldXd& initial,
                           const ModelParams& params, const TimeGrid& tgrid,
                           const CovarianceSpec& spec, const Grid& grid,
                           const IntegrateOptions& options) {
  params.validate();
  tgrid.validate();
  detail::require_on_grid(grid, initial, "integrate");
  require(initial.allFinite(), "initial data must be finite");

  const bool needs_control = kind == SystemKind::ControlledStochastic ||
                             kind == SystemKind::Skeleton;
  const bool needs_noise = kind == SystemKind::Stochastic ||
                           kind == SystemKind::ControlledStochastic ||
                           kind == SystemKind::LinearizedCLT;
  if (needs_control) {
    require(options.control != nullptr, "this system requires a control path");
    require(options.control->steps() == tgrid.steps,
            "control path length must match the time grid");
    require(options.control->mode_count() <= spec.mode_count(),
            "control path has more modes than the covariance");
  }
  if (needs_noise) {
    require(options.noise != nullptr || options.stream.has_value(),
            "this system requires a noise path or a stream");
    if (options.noise != nullptr) {
      require(static_cast<int>(options.noise->increments.size()) ==
                  tgrid.steps,
              "noise path length must match the time grid");
    }
  }
  if (kind == SystemKind::LinearizedCLT) {
    require(options.base != nullptr, "linearized system requires a base path");
    require(options.base->has_every_step() &&
                options.base->tgrid.steps == tgrid.steps &&
                options.base->grid == grid,
            "base path must store every step on the same grids");
  }

  const double dt = tgrid.dt();
  const double h = grid.spacing();
  const ModeSynthesis synth(spec, grid);

  // Deterministic and skeleton runs consume no randomness.
  NoisePath drawn;
  const NoisePath* path = nullptr;
  if (needs_noise) {
    if (options.noise != nullptr) {
      path = options.noise;
    } else {
      RngStream rng(*options.stream);
      drawn = draw_noise_path(spec, dt, tgrid.steps, rng);
      path = &drawn;
    }
  }

  TrajectoryRecord rec;
  rec.kind = kind;
  rec.grid = grid;
  rec.params = params;
  rec.tgrid = tgrid;
  rec.stride = options.snapshot_stride > 0 ? options.snapshot_stride
                                           : default_stride(tgrid.steps);
  if (kind == SystemKind::LinearizedCLT) rec.params.epsilon = 0.0;
  if (path != nullptr) rec.noise_digest = path->digest();
  if (needs_noise && options.noise == nullptr) rec.stream = options.stream;
  rec.reports.reserve(tgrid.steps + 1);

  FieldXd u = kind == SystemKind::LinearizedCLT ? grid.zeros() : initial;
  auto record = [&](int n) {
    const auto report = norms(grid, u, tgrid.time(n));
    if (report.linf > options.linf_ceiling) {
      throw BlowUpError(n, "sup norm " + std::to_string(report.linf) +
                               " exceeds ceiling at step " + std::to_string(n));
    }
    rec.max_precession_ratio = std::max(
        rec.max_precession_ratio, dt * std::abs(params.gamma) * report.linf /
                                      (h * h));
    rec.reports.push_back(report);
    if (n % rec.stride == 0 || n == tgrid.steps) {
      rec.snapshot_steps.push_back(n);
      rec.snapshots.push_back(u);
    }
  };
  record(0);

  for (int n = 0; n < tgrid.steps; ++n) {
    try {
      FieldXd noise_incr;
      const FieldXd* noise_ptr = nullptr;
      if (path != nullptr) {
        noise_incr = synth.synthesize(path->increments[n]);
        noise_ptr = &noise_incr;
      }
      FieldXd ctrl_field;
      const FieldXd* ctrl_ptr = nullptr;
      if (needs_control && !options.control->at(n).isZero(0.0)) {
        ctrl_field = synth.synthesize(options.control->at(n));
        ctrl_ptr = &ctrl_field;
      }

      switch (kind) {
        case SystemKind::Deterministic:
          u = step(grid, u, params, dt, nullptr, nullptr, options.hooks);
          break;
        case SystemKind::Stochastic:
          u = step(grid, u, params, dt, noise_ptr, nullptr, options.hooks);
          break;
        case SystemKind::Skeleton:
          u = step(grid, u, params, dt, nullptr, ctrl_ptr, options.hooks);
          break;
        case SystemKind::ControlledStochastic:
          u = step(grid, u, params, dt, noise_ptr, ctrl_ptr, options.hooks);
          break;
        case SystemKind::LinearizedCLT: {
          const FieldXd& base = options.base->snapshots[n];
          FieldXd predictor = u + dt * linearized_rhs(grid, u, base, params) +
                              cross(base, *noise_ptr);
          u = finish_step(grid, std::move(predictor), dt * params.nu1,
                          options.hooks.implicit_diffusion);
          break;
        }
      }
    } catch (const BlowUpError& e) {
      throw BlowUpError(n + 1, std::string(to_string(kind)) +
                                   " blow-up at step " + std::to_string(n + 1) +
                                   ": " + e.what());
    }
    record(n + 1);
  }
  return rec;
}

}  // namespace llb
