// Large-deviation experiments on the skeleton equation
//   du_h = nu1 Lap u_h dt + gamma u_h x Lap u_h dt - nu2 (1 + mu|u_h|^2) u_h dt
//          + (u_h x G) h dt.
//
// The rate function is approximated by its endpoint form: minimize
//   1/2 int_0^T ||h||_H0^2 dt + rho ||u_h(T) - target||_{H^1}^2
// over a coarse piecewise-constant parameterization of h.

#ifndef LLB_LDP_HPP
#define LLB_LDP_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "llb/dynamics.hpp"
#include "llb/noise.hpp"

namespace llb {

/// 1/2 sum_n dt sum_{k,j} c_{k,j}(t_n)^2.
double rate_cost(const ControlPath& ctrl);

struct OptimizerSettings {
  int max_iterations = 400;  // per continuation phase
  double step_size = 1.0;    // first trial step along -gradient
  double fd_bump = 1e-4;
  double tolerance = 1e-6;   // on the gradient norm
  /// Misfit above this fraction of ||target||_{H^1} means the target was not
  /// reached and the estimate is not marked converged.
  double misfit_tolerance = 1e-2;
  int continuation_phases = 1;
  double continuation_factor = 10.0;
  int threads = 1;
};

struct RateProblem {
  FieldXd target;
  double penalty = 1e3;
  int control_modes = 1;
  int control_steps = 1;
  OptimizerSettings optimizer;

  int unknowns() const { return control_modes * control_steps * 3; }
};

struct RateEstimate {
  double cost = 0;
  double misfit = 0;  // ||u_h(T) - target||_{H^1}
  ControlPath control;
  int iterations = 0;
  bool converged = false;
  /// Penalized objective after every accepted iteration (all phases).
  std::vector<double> objective_history;
};

/// Expands coarse coefficients (control_steps x control_modes x 3, row-major)
/// into a piecewise-constant path on the fine grid.
ControlPath expand_control(const Eigen::VectorXd& coarse, int control_modes,
                           int control_steps, const TimeGrid& tgrid);

/// Terminal state of the skeleton equation under ctrl.
FieldXd skeleton_terminal(const ControlPath& ctrl, const ModelParams& params,
                          const TimeGrid& tgrid, const CovarianceSpec& spec,
                          const Grid& grid, const FieldXd& initial);

RateEstimate estimate_rate(const RateProblem& problem, const ModelParams& params,
                           const TimeGrid& tgrid, const CovarianceSpec& spec,
                           const Grid& grid, const FieldXd& initial);

/// JSON object with cost, misfit, iterations, converged.
void write_rate_json(std::ostream& os, const RateEstimate& est);

struct WeakConvergenceRow {
  double epsilon = 0;
  double mean_metric = 0;
  double std_error = 0;
  int n_ok = 0;
  int n_failed = 0;
};

struct WeakConvergenceConfig {
  std::vector<double> epsilons;
  int samples = 32;
  ModelParams params;
  TimeGrid tgrid{0.25, 2500};
  std::uint64_t base_seed = 1;
  int threads = 1;
};

/// For each epsilon, the sample mean of
///   sup_t ||grad(u_h^eps - u_h)||^2 + nu1 int_0^T ||Lap(u_h^eps - u_h)||^2 dt
/// between the controlled stochastic system and the skeleton, both under h.
std::vector<WeakConvergenceRow> weak_convergence_experiment(
    const ControlPath& h, const WeakConvergenceConfig& config,
    const CovarianceSpec& spec, const Grid& grid, const FieldXd& initial);

/// Columns: epsilon, mean_metric, std_error, n_ok, n_failed.
void write_weak_convergence_csv(std::ostream& os,
                                const std::vector<WeakConvergenceRow>& rows);

struct CompactnessRow {
  int mode = 0;
  double metric = 0;  // sup_t ||grad(u_{h_n} - u_h)||^2
};

/// h_n = h + amplitude * sqrt(2/T) in mode k_n and the given direction
/// (0-based), i.e. a perturbation of H0 cost amplitude^2.
std::vector<CompactnessRow> compactness_probe(
    const ControlPath& h, const std::vector<int>& modes, double amplitude,
    int direction, const ModelParams& params, const TimeGrid& tgrid,
    const CovarianceSpec& spec, const Grid& grid, const FieldXd& initial);

/// Columns: mode, metric.
void write_compactness_csv(std::ostream& os,
                           const std::vector<CompactnessRow>& rows);

}  // namespace llb

#endif  // LLB_LDP_HPP
