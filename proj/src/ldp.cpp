#include "llb/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "llb/analysis.hpp"
#include "llb/parallel.hpp"

namespace llb {

double rate_cost(const ControlPath& ctrl) { return ctrl.h0_cost(); }

ControlPath expand_control(const Eigen::VectorXd& coarse, int control_modes,
                           int control_steps, const TimeGrid& tgrid) {
  if (coarse.size() != Eigen::Index(control_modes) * control_steps * 3) {
    throw std::invalid_argument("expand_control: coefficient count mismatch");
  }
  if (control_steps < 1 || tgrid.steps % control_steps != 0) {
    throw std::invalid_argument(
        "expand_control: control steps must divide the time steps");
  }
  ControlPath ctrl(tgrid.steps, tgrid.dt(), control_modes);
  const int ratio = tgrid.steps / control_steps;
  for (int m = 0; m < control_steps; ++m) {
    ModeMatrix block(control_modes, 3);
    for (int k = 0; k < control_modes; ++k) {
      for (int j = 0; j < 3; ++j) {
        block(k, j) = coarse((Eigen::Index(m) * control_modes + k) * 3 + j);
      }
    }
    for (int n = m * ratio; n < (m + 1) * ratio; ++n) ctrl.at(n) = block;
  }
  return ctrl;
}

FieldXd skeleton_terminal(const ControlPath& ctrl, const ModelParams& params,
                          const TimeGrid& tgrid, const CovarianceSpec& spec,
                          const Grid& grid, const FieldXd& initial) {
  ModelParams p = params;
  p.epsilon = 0.0;
  IntegrateOptions opt;
  opt.control = &ctrl;
  opt.snapshot_stride = tgrid.steps;
  return integrate(SystemKind::Skeleton, initial, p, tgrid, spec, grid, opt)
      .final_state();
}

namespace {

double h1_norm_sq(const Grid& grid, const FieldXd& f) {
  return grid.spacing() *
         (f.squaredNorm() + gradient(grid, f).squaredNorm());
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

RateEstimate estimate_rate(const RateProblem& problem, const ModelParams& params,
                           const TimeGrid& tgrid, const CovarianceSpec& spec,
                           const Grid& grid, const FieldXd& initial) {
  const auto& opt = problem.optimizer;
  {
    std::ostringstream err;
    if (!(problem.penalty > 0)) err << "penalty must be > 0; ";
    if (problem.control_modes < 1 || problem.control_modes > spec.mode_count())
      err << "control modes must lie in [1, K]; ";
    if (problem.control_steps < 1 || tgrid.steps % problem.control_steps != 0)
      err << "control steps must divide the time steps; ";
    if (problem.target.rows() != grid.n_interior() || problem.target.cols() != 3)
      err << "target does not match the grid; ";
    if (!(opt.fd_bump > 0) || !(opt.step_size > 0) || opt.max_iterations < 0)
      err << "invalid optimizer settings; ";
    if (!err.str().empty()) {
      throw std::invalid_argument("rate problem: " + err.str());
    }
  }
  tgrid.validate();

  const int dim = problem.unknowns();
  const double target_norm = std::sqrt(h1_norm_sq(grid, problem.target));

  auto misfit_sq = [&](const ControlPath& ctrl) {
    try {
      const FieldXd end =
          skeleton_terminal(ctrl, params, tgrid, spec, grid, initial);
      return h1_norm_sq(grid, end - problem.target);
    } catch (const BlowUpError&) {
      return kInf;
    }
  };
  auto objective = [&](const Eigen::VectorXd& c, double rho) {
    const auto ctrl = expand_control(c, problem.control_modes,
                                     problem.control_steps, tgrid);
    return rate_cost(ctrl) + rho * misfit_sq(ctrl);
  };
  auto gradient_at = [&](const Eigen::VectorXd& c, double rho, double f0) {
    std::vector<double> plus(dim), minus(dim);
    parallel_for(2 * dim, opt.threads, [&](int task) {
      const int i = task / 2;
      Eigen::VectorXd probe = c;
      probe(i) += (task % 2 == 0 ? 1.0 : -1.0) * opt.fd_bump;
      (task % 2 == 0 ? plus : minus)[i] = objective(probe, rho);
    });
    Eigen::VectorXd g(dim);
    for (int i = 0; i < dim; ++i) {
      const bool fp = std::isfinite(plus[i]), fm = std::isfinite(minus[i]);
      if (fp && fm) {
        g(i) = (plus[i] - minus[i]) / (2.0 * opt.fd_bump);
      } else if (fp) {
        g(i) = (plus[i] - f0) / opt.fd_bump;
      } else if (fm) {
        g(i) = (f0 - minus[i]) / opt.fd_bump;
      } else {
        g(i) = 0.0;
      }
    }
    return g;
  };

  RateEstimate est;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  bool stationary = false;
  double rho = problem.penalty;
  for (int phase = 0; phase <= opt.continuation_phases; ++phase) {
    if (phase > 0) rho *= opt.continuation_factor;
    stationary = false;
    double f = objective(c, rho);
    Eigen::VectorXd prev_c, prev_g;
    double alpha = opt.step_size;
    for (int it = 0; it < opt.max_iterations; ++it) {
      const Eigen::VectorXd g = gradient_at(c, rho, f);
      const double gn = g.norm();
      if (gn <= opt.tolerance) {
        stationary = true;
        break;
      }
      // Barzilai-Borwein step, safeguarded by Armijo backtracking.
      if (prev_c.size()) {
        const Eigen::VectorXd s = c - prev_c;
        const Eigen::VectorXd y = g - prev_g;
        const double sy = s.dot(y);
        alpha = sy > 0 ? s.squaredNorm() / sy : 2.0 * alpha;
      } else {
        alpha = opt.step_size / std::max(1.0, gn);
      }
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        const Eigen::VectorXd trial = c - alpha * g;
        const double ft = objective(trial, rho);
        if (std::isfinite(ft) && ft <= f - 1e-4 * alpha * gn * gn) {
          prev_c = c;
          prev_g = g;
          c = trial;
          f = ft;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      ++est.iterations;
      est.objective_history.push_back(f);
    }
  }

  est.control = expand_control(c, problem.control_modes, problem.control_steps,
                               tgrid);
  est.cost = rate_cost(est.control);
  const double msq = misfit_sq(est.control);
  est.misfit = std::sqrt(msq);
  const double reach = opt.misfit_tolerance * (target_norm > 0 ? target_norm : 1.0);
  est.converged = stationary && std::isfinite(msq) && est.misfit <= reach;
  return est;
}

void write_rate_json(std::ostream& os, const RateEstimate& est) {
  os.precision(17);
  os << "{\n  \"cost\": " << est.cost << ",\n  \"misfit\": " << est.misfit
     << ",\n  \"iterations\": " << est.iterations
     << ",\n  \"converged\": " << (est.converged ? "true" : "false") << "\n}\n";
}

std::vector<WeakConvergenceRow> weak_convergence_experiment(
    const ControlPath& h, const WeakConvergenceConfig& config,
    const CovarianceSpec& spec, const Grid& grid, const FieldXd& initial) {
  if (config.epsilons.empty() || config.samples < 1) {
    throw std::invalid_argument("weak convergence: need epsilons and samples");
  }
  for (double e : config.epsilons) {
    if (!(e >= 0 && e <= 1)) {
      throw std::invalid_argument("weak convergence: epsilon outside [0, 1]");
    }
  }
  ModelParams skel_params = config.params;
  skel_params.epsilon = 0.0;
  IntegrateOptions every;
  every.snapshot_stride = 1;
  every.control = &h;
  const auto skeleton = integrate(SystemKind::Skeleton, initial, skel_params,
                                  config.tgrid, spec, grid, every);

  const int n_eps = static_cast<int>(config.epsilons.size());
  const int total = n_eps * config.samples;
  std::vector<double> metric(total, 0.0);
  std::vector<char> ok(total, 0);
  parallel_for(total, config.threads, [&](int task) {
    const int ei = task / config.samples;
    const int m = task % config.samples;
    ModelParams p = config.params;
    p.epsilon = config.epsilons[ei];
    IntegrateOptions opt = every;
    opt.stream = StreamId{config.base_seed, std::uint32_t(ei), std::uint32_t(m)};
    try {
      const auto run = integrate(SystemKind::ControlledStochastic, initial, p,
                                 config.tgrid, spec, grid, opt);
      std::vector<FieldXd> diffs(run.snapshots.size());
      for (std::size_t n = 0; n < diffs.size(); ++n) {
        diffs[n] = run.snapshots[n] - skeleton.snapshots[n];
      }
      metric[task] = path_error_functional(grid, diffs, run.snapshot_steps,
                                           config.tgrid.dt(), p.nu1);
      ok[task] = 1;
    } catch (const BlowUpError&) {
      ok[task] = 0;
    }
  });

  std::vector<WeakConvergenceRow> rows;
  for (int ei = 0; ei < n_eps; ++ei) {
    std::vector<double> values;
    for (int m = 0; m < config.samples; ++m) {
      if (ok[ei * config.samples + m]) values.push_back(metric[ei * config.samples + m]);
    }
    const auto st = sample_stats(values);
    rows.push_back({config.epsilons[ei], st.mean, st.std_error, st.count,
                    config.samples - st.count});
  }
  return rows;
}

std::vector<CompactnessRow> compactness_probe(
    const ControlPath& h, const std::vector<int>& modes, double amplitude,
    int direction, const ModelParams& params, const TimeGrid& tgrid,
    const CovarianceSpec& spec, const Grid& grid, const FieldXd& initial) {
  if (direction < 0 || direction > 2) {
    throw std::invalid_argument("compactness probe: direction must be 0, 1 or 2");
  }
  if (h.steps() != tgrid.steps) {
    throw std::invalid_argument("compactness probe: control length mismatch");
  }
  ModelParams p = params;
  p.epsilon = 0.0;
  IntegrateOptions opt;
  opt.snapshot_stride = 1;
  opt.control = &h;
  const auto base = integrate(SystemKind::Skeleton, initial, p, tgrid, spec,
                              grid, opt);
  const double level = amplitude * std::sqrt(2.0 / tgrid.horizon);

  std::vector<CompactnessRow> rows;
  for (int k : modes) {
    if (k < 1 || k > spec.mode_count()) {
      throw std::invalid_argument("compactness probe: mode outside [1, K]");
    }
    ControlPath perturbed(tgrid.steps, tgrid.dt(),
                          std::max(k, h.mode_count()));
    for (int n = 0; n < tgrid.steps; ++n) {
      perturbed.at(n).topRows(h.mode_count()) = h.at(n);
      perturbed.at(n)(k - 1, direction) += level;
    }
    IntegrateOptions popt = opt;
    popt.control = &perturbed;
    const auto run = integrate(SystemKind::Skeleton, initial, p, tgrid, spec,
                               grid, popt);
    double sup = 0;
    for (std::size_t n = 0; n < run.snapshots.size(); ++n) {
      const FieldXd d = run.snapshots[n] - base.snapshots[n];
      sup = std::max(sup, grid.spacing() * gradient(grid, d).squaredNorm());
    }
    rows.push_back({k, sup});
  }
  return rows;
}

void write_weak_convergence_csv(std::ostream& os,
                                const std::vector<WeakConvergenceRow>& rows) {
  os << "epsilon,mean_metric,std_error,n_ok,n_failed\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.epsilon << ',' << r.mean_metric << ',' << r.std_error << ','
       << r.n_ok << ',' << r.n_failed << '\n';
  }
}

void write_compactness_csv(std::ostream& os,
                           const std::vector<CompactnessRow>& rows) {
  os << "mode,metric\n";
  os.precision(17);
  for (const auto& r : rows) os << r.mode << ',' << r.metric << '\n';
}

}  // namespace llb
