#include "llb/clt.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "llb/parallel.hpp"

namespace llb {

void CltConfig::validate() const {
  std::ostringstream err;
  if (epsilons.empty()) err << "epsilons must not be empty; ";
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0 && epsilons[i] <= 1)) {
      err << "epsilon " << epsilons[i] << " outside (0, 1]; ";
    }
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      err << "epsilons must be strictly decreasing; ";
    }
  }
  if (samples < 2) err << "samples must be >= 2; ";
  if (threads < 1) err << "threads must be >= 1; ";
  if (!err.str().empty()) throw std::invalid_argument("clt config: " + err.str());
  params.validate();
  tgrid.validate();
}

TrajectoryRecord deviation_process(const TrajectoryRecord& u_eps,
                                   const TrajectoryRecord& u0,
                                   double epsilon) {
  if (!(epsilon > 0)) {
    throw std::invalid_argument("deviation_process: epsilon must be > 0");
  }
  if (!(u_eps.grid == u0.grid) || u_eps.tgrid.steps != u0.tgrid.steps ||
      u_eps.tgrid.horizon != u0.tgrid.horizon ||
      u_eps.snapshot_steps != u0.snapshot_steps) {
    throw std::invalid_argument("deviation_process: grid or time mismatch");
  }
  TrajectoryRecord out = u_eps;
  out.reports.clear();
  const double scale = 1.0 / std::sqrt(epsilon);
  for (std::size_t n = 0; n < out.snapshots.size(); ++n) {
    out.snapshots[n] = (u_eps.snapshots[n] - u0.snapshots[n]) * scale;
    out.reports.push_back(norms(out.grid, out.snapshots[n],
                                out.tgrid.time(out.snapshot_steps[n])));
  }
  return out;
}

namespace {

struct SampleOutcome {
  double error = 0;
  bool ok = false;
  bool coupled = true;
  std::string failure;
};

}  // namespace

CltReport run_clt(const CltConfig& config) {
  config.validate();
  const Grid& grid = config.grid;
  const FieldXd initial =
      config.initial.size() ? config.initial : initial_profile(grid);

  ModelParams det_params = config.params;
  det_params.epsilon = 0.0;
  IntegrateOptions every_step;
  every_step.snapshot_stride = 1;
  const TrajectoryRecord base =
      integrate(SystemKind::Deterministic, initial, det_params, config.tgrid,
                config.spec, grid, every_step);

  const int n_eps = static_cast<int>(config.epsilons.size());
  const int total = n_eps * config.samples;
  std::vector<SampleOutcome> outcomes(total);

  parallel_for(total, config.threads, [&](int task) {
    const int ei = task / config.samples;
    const int m = task % config.samples;
    const double eps = config.epsilons[ei];
    SampleOutcome& out = outcomes[task];

    RngStream rng(config.base_seed, std::uint32_t(ei), std::uint32_t(m));
    const NoisePath path =
        draw_noise_path(config.spec, config.tgrid.dt(), config.tgrid.steps, rng);

    ModelParams p = config.params;
    p.epsilon = eps;
    IntegrateOptions sto = every_step;
    sto.noise = &path;
    IntegrateOptions lin = every_step;
    lin.noise = &path;
    lin.base = &base;
    try {
      const auto u_eps = integrate(SystemKind::Stochastic, initial, p,
                                   config.tgrid, config.spec, grid, sto);
      const auto v0 = integrate(SystemKind::LinearizedCLT, initial, det_params,
                                config.tgrid, config.spec, grid, lin);
      out.coupled = u_eps.noise_digest == path.digest() &&
                    v0.noise_digest == path.digest();
      const auto v_eps = deviation_process(u_eps, base, eps);
      std::vector<FieldXd> diffs(v_eps.snapshots.size());
      for (std::size_t n = 0; n < diffs.size(); ++n) {
        diffs[n] = v_eps.snapshots[n] - v0.snapshots[n];
      }
      out.error = path_error_functional(grid, diffs, v_eps.snapshot_steps,
                                        config.tgrid.dt(), config.params.nu1);
      out.ok = true;
    } catch (const BlowUpError& e) {
      std::ostringstream msg;
      msg << "(" << ei << ", " << m << "): " << e.what();
      out.failure = msg.str();
    }
  });

  CltReport report;
  std::vector<std::pair<double, double>> points;
  for (int ei = 0; ei < n_eps; ++ei) {
    std::vector<double> errors;
    CltRow row;
    row.epsilon = config.epsilons[ei];
    for (int m = 0; m < config.samples; ++m) {
      const auto& o = outcomes[ei * config.samples + m];
      report.coupling_verified = report.coupling_verified && o.coupled;
      if (o.ok) {
        errors.push_back(o.error);
      } else {
        report.failures.push_back(o.failure);
      }
    }
    const auto st = sample_stats(errors);
    row.mean_error = st.mean;
    row.std_error = st.std_error;
    row.n_ok = st.count;
    row.n_failed = config.samples - st.count;
    if (row.n_ok > 0 && row.mean_error > 0) {
      points.emplace_back(row.epsilon, row.mean_error);
    }
    report.rows.push_back(row);
  }
  if (points.size() >= 3) report.fit = fit_slope(points);
  return report;
}

void write_clt_csv(std::ostream& os, const CltReport& report) {
  os << "epsilon,mean_error,std_error,n_ok,n_failed\n";
  os.precision(17);
  for (const auto& r : report.rows) {
    os << r.epsilon << ',' << r.mean_error << ',' << r.std_error << ','
       << r.n_ok << ',' << r.n_failed << '\n';
  }
}

}  // namespace llb
