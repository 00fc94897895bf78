#include "llb/ensemble.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "llb/analysis.hpp"
#include "llb/parallel.hpp"

namespace llb {

double sup_grad_sq(const TrajectoryRecord& rec) {
  double sup = 0;
  for (const auto& r : rec.reports) sup = std::max(sup, r.h1_semi * r.h1_semi);
  return sup;
}

EnsembleReport run_ensemble(const EnsembleConfig& config) {
  if (config.epsilons.empty() || config.samples < 1) {
    throw std::invalid_argument("ensemble: need epsilons and samples >= 1");
  }
  const FieldXd initial =
      config.initial.size() ? config.initial : initial_profile(config.grid);
  ModelParams det = config.params;
  det.epsilon = 0;
  IntegrateOptions base_opt;
  base_opt.linf_ceiling = config.linf_ceiling;
  base_opt.snapshot_stride = config.tgrid.steps;

  EnsembleReport report;
  const auto base = integrate(SystemKind::Deterministic, initial, det,
                              config.tgrid, config.spec, config.grid, base_opt);
  report.deterministic_sup_grad_sq = sup_grad_sq(base);
  report.deterministic_final_grad_sq =
      base.reports.back().h1_semi * base.reports.back().h1_semi;

  const int n_eps = static_cast<int>(config.epsilons.size());
  const int total = n_eps * config.samples;
  std::vector<double> sup(total, 0.0), final_sq(total, 0.0);
  std::vector<std::string> failure(total);
  std::vector<char> ok(total, 0);
  parallel_for(total, config.threads, [&](int task) {
    const int ei = task / config.samples;
    const int m = task % config.samples;
    ModelParams p = config.params;
    p.epsilon = config.epsilons[ei];
    IntegrateOptions opt = base_opt;
    opt.stream = StreamId{config.base_seed, std::uint32_t(ei), std::uint32_t(m)};
    try {
      const auto rec = integrate(SystemKind::Stochastic, initial, p,
                                 config.tgrid, config.spec, config.grid, opt);
      sup[task] = sup_grad_sq(rec);
      final_sq[task] = rec.reports.back().h1_semi * rec.reports.back().h1_semi;
      ok[task] = 1;
    } catch (const BlowUpError& e) {
      std::ostringstream msg;
      msg << "(" << ei << ", " << m << "): " << e.what();
      failure[task] = msg.str();
    }
  });

  for (int ei = 0; ei < n_eps; ++ei) {
    std::vector<double> values, finals;
    EnsembleRow row;
    row.epsilon = config.epsilons[ei];
    for (int m = 0; m < config.samples; ++m) {
      const int t = ei * config.samples + m;
      if (ok[t]) {
        values.push_back(sup[t]);
        finals.push_back(final_sq[t]);
        row.max_sup_grad_sq = std::max(row.max_sup_grad_sq, sup[t]);
      } else {
        report.failures.push_back(failure[t]);
      }
    }
    const auto st = sample_stats(values);
    row.mean_sup_grad_sq = st.mean;
    row.std_error = st.std_error;
    row.mean_final_grad_sq = sample_stats(finals).mean;
    row.n_ok = st.count;
    row.n_failed = config.samples - st.count;
    report.rows.push_back(row);
  }
  return report;
}

void write_ensemble_csv(std::ostream& os, const EnsembleReport& report) {
  os << "epsilon,mean_sup_grad_sq,std_error,max_sup_grad_sq,mean_final_grad_sq,"
        "n_ok,n_failed,deterministic_sup_grad_sq,deterministic_final_grad_sq\n";
  os.precision(17);
  for (const auto& r : report.rows) {
    os << r.epsilon << ',' << r.mean_sup_grad_sq << ',' << r.std_error << ','
       << r.max_sup_grad_sq << ',' << r.mean_final_grad_sq << ',' << r.n_ok
       << ',' << r.n_failed << ',' << report.deterministic_sup_grad_sq << ','
       << report.deterministic_final_grad_sq << '\n';
  }
}

}  // namespace llb
