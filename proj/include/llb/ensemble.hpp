// Independent stochastic paths per epsilon, summarized by the a priori
// quantity sup_t ||grad u_eps(t)||^2.

#ifndef LLB_ENSEMBLE_HPP
#define LLB_ENSEMBLE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "llb/dynamics.hpp"
#include "llb/noise.hpp"

namespace llb {

struct EnsembleConfig {
  std::vector<double> epsilons;
  int samples = 64;
  ModelParams params;
  TimeGrid tgrid{0.25, 2500};
  CovarianceSpec spec = make_covariance(8, 4.0);
  Grid grid{127};
  FieldXd initial;  // empty selects initial_profile(grid)
  std::uint64_t base_seed = 1;
  double linf_ceiling = 1e3;
  int threads = 1;
};

struct EnsembleRow {
  double epsilon = 0;
  double mean_sup_grad_sq = 0;
  double std_error = 0;
  double max_sup_grad_sq = 0;
  double mean_final_grad_sq = 0;  // ||grad u_eps(T)||^2
  int n_ok = 0;
  int n_failed = 0;
};

struct EnsembleReport {
  double deterministic_sup_grad_sq = 0;
  double deterministic_final_grad_sq = 0;
  std::vector<EnsembleRow> rows;
  std::vector<std::string> failures;
};

/// max over stored steps of ||grad u||^2.
double sup_grad_sq(const TrajectoryRecord& rec);

/// Path (ei, m) uses stream (base_seed, ei, m).
EnsembleReport run_ensemble(const EnsembleConfig& config);

/// Columns: epsilon, mean_sup_grad_sq, std_error, max_sup_grad_sq,
/// mean_final_grad_sq, n_ok, n_failed, deterministic_sup_grad_sq,
/// deterministic_final_grad_sq.
void write_ensemble_csv(std::ostream& os, const EnsembleReport& report);

}  // namespace llb

#endif  // LLB_ENSEMBLE_HPP
