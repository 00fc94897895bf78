// Central limit experiment: u_eps, u_0 and the linearized V_0 driven by the
// same noise path, with the error functional
//   E[ sup_t ||grad(V_eps - V_0)||^2 + nu1 int_0^T ||Lap(V_eps - V_0)||^2 dt ]
// estimated by a sample mean for a decreasing sequence of epsilons.

#ifndef LLB_CLT_HPP
#define LLB_CLT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "llb/analysis.hpp"
#include "llb/dynamics.hpp"
#include "llb/noise.hpp"

namespace llb {

struct CltConfig {
  std::vector<double> epsilons;
  int samples = 64;
  ModelParams params;  // epsilon is overridden per run
  TimeGrid tgrid{0.25, 2500};
  CovarianceSpec spec = make_covariance(8, 4.0);
  Grid grid{127};
  FieldXd initial;  // empty selects initial_profile(grid)
  std::uint64_t base_seed = 1;
  int threads = 1;

  void validate() const;
};

struct CltRow {
  double epsilon = 0;
  double mean_error = 0;
  double std_error = 0;
  int n_ok = 0;
  int n_failed = 0;
};

struct CltReport {
  std::vector<CltRow> rows;
  /// Present when at least three epsilons have a positive mean error.
  std::optional<SlopeFit> fit;
  /// One line per excluded sample: "(eps index, sample): message".
  std::vector<std::string> failures;
  /// Every u_eps / V_0 pair consumed bit-identical increments.
  bool coupling_verified = true;
};

/// Pointwise (u_eps - u_0) / sqrt(eps) at every stored step.
TrajectoryRecord deviation_process(const TrajectoryRecord& u_eps,
                                   const TrajectoryRecord& u0, double epsilon);

CltReport run_clt(const CltConfig& config);

/// Columns: epsilon, mean_error, std_error, n_ok, n_failed.
void write_clt_csv(std::ostream& os, const CltReport& report);

}  // namespace llb

#endif  // LLB_CLT_HPP
