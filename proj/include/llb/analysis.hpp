// Identity checkers, energy monitors and convergence-rate fitting.

#ifndef LLB_ANALYSIS_HPP
#define LLB_ANALYSIS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "llb/dynamics.hpp"
#include "llb/field.hpp"

namespace llb {

struct IdentityReport {
  std::string name;
  double residual = 0;
  double tolerance = 0;
  bool passed = true;
};

IdentityReport make_report(std::string name, double residual, double tolerance);

/// Residuals of (u x v, v) = 0 and (u x Lap v, u) = 0, each relative to the
/// magnitude of its integrand, plus the slack of
///   |(u x Lap v, Lap w)| <= ||Lap w||^2 + ||Lap v||^2 ||u||_{H^1}^2
/// and of the interpolation inequality ||u||_inf^2 <= 2 ||u|| ||u||_{H^1}.
/// w defaults to u.
std::vector<IdentityReport> check_identities(
    const Grid& grid, const FieldXd& u, const FieldXd& v,
    const std::optional<FieldXd>& w = std::nullopt);

/// Summation by parts (Lap f, g) + (grad f, grad g) = 0, relative.
IdentityReport check_summation_by_parts(const Grid& grid, const FieldXd& f,
                                        const FieldXd& g);

/// mu-weighted cubic term sum_edges h [ avg|u|^2 |grad u|^2 + 2 (ubar.grad u)^2 ]
/// with arithmetic edge averages; zero ghost nodes at the boundary.
double cubic_term(const Grid& grid, const FieldXd& u);

/// Same with the coefficient 3 on avg|u|^2 |grad u|^2 and no directional term.
double cubic_term_scalar_form(const Grid& grid, const FieldXd& u);

struct CubicIdentityReport {
  IdentityReport vector_form;
  /// Residual of ((1+mu|u|^2)u, Lap u) + ||grad u||^2 + mu * cubic_term_scalar_form.
  double scalar_form_residual = 0;
};

/// ((1 + mu |u|^2) u, Lap u) = -||grad u||^2 - mu * cubic_term(u).
CubicIdentityReport check_cubic_identity(const Grid& grid, const FieldXd& u,
                                         double mu = 1.0);

struct SlopeFit {
  std::vector<std::pair<double, double>> points;  // (log eps, log metric)
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // RMS of the fit residuals
};

/// Least squares on (log eps, log metric); needs >= 3 positive points.
SlopeFit fit_slope(std::span<const std::pair<double, double>> eps_metric);

/// max_t | ||grad u(t)||^2 + int_0^t [2 nu1 ||Lap u||^2
///          + 2 nu2 (||grad u||^2 + mu cubic_term)] ds - ||grad u(0)||^2 |
/// with left-endpoint quadrature. Deterministic trajectories only.
double energy_drift(const TrajectoryRecord& traj);

/// sup_t ||grad d||^2 + nu1 int_0^T ||Lap d||^2 dt over a sequence of
/// snapshots at the given steps (left-endpoint rectangle rule).
double path_error_functional(const Grid& grid, std::span<const FieldXd> diffs,
                             std::span<const int> steps, double dt, double nu1);

/// Pairwise (cascade) summation; result depends only on the input order.
double pairwise_sum(std::span<const double> values);

struct SampleStats {
  double mean = 0;
  double std_error = 0;
  int count = 0;
};

SampleStats sample_stats(std::span<const double> values);

void write_identity_csv(std::ostream& os,
                        std::span<const IdentityReport> reports);

/// Worst case of one identity over a batch of random fields on one grid.
struct IdentitySuiteRow {
  int n = 0;
  std::string name;
  double worst_residual = 0;
  double tolerance = 0;
  int failures = 0;
  int trials = 0;
};

/// Every exact identity and inequality on `samples` random fields per grid.
/// Fields mix sine modes and white noise at magnitudes 1e-4 .. 1e4, drawn from
/// streams (seed, grid index, trial), so the result is thread independent.
std::vector<IdentitySuiteRow> run_identity_suite(std::span<const int> grids,
                                                 int samples,
                                                 std::uint64_t seed,
                                                 int threads = 1);

/// Columns: n, name, worst_residual, tolerance, failures, trials.
void write_identity_suite_csv(std::ostream& os,
                              std::span<const IdentitySuiteRow> rows);

}  // namespace llb

#endif  // LLB_ANALYSIS_HPP
