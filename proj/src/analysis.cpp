#include "llb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <numbers>
#include <stdexcept>

#include "llb/parallel.hpp"
#include "llb/rng.hpp"

namespace llb {

namespace {

constexpr double kExactTolerance = 1e-12;

double relative(double value, double scale) {
  return scale > 0 ? std::abs(value) / scale : std::abs(value);
}

/// Interior values with a zero ghost row on each side.
FieldXd padded(const FieldXd& u) {
  FieldXd out = FieldXd::Zero(u.rows() + 2, 3);
  out.middleRows(1, u.rows()) = u;
  return out;
}

}  // namespace

IdentityReport make_report(std::string name, double residual,
                           double tolerance) {
  return {std::move(name), residual, tolerance,
          std::abs(residual) <= tolerance};
}

std::vector<IdentityReport> check_identities(const Grid& grid,
                                             const FieldXd& u,
                                             const FieldXd& v,
                                             const std::optional<FieldXd>& w) {
  detail::require_on_grid(grid, u, "check_identities");
  detail::require_on_grid(grid, v, "check_identities");
  const FieldXd& third = w ? *w : u;
  detail::require_on_grid(grid, third, "check_identities");
  const double h = grid.spacing();

  std::vector<IdentityReport> out;

  // Scale: integral of |u||v|^2, the magnitude of the integrand's factors.
  const Eigen::ArrayXd u_abs = u.rowwise().norm().array();
  const Eigen::ArrayXd v_abs = v.rowwise().norm().array();
  const double uv = inner_l2(grid, cross(u, v), v);
  out.push_back(make_report("cross_orthogonality",
                            relative(uv, h * (u_abs * v_abs.square()).sum()),
                            kExactTolerance));

  const FieldXd lap_v = laplacian(grid, v);
  const double ulu = inner_l2(grid, cross(u, lap_v), u);
  const Eigen::ArrayXd lap_v_abs = lap_v.rowwise().norm().array();
  out.push_back(make_report(
      "precession_orthogonality",
      relative(ulu, h * (u_abs.square() * lap_v_abs).sum()), kExactTolerance));

  const FieldXd lap_w = laplacian(grid, third);
  const auto nu = norms(grid, u);
  const double lhs = std::abs(inner_l2(grid, cross(u, lap_v), lap_w));
  const double rhs = h * lap_w.squaredNorm() +
                     h * lap_v.squaredNorm() * nu.h1() * nu.h1();
  out.push_back(make_report("cross_laplacian_bound", std::max(0.0, lhs - rhs),
                            0.0));

  const double interp_rhs = 2.0 * nu.l2 * nu.h1();
  out.push_back(make_report("interpolation_inequality",
                            std::max(0.0, nu.linf * nu.linf - interp_rhs),
                            0.0));
  return out;
}

IdentityReport check_summation_by_parts(const Grid& grid, const FieldXd& f,
                                        const FieldXd& g) {
  const double lap_term = inner_l2(grid, laplacian(grid, f), g);
  const FieldXd gf = gradient(grid, f);
  const FieldXd gg = gradient(grid, g);
  const double grad_term = edge_inner(grid, gf, gg);
  const double scale =
      grid.spacing() * gf.cwiseAbs().cwiseProduct(gg.cwiseAbs()).sum();
  return make_report("summation_by_parts",
                     relative(lap_term + grad_term, scale), kExactTolerance);
}

double cubic_term(const Grid& grid, const FieldXd& u) {
  const FieldXd p = padded(u);
  const Eigen::Index e = grid.n_edges();
  const Eigen::ArrayXd sq = p.rowwise().squaredNorm().array();
  const Eigen::ArrayXd avg_sq = 0.5 * (sq.head(e) + sq.tail(e));
  const FieldXd grad = gradient(grid, u);
  const FieldXd ubar = 0.5 * (p.topRows(e) + p.bottomRows(e));
  const Eigen::ArrayXd directional = ubar.cwiseProduct(grad).rowwise().sum();
  return grid.spacing() *
         (avg_sq * grad.rowwise().squaredNorm().array() +
          2.0 * directional.square())
             .sum();
}

double cubic_term_scalar_form(const Grid& grid, const FieldXd& u) {
  const FieldXd p = padded(u);
  const Eigen::Index e = grid.n_edges();
  const Eigen::ArrayXd sq = p.rowwise().squaredNorm().array();
  const Eigen::ArrayXd avg_sq = 0.5 * (sq.head(e) + sq.tail(e));
  const FieldXd grad = gradient(grid, u);
  return 3.0 * grid.spacing() *
         (avg_sq * grad.rowwise().squaredNorm().array()).sum();
}

CubicIdentityReport check_cubic_identity(const Grid& grid, const FieldXd& u,
                                         double mu) {
  detail::require_on_grid(grid, u, "check_cubic_identity");
  const Eigen::ArrayXd factor = 1.0 + mu * u.rowwise().squaredNorm().array();
  const FieldXd weighted = (u.array().colwise() * factor).matrix();
  const double lhs = inner_l2(grid, weighted, laplacian(grid, u));
  const double grad_sq = grid.spacing() * gradient(grid, u).squaredNorm();
  const double cubic = mu * cubic_term(grid, u);
  const double scale = std::abs(lhs) + grad_sq + cubic;

  CubicIdentityReport out;
  out.vector_form = make_report("cubic_identity",
                                relative(lhs + grad_sq + cubic, scale),
                                kExactTolerance);
  out.scalar_form_residual =
      relative(lhs + grad_sq + mu * cubic_term_scalar_form(grid, u), scale);
  return out;
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> eps_metric) {
  if (eps_metric.size() < 3) {
    throw std::invalid_argument("fit_slope: need at least 3 points");
  }
  SlopeFit fit;
  for (const auto& [eps, metric] : eps_metric) {
    if (!(eps > 0) || !(metric > 0) || !std::isfinite(eps) ||
        !std::isfinite(metric)) {
      throw std::invalid_argument(
          "fit_slope: epsilons and metrics must be positive and finite");
    }
    fit.points.emplace_back(std::log(eps), std::log(metric));
  }
  const double n = double(fit.points.size());
  double mx = 0, my = 0;
  for (const auto& [x, y] : fit.points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_slope: epsilons coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (const auto& [x, y] : fit.points) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double energy_drift(const TrajectoryRecord& traj) {
  if (traj.kind != SystemKind::Deterministic) {
    throw std::invalid_argument(
        "energy_drift: only deterministic trajectories carry the energy "
        "balance");
  }
  if (!traj.has_every_step()) {
    throw std::invalid_argument("energy_drift: trajectory must store every step");
  }
  const auto& p = traj.params;
  const double dt = traj.tgrid.dt();
  const double grad0 = traj.reports.front().h1_semi * traj.reports.front().h1_semi;
  double integral = 0;
  double drift = 0;
  for (int n = 1; n <= traj.tgrid.steps; ++n) {
    const auto& prev = traj.reports[n - 1];
    const double grad_prev = prev.h1_semi * prev.h1_semi;
    const double dissipation =
        2.0 * p.nu1 * prev.h2_semi * prev.h2_semi +
        2.0 * p.nu2 *
            (grad_prev + p.mu * cubic_term(traj.grid, traj.snapshots[n - 1]));
    integral += dt * dissipation;
    const double grad_n = traj.reports[n].h1_semi * traj.reports[n].h1_semi;
    drift = std::max(drift, std::abs(grad_n + integral - grad0));
  }
  return drift;
}

double path_error_functional(const Grid& grid, std::span<const FieldXd> diffs,
                             std::span<const int> steps, double dt,
                             double nu1) {
  if (diffs.size() != steps.size() || diffs.empty()) {
    throw std::invalid_argument("path_error_functional: size mismatch");
  }
  const double h = grid.spacing();
  double sup_grad = 0;
  double integral = 0;
  for (std::size_t n = 0; n < diffs.size(); ++n) {
    sup_grad = std::max(sup_grad, h * gradient(grid, diffs[n]).squaredNorm());
    if (n + 1 < diffs.size()) {
      const double width = dt * (steps[n + 1] - steps[n]);
      integral += width * h * laplacian(grid, diffs[n]).squaredNorm();
    }
  }
  return sup_grad + nu1 * integral;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleStats sample_stats(std::span<const double> values) {
  SampleStats st;
  st.count = static_cast<int>(values.size());
  if (values.empty()) return st;
  st.mean = pairwise_sum(values) / double(values.size());
  if (values.size() < 2) return st;
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(),
                 [&](double v) { return (v - st.mean) * (v - st.mean); });
  const double var = pairwise_sum(dev) / double(values.size() - 1);
  st.std_error = std::sqrt(var / double(values.size()));
  return st;
}

void write_identity_csv(std::ostream& os,
                        std::span<const IdentityReport> reports) {
  os << "name,residual,tolerance,passed\n";
  os.precision(17);
  for (const auto& r : reports) {
    os << r.name << ',' << r.residual << ',' << r.tolerance << ','
       << (r.passed ? "true" : "false") << '\n';
  }
}

namespace {

FieldXd suite_field(const Grid& grid, RngStream& rng) {
  const double scale = std::pow(10.0, std::floor(9.0 * rng.uniform()) - 4.0);
  FieldXd f = grid.zeros();
  if (rng.uniform() < 0.5) {
    for (Eigen::Index i = 0; i < f.rows(); ++i)
      for (int j = 0; j < 3; ++j) f(i, j) = rng.normal();
  } else {
    for (int j = 0; j < 3; ++j) {
      for (int k = 1; k <= 6; ++k) {
        const double c = rng.normal() / (k * k);
        for (Eigen::Index i = 0; i < f.rows(); ++i)
          f(i, j) += c * std::sin(k * std::numbers::pi * grid.node(i));
      }
    }
  }
  return scale * f;
}

}  // namespace

std::vector<IdentitySuiteRow> run_identity_suite(std::span<const int> grids,
                                                 int samples,
                                                 std::uint64_t seed,
                                                 int threads) {
  if (samples < 1) throw std::invalid_argument("identity suite: samples < 1");
  std::vector<IdentitySuiteRow> rows;
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const Grid grid(grids[gi]);
    std::vector<std::vector<IdentityReport>> results(samples);
    parallel_for(samples, threads, [&](int t) {
      RngStream rng(seed, std::uint32_t(gi), std::uint32_t(t));
      const FieldXd u = suite_field(grid, rng);
      const FieldXd v = suite_field(grid, rng);
      const FieldXd w = suite_field(grid, rng);
      auto reps = check_identities(grid, u, v, w);
      reps.push_back(check_summation_by_parts(grid, u, v));
      reps.push_back(check_cubic_identity(grid, u, 1.0).vector_form);
      results[t] = std::move(reps);
    });
    const std::size_t first = rows.size();
    for (const auto& r : results.front()) {
      rows.push_back({grids[gi], r.name, 0.0, r.tolerance, 0, samples});
    }
    for (const auto& reps : results) {
      for (std::size_t i = 0; i < reps.size(); ++i) {
        auto& row = rows[first + i];
        row.worst_residual = std::max(row.worst_residual, std::abs(reps[i].residual));
        if (!reps[i].passed) ++row.failures;
      }
    }
  }
  return rows;
}

void write_identity_suite_csv(std::ostream& os,
                              std::span<const IdentitySuiteRow> rows) {
  os << "n,name,worst_residual,tolerance,failures,trials\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.n << ',' << r.name << ',' << r.worst_residual << ',' << r.tolerance
       << ',' << r.failures << ',' << r.trials << '\n';
  }
}

}  // namespace llb
