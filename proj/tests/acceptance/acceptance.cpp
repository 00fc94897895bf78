// Acceptance gate: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "llb/analysis.hpp"
#include "llb/clt.hpp"
#include "llb/ensemble.hpp"
#include "llb/ldp.hpp"
#include "llb/parallel.hpp"
#include "llb/runner.hpp"

using namespace llb;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

// Tolerances.
constexpr double kIdentityTol = 1e-12;
constexpr double kIdentitySeconds = 10.0;
constexpr double kHeatTol = 1e-3;
constexpr double kHeatRatio = 1.7;
constexpr double kHeatSeconds = 5.0;
constexpr double kBernoulliTol = 1e-6;
constexpr double kBoundFactor = 3.0;
constexpr double kCltSlope = 0.7;
constexpr double kCltSeconds = 600.0;
constexpr double kRateZeroCost = 1e-3;
constexpr double kRateZeroMisfit = 1e-3;
constexpr double kRateCostFactor = 1.05;
constexpr double kRateMisfitFraction = 1e-2;
constexpr double kRateSeconds = 300.0;
constexpr int kRateMaxUnknowns = 100;

// Shared default experiment.
constexpr int kN = 127;
constexpr int kK = 8;
const TimeGrid kTime{0.25, 2500};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int threads() { return default_thread_count(); }

FieldXd mode_field(const Grid& g, int k, int comp, double amp = 1.0) {
  FieldXd f = g.zeros();
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    f(i, comp) = amp * std::sin(k * pi * g.node(i));
  return f;
}

ControlPath constant_control(const TimeGrid& tg, int mode, int dir, double c) {
  ControlPath h(tg.steps, tg.dt(), mode);
  for (int n = 0; n < tg.steps; ++n) h.at(n)(mode - 1, dir) = c;
  return h;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome identities() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> grids = {31, 127, 255};
  const auto rows = run_identity_suite(grids, 1000, 20240601, 1);
  const double secs = seconds_since(t0);
  double worst_exact = 0;
  int failures = 0;
  for (const auto& r : rows) {
    failures += r.failures;
    if (r.tolerance > 0) {
      worst_exact = std::max(worst_exact, r.worst_residual);
    }
  }
  return {failures == 0 && worst_exact <= kIdentityTol && secs < kIdentitySeconds,
          fmt("1000 field triples x 3 grids, %zu checks, failures %d, worst exact "
              "residual %.2e (tol %.0e), %.2f s (limit %.0f)",
              rows.size(), failures, worst_exact, kIdentityTol, secs, kIdentitySeconds)};
}

double heat_error(int n, double dt) {
  const Grid g(n);
  ModelParams p;
  p.gamma = 0;
  p.nu2 = 0;
  const TimeGrid tg{0.1, int(std::lround(0.1 / dt))};
  IntegrateOptions opt;
  opt.snapshot_stride = tg.steps;
  const auto rec = integrate(SystemKind::Deterministic, mode_field(g, 1, 0), p, tg,
                             make_covariance(1), g, opt);
  const FieldXd exact = std::exp(-pi * pi * 0.1) * mode_field(g, 1, 0);
  return (rec.final_state() - exact).cwiseAbs().maxCoeff();
}

Outcome heat() {
  const auto t0 = std::chrono::steady_clock::now();
  const double e1 = heat_error(255, 1e-4);
  const double secs = seconds_since(t0);
  const double e2 = heat_error(511, 5e-5);
  const double ratio = e1 / e2;
  return {e1 <= kHeatTol && ratio >= kHeatRatio && secs < kHeatSeconds,
          fmt("max error %.3e (tol %.0e), refinement ratio %.3f (min %.1f), %.2f s",
              e1, kHeatTol, ratio, kHeatRatio, secs)};
}

double bernoulli(double r0, double nu2, double mu, double t) {
  const double e = std::exp(-2.0 * nu2 * t);
  return r0 * e / (1.0 + mu * r0 * (1.0 - e));
}

Outcome cubic_ode() {
  // The closed form is cross-checked against RK4 before it is trusted.
  auto rk4 = [](double r, double t, int steps) {
    auto f = [](double x) { return -2.0 * x - 2.0 * x * x; };
    const double dt = t / steps;
    for (int i = 0; i < steps; ++i) {
      const double k1 = f(r), k2 = f(r + 0.5 * dt * k1), k3 = f(r + 0.5 * dt * k2),
                   k4 = f(r + dt * k3);
      r += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return r;
  };
  double oracle_gap = 0;
  for (double r0 : {0.01, 0.25, 1.0}) {
    oracle_gap = std::max(oracle_gap, std::abs(rk4(r0, 0.05, 20000) - bernoulli(r0, 1, 1, 0.05)));
  }

  const Grid g(kN);
  ModelParams p;
  p.gamma = 0;
  const TimeGrid tg{0.05, 5000};  // dt = 1e-5
  IntegrateOptions opt;
  opt.hooks.implicit_diffusion = false;
  opt.snapshot_stride = 500;
  const FieldXd u0 = initial_profile(g, 0.5, 0.3);
  const auto rec = integrate(SystemKind::Deterministic, u0, p, tg, make_covariance(kK),
                             g, opt);
  double err = 0;
  for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
    const double t = tg.time(rec.snapshot_steps[s]);
    for (Eigen::Index i = 0; i < u0.rows(); ++i) {
      const double r = bernoulli(u0.row(i).squaredNorm(), p.nu2, p.mu, t);
      err = std::max(err, std::abs(rec.snapshots[s].row(i).squaredNorm() - r));
    }
  }
  return {err <= kBernoulliTol && oracle_gap <= 1e-12,
          fmt("max | |u|^2 - closed form | = %.3e over t <= 0.05 at dt = 1e-5 (tol %.0e); "
              "closed form vs RK4 %.1e",
              err, kBernoulliTol, oracle_gap)};
}

Outcome degeneration() {
  const Grid g(kN);
  const auto spec = make_covariance(kK);
  const FieldXd u0 = initial_profile(g);
  IntegrateOptions every;
  every.snapshot_stride = 1;
  const ModelParams p;
  const auto det = integrate(SystemKind::Deterministic, u0, p, kTime, spec, g, every);

  IntegrateOptions sto = every;
  sto.stream = StreamId{7, 0, 0};
  const auto s0 = integrate(SystemKind::Stochastic, u0, p, kTime, spec, g, sto);
  const ControlPath zero(kTime.steps, kTime.dt(), kK);
  IntegrateOptions sk = every;
  sk.control = &zero;
  const auto h0 = integrate(SystemKind::Skeleton, u0, p, kTime, spec, g, sk);

  auto identical = [&](const TrajectoryRecord& r) {
    if (r.snapshots.size() != det.snapshots.size()) return false;
    for (std::size_t n = 0; n < r.snapshots.size(); ++n) {
      if (!(r.snapshots[n].array() == det.snapshots[n].array()).all()) return false;
    }
    return true;
  };
  const bool a = identical(s0), b = identical(h0);
  return {a && b, fmt("Stochastic(eps=0) %s, Skeleton(h=0) %s over %d steps",
                      a ? "bit-identical" : "DIFFERS", b ? "bit-identical" : "DIFFERS",
                      kTime.steps)};
}

Outcome a_priori_bound() {
  EnsembleConfig c;
  c.epsilons = {1e-1, 1e-2};
  c.samples = 64;
  c.tgrid = kTime;
  c.spec = make_covariance(kK);
  c.grid = Grid(kN);
  c.base_seed = 3;
  c.threads = threads();
  const auto rep = run_ensemble(c);
  bool ok = rep.failures.empty();
  std::string detail = fmt("deterministic sup|grad u|^2 = %.4f (at T: %.4f)",
                           rep.deterministic_sup_grad_sq, rep.deterministic_final_grad_sq);
  for (const auto& r : rep.rows) {
    const double ratio = r.mean_sup_grad_sq / rep.deterministic_sup_grad_sq;
    ok = ok && r.n_failed == 0 && ratio <= kBoundFactor;
    detail += fmt("; eps %.0e: mean %.4f (x%.3f, max x%.1f), at T %.4f, blow-ups %d",
                  r.epsilon, r.mean_sup_grad_sq, ratio, kBoundFactor,
                  r.mean_final_grad_sq, r.n_failed);
  }
  return {ok, detail};
}

Outcome clt() {
  const auto t0 = std::chrono::steady_clock::now();
  CltConfig c;
  c.epsilons = {1e-1, 1e-2, 1e-3};
  c.samples = 64;
  c.tgrid = kTime;
  c.spec = make_covariance(kK);
  c.grid = Grid(kN);
  c.base_seed = 2024;
  c.threads = threads();
  const auto rep = run_clt(c);
  const double secs = seconds_since(t0);
  bool decreasing = true;
  std::string detail;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    detail += fmt("e(%.0e) = %.3e +- %.1e; ", r.epsilon, r.mean_error, r.std_error);
    if (i > 0) {
      const auto& q = rep.rows[i - 1];
      const double pooled = std::hypot(q.std_error, r.std_error);
      decreasing = decreasing && r.mean_error < q.mean_error;
      detail += fmt("drop %.1f pooled SE; ", (q.mean_error - r.mean_error) / pooled);
    }
  }
  const double slope = rep.fit ? rep.fit->slope : 0.0;
  const bool ok = decreasing && rep.fit && slope >= kCltSlope && rep.failures.empty() &&
                  rep.coupling_verified && secs <= kCltSeconds;
  return {ok, detail + fmt("slope %.3f (min %.1f), fit rms %.3f, coupling %s, %.1f s",
                           slope, kCltSlope, rep.fit ? rep.fit->residual : 0.0,
                           rep.coupling_verified ? "verified" : "BROKEN", secs)};
}

Outcome weak_convergence() {
  const Grid g(kN);
  const auto spec = make_covariance(kK);
  const auto h = constant_control(kTime, 1, 2, 1.0);
  WeakConvergenceConfig wc;
  wc.epsilons = {1e-1, 1e-2, 1e-3};
  wc.samples = 32;
  wc.tgrid = kTime;
  wc.base_seed = 7;
  wc.threads = threads();
  const auto rows = weak_convergence_experiment(h, wc, spec, g, initial_profile(g));
  bool ok = true;
  std::string detail = "h = 1 in mode 1, direction 3; ";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail += fmt("eps %.0e: %.3e (failed %d); ", rows[i].epsilon, rows[i].mean_metric,
                  rows[i].n_failed);
    ok = ok && rows[i].n_failed == 0;
    if (i > 0) ok = ok && rows[i].mean_metric < rows[i - 1].mean_metric;
  }
  return {ok, detail + (ok ? "strictly decreasing" : "NOT strictly decreasing")};
}

Outcome rate() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g(63);
  const auto spec = make_covariance(kK);
  const ModelParams p;
  const TimeGrid tg{0.1, 400};
  const FieldXd u0 = initial_profile(g);
  RateProblem rp;
  rp.control_modes = 2;
  rp.control_steps = 4;
  rp.optimizer.threads = threads();

  rp.target = skeleton_terminal(ControlPath(tg.steps, tg.dt(), 1), p, tg, spec, g, u0);
  const auto a = estimate_rate(rp, p, tg, spec, g, u0);
  const bool ok_a = a.cost <= kRateZeroCost && a.misfit <= kRateZeroMisfit;

  const auto h_star = constant_control(tg, 1, 2, 0.5);
  rp.target = skeleton_terminal(h_star, p, tg, spec, g, u0);
  const auto b = estimate_rate(rp, p, tg, spec, g, u0);
  const double ref = rate_cost(h_star);
  const double target_norm = norms(g, rp.target).h1();
  const bool ok_b = b.cost <= kRateCostFactor * ref &&
                    b.misfit <= kRateMisfitFraction * target_norm && b.converged;
  const double secs = seconds_since(t0);
  return {ok_a && ok_b && rp.unknowns() <= kRateMaxUnknowns && secs <= kRateSeconds,
          fmt("(a) cost %.2e, misfit %.2e; (b) cost %.6f vs h* %.6f (ratio %.4f, max %.2f), "
              "misfit %.2e vs %.2e allowed, converged %s; %d unknowns, %.1f s",
              a.cost, a.misfit, b.cost, ref, b.cost / ref, kRateCostFactor, b.misfit,
              kRateMisfitFraction * target_norm, b.converged ? "yes" : "no",
              rp.unknowns(), secs)};
}

Outcome compactness() {
  const Grid g(kN);
  const auto spec = make_covariance(kK);
  const auto h = constant_control(kTime, 1, 2, 1.0);
  const auto rows = compactness_probe(h, {2, 4, 8}, 1.0, 0, ModelParams{}, kTime, spec, g,
                                      initial_profile(g));
  bool ok = true;
  std::string detail = "unit-cost oscillation, direction 1; ";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail += fmt("k=%d: %.3e; ", rows[i].mode, rows[i].metric);
    if (i > 0) ok = ok && rows[i].metric < rows[i - 1].metric;
  }
  return {ok, detail + (ok ? "strictly decreasing" : "NOT strictly decreasing")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome reproducibility() {
  const std::string common =
      "[grid]\nn = 63\n[time]\nT = 0.1\nN = 500\n[seeds]\nbase_seed = 5\n";
  const std::vector<std::string> docs = {
      "kind = validate\n[validate]\nsamples = 200\n",
      "kind = deterministic\n[run]\nwrite_snapshots = true\nsnapshot_stride = 50\n",
      "kind = stochastic-ensemble\n[sampling]\nsamples = 16\n",
      "kind = clt\n[sampling]\nsamples = 16\n",
      "kind = weak-convergence\n[sampling]\nsamples = 16\n[control]\ncoefficient = 1\n",
      "kind = rate\n[rate]\ntarget = control\ncontrol_modes = 2\ncontrol_steps = 4\n"
      "[control]\ncoefficient = 0.5\n",
      "kind = compactness\n[control]\ncoefficient = 1\n",
  };
  const fs::path root = fs::temp_directory_path() / "llb_acceptance_repro";
  fs::remove_all(root);
  int compared = 0;
  std::string mismatches;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto config = parse_config(docs[d] + common);
    std::vector<fs::path> dirs;
    int reference_code = -1;
    for (int t : {1, 4, 1}) {
      const fs::path dir = root / (std::to_string(d) + "_" + std::to_string(dirs.size()));
      RunOptions opt;
      opt.output = dir;
      opt.threads = t;
      const auto res = run(config, opt);
      if (reference_code < 0) reference_code = res.exit_code;
      if (res.exit_code != kExitOk) mismatches += to_string(config.kind) + std::string(" failed; ");
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      if (name == "manifest.json") continue;  // carries wall-clock time
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        ++compared;
        if (slurp(entry.path()) != slurp(dirs[k] / name)) {
          mismatches += to_string(config.kind) + std::string("/") + name.string() + "; ";
        }
      }
    }
  }
  fs::remove_all(root);
  return {mismatches.empty() && compared > 0,
          fmt("7 kinds run at 1, 4 and 1 threads; %d file pairs compared", compared) +
              (mismatches.empty() ? ", all byte-identical" : ", mismatches: " + mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact identity suite", identities},
      {"heat oracle", heat},
      {"cubic ODE oracle", cubic_ode},
      {"zero-noise degeneration", degeneration},
      {"a priori boundedness", a_priori_bound},
      {"CLT rate", clt},
      {"weak convergence", weak_convergence},
      {"rate function", rate},
      {"compactness probe", compactness},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s  %s: %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
