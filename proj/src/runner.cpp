#include "llb/runner.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "llb/analysis.hpp"
#include "llb/clt.hpp"
#include "llb/ensemble.hpp"
#include "llb/io.hpp"
#include "llb/ldp.hpp"
#include "llb/parallel.hpp"

#ifndef LLB_VERSION
#define LLB_VERSION "unknown"
#endif

namespace llb {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

int resolve_threads(const ExperimentConfig& config, const RunOptions& options) {
  if (options.threads > 0) return options.threads;
  if (config.threads > 0) return config.threads;
  return default_thread_count();
}

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes plain files into one directory and remembers their digests.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }
  const std::vector<std::string>& files() const { return files_; }
  const std::vector<std::string>& digests() const { return digests_; }

  void prepare() {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) {
      throw IoError("cannot create output directory " + root_.generic_string());
    }
    for (const char* stale : {"manifest.json", "error.json"}) {
      fs::remove(root_ / stale, ec);
    }
  }

  void write(const std::string& name, const std::string& content) {
    // Flat names only, so nothing escapes the directory.
    if (name.empty() || name.find('/') != std::string::npos ||
        name.find('\\') != std::string::npos || name == "." || name == "..") {
      throw std::logic_error("output name must be a plain file name: " + name);
    }
    std::ofstream out(root_ / name, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw IoError("cannot write " + (root_ / name).generic_string());
    files_.push_back(name);
    digests_.push_back(sha256_hex(content));
  }

  template <typename Writer>
  void write_with(const std::string& name, Writer&& writer) {
    std::ostringstream os;
    writer(os);
    write(name, os.str());
  }

 private:
  fs::path root_;
  std::vector<std::string> files_;
  std::vector<std::string> digests_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json failures_json(const std::vector<std::string>& failures) {
  json out = json::array();
  for (const auto& f : failures) out.push_back(f);
  return out;
}

struct Context {
  const ExperimentConfig& config;
  int threads;
  Grid grid;
  CovarianceSpec spec;
  FieldXd initial;
  OutputDir& out;
};

ControlPath load_control(const ExperimentConfig& c, const CovarianceSpec& spec) {
  const int steps = c.tgrid.steps;
  const double dt = c.tgrid.dt();
  if (c.control_file.empty()) {
    ControlPath h(steps, dt, c.control_mode);
    for (int n = 0; n < steps; ++n) {
      h.at(n)(c.control_mode - 1, c.control_direction - 1) = c.control_coefficient;
    }
    return h;
  }
  std::ifstream in(c.control_file, std::ios::binary);
  if (!in) throw ConfigError({"control.file: cannot read " + c.control_file.generic_string()});
  ControlPath h;
  try {
    h = read_control_csv(in, steps, dt);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("control.file: ") + e.what()});
  }
  if (h.mode_count() > spec.mode_count()) {
    throw ConfigError({"control.file: uses more modes than noise.K"});
  }
  return h;
}

int run_validate(Context& ctx) {
  const auto& c = ctx.config;
  const auto rows =
      run_identity_suite(c.validate_grids, c.validate_samples, c.base_seed, ctx.threads);
  int failures = 0;
  for (const auto& r : rows) failures += r.failures;
  ctx.out.write_with("identities.csv",
                     [&](std::ostream& os) { write_identity_suite_csv(os, rows); });
  ctx.out.write("summary.json", dump({{"passed", failures == 0},
                                      {"failures", failures},
                                      {"checks", rows.size()}}));
  return failures == 0 ? kExitOk : kExitCheckFailed;
}

int run_deterministic(Context& ctx) {
  const auto& c = ctx.config;
  IntegrateOptions opt;
  opt.snapshot_stride = c.snapshot_stride;
  opt.linf_ceiling = c.linf_ceiling;
  const auto rec = integrate(SystemKind::Deterministic, ctx.initial, c.params,
                             c.tgrid, ctx.spec, ctx.grid, opt);
  ctx.out.write_with("trajectory.csv",
                     [&](std::ostream& os) { write_trajectory_csv(os, rec); });
  if (c.write_snapshots) {
    ctx.out.write_with("snapshots.csv",
                       [&](std::ostream& os) { write_snapshots_csv(os, rec); });
  }
  const auto& last = rec.reports.back();
  json summary = {{"max_precession_ratio", rec.max_precession_ratio},
                  {"final", {{"l2", last.l2},
                             {"h1_semi", last.h1_semi},
                             {"h2_semi", last.h2_semi},
                             {"linf", last.linf}}}};
  summary["energy_drift"] =
      rec.has_every_step() ? json(energy_drift(rec)) : json(nullptr);
  ctx.out.write("summary.json", dump(summary));
  return kExitOk;
}

int run_ensemble_kind(Context& ctx) {
  const auto& c = ctx.config;
  EnsembleConfig ec;
  ec.epsilons = c.epsilons;
  ec.samples = c.samples;
  ec.params = c.params;
  ec.tgrid = c.tgrid;
  ec.spec = ctx.spec;
  ec.grid = ctx.grid;
  ec.initial = ctx.initial;
  ec.base_seed = c.base_seed;
  ec.linf_ceiling = c.linf_ceiling;
  ec.threads = ctx.threads;
  const auto rep = run_ensemble(ec);
  ctx.out.write_with("ensemble.csv",
                     [&](std::ostream& os) { write_ensemble_csv(os, rep); });
  ctx.out.write("summary.json",
                dump({{"deterministic_sup_grad_sq", rep.deterministic_sup_grad_sq},
                      {"failures", failures_json(rep.failures)}}));
  return kExitOk;
}

int run_clt_kind(Context& ctx) {
  const auto& c = ctx.config;
  CltConfig cc;
  cc.epsilons = c.epsilons;
  cc.samples = c.samples;
  cc.params = c.params;
  cc.tgrid = c.tgrid;
  cc.spec = ctx.spec;
  cc.grid = ctx.grid;
  cc.initial = ctx.initial;
  cc.base_seed = c.base_seed;
  cc.threads = ctx.threads;
  const auto rep = run_clt(cc);
  ctx.out.write_with("clt_report.csv",
                     [&](std::ostream& os) { write_clt_csv(os, rep); });
  json summary = {{"coupling_verified", rep.coupling_verified},
                  {"failures", failures_json(rep.failures)}};
  if (rep.fit) {
    summary["slope"] = rep.fit->slope;
    summary["intercept"] = rep.fit->intercept;
    summary["residual"] = rep.fit->residual;
  } else {
    summary["slope"] = nullptr;
    summary["intercept"] = nullptr;
    summary["residual"] = nullptr;
  }
  ctx.out.write("summary.json", dump(summary));
  return kExitOk;
}

int run_weak_kind(Context& ctx) {
  const auto& c = ctx.config;
  const auto h = load_control(c, ctx.spec);
  WeakConvergenceConfig wc;
  wc.epsilons = c.epsilons;
  wc.samples = c.samples;
  wc.params = c.params;
  wc.tgrid = c.tgrid;
  wc.base_seed = c.base_seed;
  wc.threads = ctx.threads;
  const auto rows = weak_convergence_experiment(h, wc, ctx.spec, ctx.grid, ctx.initial);
  ctx.out.write_with("weak_convergence.csv", [&](std::ostream& os) {
    write_weak_convergence_csv(os, rows);
  });
  ctx.out.write("summary.json", dump({{"control_cost", rate_cost(h)}}));
  return kExitOk;
}

int run_rate_kind(Context& ctx) {
  const auto& c = ctx.config;
  RateProblem rp;
  rp.penalty = c.penalty;
  rp.control_modes = c.control_modes;
  rp.control_steps = c.control_steps;
  rp.optimizer = c.optimizer;
  rp.optimizer.threads = ctx.threads;

  json summary;
  switch (c.rate_target) {
    case RateTarget::Deterministic:
      rp.target = skeleton_terminal(ControlPath(c.tgrid.steps, c.tgrid.dt(), 1),
                                    c.params, c.tgrid, ctx.spec, ctx.grid, ctx.initial);
      summary["reference_cost"] = 0.0;
      break;
    case RateTarget::Control: {
      const auto h = load_control(c, ctx.spec);
      rp.target = skeleton_terminal(h, c.params, c.tgrid, ctx.spec, ctx.grid, ctx.initial);
      summary["reference_cost"] = rate_cost(h);
      break;
    }
    case RateTarget::File: {
      std::ifstream in(c.target_file, std::ios::binary);
      if (!in) throw ConfigError({"rate.target_file: cannot read " + c.target_file.generic_string()});
      try {
        rp.target = read_field_csv(in, ctx.grid);
      } catch (const std::exception& e) {
        throw ConfigError({std::string("rate.target_file: ") + e.what()});
      }
      summary["reference_cost"] = nullptr;
      break;
    }
  }
  const auto est = estimate_rate(rp, c.params, c.tgrid, ctx.spec, ctx.grid, ctx.initial);
  const FieldXd terminal =
      skeleton_terminal(est.control, c.params, c.tgrid, ctx.spec, ctx.grid, ctx.initial);
  ctx.out.write_with("rate.json", [&](std::ostream& os) { write_rate_json(os, est); });
  ctx.out.write_with("control.csv",
                     [&](std::ostream& os) { write_control_csv(os, est.control); });
  ctx.out.write_with("target.csv",
                     [&](std::ostream& os) { write_field_csv(os, rp.target); });
  ctx.out.write_with("terminal.csv",
                     [&](std::ostream& os) { write_field_csv(os, terminal); });
  ctx.out.write_with("objective.csv", [&](std::ostream& os) {
    os << "iteration,objective\n";
    os.precision(17);
    for (std::size_t i = 0; i < est.objective_history.size(); ++i) {
      os << i + 1 << ',' << est.objective_history[i] << '\n';
    }
  });
  summary["target_h1_norm"] = norms(ctx.grid, rp.target).h1();
  ctx.out.write("summary.json", dump(summary));
  return kExitOk;
}

int run_compactness_kind(Context& ctx) {
  const auto& c = ctx.config;
  const auto h = load_control(c, ctx.spec);
  const auto rows = compactness_probe(h, c.oscillation_modes, c.oscillation_amplitude,
                                      c.oscillation_direction - 1, c.params, c.tgrid,
                                      ctx.spec, ctx.grid, ctx.initial);
  ctx.out.write_with("compactness.csv",
                     [&](std::ostream& os) { write_compactness_csv(os, rows); });
  ctx.out.write("summary.json",
                dump({{"control_cost", rate_cost(h)},
                      {"perturbation_cost",
                       c.oscillation_amplitude * c.oscillation_amplitude}}));
  return kExitOk;
}

int dispatch(Context& ctx) {
  switch (ctx.config.kind) {
    case ExperimentKind::Validate: return run_validate(ctx);
    case ExperimentKind::Deterministic: return run_deterministic(ctx);
    case ExperimentKind::StochasticEnsemble: return run_ensemble_kind(ctx);
    case ExperimentKind::Clt: return run_clt_kind(ctx);
    case ExperimentKind::WeakConvergence: return run_weak_kind(ctx);
    case ExperimentKind::Rate: return run_rate_kind(ctx);
    case ExperimentKind::Compactness: return run_compactness_kind(ctx);
  }
  return kExitConfig;
}

const char* category(int code) {
  switch (code) {
    case kExitCheckFailed: return "check-failed";
    case kExitConfig: return "config";
    case kExitBlowUp: return "blow-up";
    case kExitIo: return "io";
  }
  return "ok";
}

json error_json(int code, const std::string& message,
                const std::vector<std::string>& details = {}) {
  json j = {{"status", "error"},
            {"exit_code", code},
            {"category", category(code)},
            {"message", message}};
  if (!details.empty()) j["details"] = details;
  return j;
}

void try_write_error(const fs::path& dir, const json& err) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "error.json", std::ios::binary | std::ios::trunc);
  if (out) out << dump(err);
}

}  // namespace

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.output = options.output.value_or(config.output);
  OutputDir out(result.output);
  const int threads = resolve_threads(config, options);

  json err;
  try {
    out.prepare();
    Context ctx{config,
                threads,
                Grid(config.n),
                make_covariance(config.noise_modes, config.noise_alpha),
                FieldXd(),
                out};
    ctx.initial = initial_profile(ctx.grid, config.initial_a, config.initial_b);
    result.exit_code = dispatch(ctx);
    if (result.exit_code != kExitOk) {
      result.message = "a validation check failed";
      out.write("error.json", dump(error_json(result.exit_code, result.message)));
    }
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfig;
    result.message = e.what();
    err = error_json(kExitConfig, e.what(), e.errors());
  } catch (const BlowUpError& e) {
    result.exit_code = kExitBlowUp;
    result.message = e.what();
    err = error_json(kExitBlowUp, e.what());
    err["step"] = e.step();
  } catch (const IoError& e) {
    result.exit_code = kExitIo;
    result.message = e.what();
    err = error_json(kExitIo, e.what());
  } catch (const std::invalid_argument& e) {
    result.exit_code = kExitConfig;
    result.message = e.what();
    err = error_json(kExitConfig, e.what());
  } catch (const std::exception& e) {
    result.exit_code = kExitIo;
    result.message = e.what();
    err = error_json(kExitIo, e.what());
  }
  if (!err.is_null()) {
    try_write_error(result.output, err);
    result.files = out.files();
    return result;
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json outputs = json::array();
  for (std::size_t i = 0; i < out.files().size(); ++i) {
    outputs.push_back({{"file", out.files()[i]}, {"sha256", out.digests()[i]}});
  }
  json manifest = {{"artifact", "llb_lab"},
                   {"version", LLB_VERSION},
                   {"kind", to_string(config.kind)},
                   {"status", result.exit_code == kExitOk ? "ok" : "error"},
                   {"exit_code", result.exit_code},
                   {"threads", threads},
                   {"wall_clock_seconds", seconds},
                   {"config", format_config(config)},
                   {"outputs", outputs}};
  try {
    out.write("manifest.json", dump(manifest));
  } catch (const IoError& e) {
    result.exit_code = kExitIo;
    result.message = e.what();
  }
  result.files = out.files();
  return result;
}

RunResult run_file(const fs::path& config_path, const RunOptions& options) {
  try {
    return run(load_config(config_path), options);
  } catch (const ConfigError& e) {
    RunResult result;
    result.exit_code = kExitConfig;
    result.message = e.what();
    if (options.output) {
      result.output = *options.output;
      try_write_error(*options.output, error_json(kExitConfig, e.what(), e.errors()));
    }
    return result;
  }
}

}  // namespace llb
