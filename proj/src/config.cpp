#include "llb/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace llb {

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Validate: return "validate";
    case ExperimentKind::Deterministic: return "deterministic";
    case ExperimentKind::StochasticEnsemble: return "stochastic-ensemble";
    case ExperimentKind::Clt: return "clt";
    case ExperimentKind::WeakConvergence: return "weak-convergence";
    case ExperimentKind::Rate: return "rate";
    case ExperimentKind::Compactness: return "compactness";
  }
  return "unknown";
}

const char* to_string(RateTarget target) {
  switch (target) {
    case RateTarget::Deterministic: return "deterministic";
    case RateTarget::Control: return "control";
    case RateTarget::File: return "file";
  }
  return "unknown";
}

namespace {

std::string join(const std::vector<std::string>& errors) {
  std::string out = "invalid config:";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string format_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

/// One recognized key: how to read it into the config and how to print it.
struct Entry {
  std::string section;
  std::string key;
  std::function<std::string(std::string_view)> set;  // empty string on success
  std::function<std::string()> get;
};

template <typename T>
Entry number_entry(std::string section, std::string key, T& field) {
  return {std::move(section), std::move(key),
          [&field](std::string_view v) -> std::string {
            T parsed{};
            if (!parse_number(v, parsed)) {
              return std::is_integral_v<T> ? "expected an integer"
                                           : "expected a number";
            }
            field = parsed;
            return {};
          },
          [&field] {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(field);
            } else {
              return std::to_string(field);
            }
          }};
}

template <typename T>
Entry list_entry(std::string section, std::string key, std::vector<T>& field) {
  return {std::move(section), std::move(key),
          [&field](std::string_view v) -> std::string {
            std::vector<T> parsed;
            if (v.empty()) {
              field.clear();
              return {};
            }
            for (auto item : split_list(v)) {
              T x{};
              if (!parse_number(item, x)) {
                return "expected a comma separated list of " +
                       std::string(std::is_integral_v<T> ? "integers" : "numbers");
              }
              parsed.push_back(x);
            }
            field = std::move(parsed);
            return {};
          },
          [&field] { return format_list(field); }};
}

Entry path_entry(std::string section, std::string key,
                 std::filesystem::path& field) {
  return {std::move(section), std::move(key),
          [&field](std::string_view v) -> std::string {
            field = std::filesystem::path(std::string(v));
            return {};
          },
          [&field] { return field.generic_string(); }};
}

Entry bool_entry(std::string section, std::string key, bool& field) {
  return {std::move(section), std::move(key),
          [&field](std::string_view v) -> std::string {
            if (v == "true") field = true;
            else if (v == "false") field = false;
            else return "expected true or false";
            return {};
          },
          [&field] { return std::string(field ? "true" : "false"); }};
}

template <typename E, std::size_t N>
Entry enum_entry(std::string section, std::string key, E& field,
                 const E (&values)[N]) {
  return {std::move(section), std::move(key),
          [&field, &values](std::string_view v) -> std::string {
            std::string choices;
            for (E e : values) {
              if (v == to_string(e)) {
                field = e;
                return {};
              }
              choices += (choices.empty() ? "" : ", ") + std::string(to_string(e));
            }
            return "expected one of " + choices;
          },
          [&field] { return std::string(to_string(field)); }};
}

constexpr ExperimentKind kKinds[] = {
    ExperimentKind::Validate,         ExperimentKind::Deterministic,
    ExperimentKind::StochasticEnsemble, ExperimentKind::Clt,
    ExperimentKind::WeakConvergence,  ExperimentKind::Rate,
    ExperimentKind::Compactness};
constexpr RateTarget kTargets[] = {RateTarget::Deterministic,
                                   RateTarget::Control, RateTarget::File};

std::vector<Entry> entries(ExperimentConfig& c) {
  auto& o = c.optimizer;
  return {
      enum_entry("", "kind", c.kind, kKinds),
      number_entry("grid", "n", c.n),
      number_entry("time", "T", c.tgrid.horizon),
      number_entry("time", "N", c.tgrid.steps),
      number_entry("model", "nu1", c.params.nu1),
      number_entry("model", "nu2", c.params.nu2),
      number_entry("model", "gamma", c.params.gamma),
      number_entry("model", "mu", c.params.mu),
      number_entry("noise", "K", c.noise_modes),
      number_entry("noise", "alpha", c.noise_alpha),
      number_entry("seeds", "base_seed", c.base_seed),
      number_entry("initial", "a", c.initial_a),
      number_entry("initial", "b", c.initial_b),
      path_entry("run", "output", c.output),
      number_entry("run", "threads", c.threads),
      number_entry("run", "snapshot_stride", c.snapshot_stride),
      number_entry("run", "linf_ceiling", c.linf_ceiling),
      bool_entry("run", "write_snapshots", c.write_snapshots),
      list_entry("sampling", "epsilons", c.epsilons),
      number_entry("sampling", "samples", c.samples),
      path_entry("control", "file", c.control_file),
      number_entry("control", "mode", c.control_mode),
      number_entry("control", "direction", c.control_direction),
      number_entry("control", "coefficient", c.control_coefficient),
      enum_entry("rate", "target", c.rate_target, kTargets),
      path_entry("rate", "target_file", c.target_file),
      number_entry("rate", "penalty", c.penalty),
      number_entry("rate", "control_modes", c.control_modes),
      number_entry("rate", "control_steps", c.control_steps),
      number_entry("rate", "max_iterations", o.max_iterations),
      number_entry("rate", "step_size", o.step_size),
      number_entry("rate", "fd_bump", o.fd_bump),
      number_entry("rate", "tolerance", o.tolerance),
      number_entry("rate", "misfit_tolerance", o.misfit_tolerance),
      number_entry("rate", "continuation_phases", o.continuation_phases),
      number_entry("rate", "continuation_factor", o.continuation_factor),
      list_entry("compactness", "modes", c.oscillation_modes),
      number_entry("compactness", "amplitude", c.oscillation_amplitude),
      number_entry("compactness", "direction", c.oscillation_direction),
      list_entry("validate", "grids", c.validate_grids),
      number_entry("validate", "samples", c.validate_samples),
  };
}

bool uses_sampling(ExperimentKind k) {
  return k == ExperimentKind::StochasticEnsemble || k == ExperimentKind::Clt ||
         k == ExperimentKind::WeakConvergence;
}

bool uses_control(const ExperimentConfig& c) {
  return c.kind == ExperimentKind::WeakConvergence ||
         c.kind == ExperimentKind::Compactness ||
         (c.kind == ExperimentKind::Rate && c.rate_target == RateTarget::Control);
}

void fill_defaults(ExperimentConfig& c, const std::set<std::string>& seen) {
  if (!seen.count("sampling.epsilons")) {
    if (c.kind == ExperimentKind::StochasticEnsemble) {
      c.epsilons = {1e-1, 1e-2};
    } else if (uses_sampling(c.kind)) {
      c.epsilons = {1e-1, 1e-2, 1e-3};
    }
  }
  if (!seen.count("sampling.samples") && uses_sampling(c.kind)) {
    c.samples = c.kind == ExperimentKind::WeakConvergence ? 32 : 64;
  }
}

void validate(const ExperimentConfig& c, std::vector<std::string>& errors) {
  auto need = [&](bool ok, const std::string& field, const std::string& rule) {
    if (!ok) errors.push_back(field + ": " + rule);
  };
  auto need_file = [&](const std::filesystem::path& p, const std::string& field) {
    std::error_code ec;
    need(std::filesystem::is_regular_file(p, ec), field,
         "file " + p.generic_string() + " does not exist");
  };

  need(c.n >= 3, "grid.n", "must be >= 3");
  need(c.tgrid.horizon > 0 && std::isfinite(c.tgrid.horizon), "time.T", "must be > 0");
  need(c.tgrid.steps >= 1, "time.N", "must be >= 1");
  need(c.params.nu1 > 0, "model.nu1", "must be > 0");
  need(c.params.nu2 >= 0, "model.nu2", "must be >= 0");
  need(std::isfinite(c.params.gamma), "model.gamma", "must be finite");
  need(c.params.mu >= 0, "model.mu", "must be >= 0");
  need(c.noise_modes >= 1, "noise.K", "must be >= 1");
  need(c.noise_alpha > 3, "noise.alpha", "must be > 3");
  need(std::isfinite(c.initial_a) && std::isfinite(c.initial_b), "initial",
       "a and b must be finite");
  need(!c.output.empty(), "run.output", "must not be empty");
  need(c.threads >= 0, "run.threads", "must be >= 1");
  need(c.snapshot_stride >= 0, "run.snapshot_stride", "must be >= 0");
  need(c.linf_ceiling > 0, "run.linf_ceiling", "must be > 0");

  if (uses_sampling(c.kind)) {
    const bool clt = c.kind == ExperimentKind::Clt;
    need(!c.epsilons.empty(), "sampling.epsilons", "must not be empty");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
      const double e = c.epsilons[i];
      if (clt) {
        need(e > 0 && e <= 1, "sampling.epsilons", "each must lie in (0, 1]");
        if (i > 0) {
          need(e < c.epsilons[i - 1], "sampling.epsilons",
               "must be strictly decreasing");
        }
      } else {
        need(e >= 0 && e <= 1, "sampling.epsilons", "each must lie in [0, 1]");
      }
    }
    need(c.samples >= (clt ? 2 : 1), "sampling.samples",
         clt ? "must be >= 2" : "must be >= 1");
  }

  if (uses_control(c)) {
    if (!c.control_file.empty()) {
      need_file(c.control_file, "control.file");
    } else {
      need(c.control_mode >= 1 && c.control_mode <= c.noise_modes,
           "control.mode", "must lie in [1, noise.K]");
      need(c.control_direction >= 1 && c.control_direction <= 3,
           "control.direction", "must be 1, 2 or 3");
      need(std::isfinite(c.control_coefficient), "control.coefficient",
           "must be finite");
    }
  }

  if (c.kind == ExperimentKind::Rate) {
    const auto& o = c.optimizer;
    need(c.penalty > 0, "rate.penalty", "must be > 0");
    need(c.control_modes >= 1 && c.control_modes <= c.noise_modes,
         "rate.control_modes", "must lie in [1, noise.K]");
    need(c.control_steps >= 1 && c.tgrid.steps >= 1 &&
             c.tgrid.steps % c.control_steps == 0,
         "rate.control_steps", "must be >= 1 and divide time.N");
    need(o.max_iterations >= 0, "rate.max_iterations", "must be >= 0");
    need(o.step_size > 0, "rate.step_size", "must be > 0");
    need(o.fd_bump > 0, "rate.fd_bump", "must be > 0");
    need(o.tolerance >= 0, "rate.tolerance", "must be >= 0");
    need(o.misfit_tolerance > 0, "rate.misfit_tolerance", "must be > 0");
    need(o.continuation_phases >= 0, "rate.continuation_phases", "must be >= 0");
    need(o.continuation_factor >= 1, "rate.continuation_factor", "must be >= 1");
    if (c.rate_target == RateTarget::File) {
      if (c.target_file.empty()) {
        errors.push_back("rate.target_file: required when rate.target = file");
      } else {
        need_file(c.target_file, "rate.target_file");
      }
    }
  }

  if (c.kind == ExperimentKind::Compactness) {
    need(!c.oscillation_modes.empty(), "compactness.modes", "must not be empty");
    for (int k : c.oscillation_modes) {
      need(k >= 1 && k <= c.noise_modes, "compactness.modes",
           "each must lie in [1, noise.K]");
    }
    need(c.oscillation_amplitude >= 0, "compactness.amplitude", "must be >= 0");
    need(c.oscillation_direction >= 1 && c.oscillation_direction <= 3,
         "compactness.direction", "must be 1, 2 or 3");
  }

  if (c.kind == ExperimentKind::Validate) {
    need(!c.validate_grids.empty(), "validate.grids", "must not be empty");
    for (int n : c.validate_grids) need(n >= 3, "validate.grids", "each must be >= 3");
    need(c.validate_samples >= 1, "validate.samples", "must be >= 1");
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::vector<std::string> errors;
  auto table = entries(config);
  std::map<std::string, Entry*> by_name;
  std::set<std::string> sections;
  for (auto& e : table) {
    by_name[e.section.empty() ? e.key : e.section + "." + e.key] = &e;
    sections.insert(e.section);
  }

  std::set<std::string> seen;
  std::string section;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "unterminated section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty() || !sections.count(section)) {
        errors.push_back(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string name = section.empty() ? key : section + "." + key;
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      errors.push_back(where + "unknown key " + name);
      continue;
    }
    if (!seen.insert(name).second) {
      errors.push_back(where + "duplicate key " + name);
      continue;
    }
    if (const auto err = it->second->set(value); !err.empty()) {
      errors.push_back(name + ": " + err + " (got '" + std::string(value) + "')");
    }
  }
  if (!seen.count("kind")) errors.push_back("kind: required");

  for (auto* p : {&config.control_file, &config.target_file}) {
    if (!p->empty() && p->is_relative()) *p = base_dir / *p;
  }
  fill_defaults(config, seen);
  validate(config, errors);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config file " + path.generic_string()});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string format_config(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  std::ostringstream os;
  std::string section;
  for (const auto& e : entries(copy)) {
    if (e.section != section) {
      section = e.section;
      os << "\n[" << section << "]\n";
    }
    os << e.key << " = " << e.get() << '\n';
  }
  return os.str();
}

}  // namespace llb
