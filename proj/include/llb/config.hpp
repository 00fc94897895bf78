// Experiment configuration: a flat INI-style document.
//
//   # comment (also after a value)
//   kind = clt
//   [grid]
//   n = 127
//   [time]
//   T = 0.25
//   N = 2500
//
// Keys before the first section header belong to the root, which only knows
// `kind`. Each key may appear once. Lists are comma separated. Relative file
// paths resolve against the directory of the config file. See
// docs/config.md for every section and key.

#ifndef LLB_CONFIG_HPP
#define LLB_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "llb/dynamics.hpp"
#include "llb/ldp.hpp"

namespace llb {

enum class ExperimentKind {
  Validate,
  Deterministic,
  StochasticEnsemble,
  Clt,
  WeakConvergence,
  Rate,
  Compactness,
};

const char* to_string(ExperimentKind kind);

enum class RateTarget { Deterministic, Control, File };

const char* to_string(RateTarget target);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Validate;

  int n = 127;
  TimeGrid tgrid{0.25, 2500};
  ModelParams params;  // epsilon unused; experiments set it per run
  int noise_modes = 8;
  double noise_alpha = 4.0;
  std::uint64_t base_seed = 1;
  double initial_a = 1.0;
  double initial_b = 0.5;

  std::filesystem::path output = "out";
  int threads = 0;  // 0: not set in the file
  int snapshot_stride = 0;
  double linf_ceiling = 1e3;
  bool write_snapshots = false;

  // [sampling]; defaults depend on kind.
  std::vector<double> epsilons;
  int samples = 0;

  // [control]: a file, or a constant coefficient in one mode and direction.
  std::filesystem::path control_file;
  int control_mode = 1;       // 1-based
  int control_direction = 3;  // 1-based
  double control_coefficient = 0.0;

  // [rate]
  RateTarget rate_target = RateTarget::Deterministic;
  std::filesystem::path target_file;
  double penalty = 1e3;
  int control_modes = 1;
  int control_steps = 1;
  OptimizerSettings optimizer;

  // [compactness]
  std::vector<int> oscillation_modes{2, 4, 8};
  double oscillation_amplitude = 1.0;
  int oscillation_direction = 3;  // 1-based

  // [validate]
  std::vector<int> validate_grids{31, 127, 255};
  int validate_samples = 1000;
};

/// All problems found in a document, one message per entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = {});

/// Reads and parses a file; relative paths resolve against its directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical document with every key, including defaults. Parsing it gives
/// back an equal configuration.
std::string format_config(const ExperimentConfig& config);

}  // namespace llb

#endif  // LLB_CONFIG_HPP
