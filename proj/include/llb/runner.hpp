// Runs one configured experiment and persists its outputs.
//
// Every file lands in the output directory; manifest.json is written last and
// lists the SHA-256 of each output. A failed run leaves error.json instead.

#ifndef LLB_RUNNER_HPP
#define LLB_RUNNER_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "llb/config.hpp"

namespace llb {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // the run finished but a validation check failed
  kExitConfig = 2,
  kExitBlowUp = 3,
  kExitIo = 4,
};

struct RunOptions {
  /// Overrides run.output.
  std::optional<std::filesystem::path> output;
  /// Overrides run.threads when > 0.
  int threads = 0;
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path output;
  std::vector<std::string> files;  // relative to output, in write order
  std::string message;
};

/// Threads: options.threads, else run.threads, else LLB_THREADS, else the
/// hardware concurrency.
int resolve_threads(const ExperimentConfig& config, const RunOptions& options);

RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

/// Loads the file and runs it; config errors also produce error.json when an
/// output directory is known.
RunResult run_file(const std::filesystem::path& config_path,
                   const RunOptions& options = {});

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);

}  // namespace llb

#endif  // LLB_RUNNER_HPP
