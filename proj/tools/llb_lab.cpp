// llb_lab --config <path> [--out <dir>] [--threads <n>]

#include <iostream>

#include <CLI11.hpp>

#include "llb/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Landau-Lifshitz-Bloch experiment runner"};
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  app.add_option("--config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides run.output)");
  app.add_option("--threads", threads, "worker threads (default: LLB_THREADS)")
      ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : llb::kExitConfig;
  }

  llb::RunOptions options;
  if (!out_dir.empty()) options.output = out_dir;
  options.threads = threads;
  const auto result = llb::run_file(config_path, options);
  if (result.exit_code != llb::kExitOk) {
    std::cerr << "llb_lab: " << result.message << '\n';
  } else {
    std::cout << result.output.generic_string() << '\n';
    for (const auto& f : result.files) std::cout << "  " << f << '\n';
  }
  return result.exit_code;
}
