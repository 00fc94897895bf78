#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "llb/config.hpp"

using namespace llb;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> errors_of(std::string_view text,
                                   const fs::path& base = {}) {
  try {
    parse_config(text, base);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errors, std::string_view what) {
  for (const auto& e : errors) {
    if (e.find(what) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("minimal document gets defaults") {
  const auto c = parse_config("kind=validate");
  CHECK(c.kind == ExperimentKind::Validate);
  CHECK(c.n == 127);
  CHECK(c.tgrid.steps == 2500);
  CHECK(c.tgrid.horizon == 0.25);
  CHECK(c.noise_modes == 8);
  CHECK(c.validate_samples == 1000);
  CHECK(c.validate_grids == std::vector<int>{31, 127, 255});
  CHECK(c.epsilons.empty());
}

TEST_CASE("sampling defaults depend on the kind") {
  const auto clt = parse_config("kind = clt");
  CHECK(clt.epsilons == std::vector<double>{1e-1, 1e-2, 1e-3});
  CHECK(clt.samples == 64);
  const auto ens = parse_config("kind = stochastic-ensemble");
  CHECK(ens.epsilons == std::vector<double>{1e-1, 1e-2});
  CHECK(ens.samples == 64);
  CHECK(parse_config("kind = weak-convergence").samples == 32);
  CHECK(parse_config("kind = clt\n[sampling]\nsamples = 5").samples == 5);
}

TEST_CASE("sections, comments and lists") {
  const auto c = parse_config(R"(
# a comment
kind = compactness   # trailing comment
[grid]
n = 63
[time]
T = 0.1
N = 400
[model]
gamma = -0.5
[compactness]
modes = 1, 3,5
amplitude = 2
[control]
coefficient = 1e-1
)");
  CHECK(c.kind == ExperimentKind::Compactness);
  CHECK(c.n == 63);
  CHECK(c.tgrid.steps == 400);
  CHECK(c.params.gamma == -0.5);
  CHECK(c.oscillation_modes == std::vector<int>{1, 3, 5});
  CHECK(c.oscillation_amplitude == 2.0);
  CHECK(c.control_coefficient == 0.1);
}

TEST_CASE("N = 0 names the field and the constraint") {
  const auto errs = errors_of("kind = deterministic\n[time]\nN = 0\n");
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].find("time.N") != std::string::npos);
  CHECK(errs[0].find(">= 1") != std::string::npos);
}

TEST_CASE("every error is reported") {
  const auto errs = errors_of(
      "kind = clt\n[grid]\nn = 2\n[noise]\nalpha = 3\nK = x\n[sampling]\n"
      "epsilons = 0.01, 0.1\n");
  CHECK(errs.size() == 4);
  CHECK(mentions(errs, "grid.n"));
  CHECK(mentions(errs, "noise.alpha"));
  CHECK(mentions(errs, "noise.K"));
  CHECK(mentions(errs, "strictly decreasing"));
}

TEST_CASE("unknown and malformed input are errors") {
  CHECK(mentions(errors_of("kind = validate\n[grid]\nsize = 3"), "unknown key grid.size"));
  CHECK(mentions(errors_of("kind = validate\n[gird]\n"), "unknown section"));
  CHECK(mentions(errors_of("kind = validate\nkind = clt"), "duplicate key kind"));
  CHECK(mentions(errors_of("kind = validate\n[grid\n"), "unterminated"));
  CHECK(mentions(errors_of("kind = validate\njust words"), "expected key = value"));
  CHECK(mentions(errors_of("kind = sideways"), "expected one of"));
  CHECK(mentions(errors_of("[grid]\nn = 31"), "kind: required"));
  CHECK(mentions(errors_of("kind = validate\n[grid]\nn = 3.5"), "integer"));
  CHECK(mentions(errors_of("kind = validate\n[run]\nwrite_snapshots = yes"), "true or false"));
}

TEST_CASE("kind specific checks") {
  CHECK(mentions(errors_of("kind = rate\n[rate]\ncontrol_steps = 7"), "rate.control_steps"));
  CHECK(mentions(errors_of("kind = rate\n[rate]\ntarget = file"), "rate.target_file"));
  CHECK(mentions(errors_of("kind = compactness\n[noise]\nK = 4"), "compactness.modes"));
  CHECK(mentions(errors_of("kind = weak-convergence\n[control]\ndirection = 4"),
                 "control.direction"));
  // Sections that the kind does not use are not checked.
  CHECK_NOTHROW(parse_config("kind = clt\n[noise]\nK = 4"));
}

TEST_CASE("referenced files must exist") {
  const fs::path dir = fs::temp_directory_path() / "llb_test_config";
  fs::create_directories(dir);
  const std::string doc = "kind = weak-convergence\n[control]\nfile = h.csv\n";
  fs::remove(dir / "h.csv");
  CHECK(mentions(errors_of(doc, dir), "does not exist"));
  std::ofstream(dir / "h.csv") << "step,k,j,coefficient\n";
  const auto c = parse_config(doc, dir);
  CHECK(c.control_file == dir / "h.csv");
  fs::remove_all(dir);
}

TEST_CASE("format_config round trips") {
  const auto c = parse_config(
      "kind = rate\n[time]\nT = 0.1\nN = 100\n[rate]\ncontrol_steps = 4\n"
      "fd_bump = 3e-5\n[sampling]\nepsilons = 0.3\n");
  const std::string text = format_config(c);
  const auto again = parse_config(text);
  CHECK(format_config(again) == text);
  CHECK(again.optimizer.fd_bump == 3e-5);
  CHECK(again.tgrid.horizon == 0.1);
}

TEST_CASE("shipped configs parse") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(LLB_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
    ++count;
  }
  CHECK(count == 7);
}
