#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinning/dynamics.hpp"

namespace pinning::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kUsageError = 2,
  kInputError = 3,
  kSingularityTerminated = 4,
  kReplayMismatch = 5,
};

/// Fully resolved parameters of one invocation. Everything a manifest needs to
/// reproduce the run lives here.
struct Settings {
  std::string subcommand;
  double strike = 500.0;
  double open_price = 498.34;
  double sigma = 1.102e-3;
  double mu = 0.0;
  double t0_min = 360.0;
  double start_min = 0.0;
  double end_min = 357.0;
  int steps = 357;
  HedgeMode mode = HedgeMode::corrected;
  StepScheme scheme = StepScheme::rk4;
  std::vector<double> betas;
  std::optional<double> position;
  std::optional<double> elasticity;
  std::uint64_t seed = 42;
  std::uint64_t runs = 5000;
  double noise_ratio = 1.0;
  double pin_tol = 0.005;
  std::optional<double> window_lo;
  std::optional<double> window_hi;
  std::string input;
  std::string output;
  std::string closes_output;
  std::string diagnostic_output;
  std::string manifest;
  std::string format = "csv";
  unsigned threads = 0;
};

nlohmann::json settings_to_json(const Settings& s);
Settings settings_from_json(const nlohmann::json& j);

/// One emitted file (or stdout stream when `path` is empty).
struct Artifact {
  std::string role;  // "output", "closes", "diagnostic"
  std::string path;
  std::string content;
};

struct CommandResult {
  int exit_code = kOk;
  std::vector<Artifact> artifacts;
  nlohmann::json notes = nlohmann::json::object();  // extra manifest fields (terminations, resolved params)
  std::string message;                              // human note for stderr
};

/// Runs a resolved subcommand without touching the filesystem except to read --input.
CommandResult execute(const Settings& s);

nlohmann::json make_manifest(const Settings& s, const CommandResult& r);

/// Entry point shared by the executable and tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pinning::cli
