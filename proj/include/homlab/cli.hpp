#pragma once

// Config-driven entry point: correctors | verify | solve | sweep.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "homlab/json_io.hpp"
#include "homlab/pdesolve.hpp"
#include "homlab/ratelab.hpp"
#include "homlab/regimes.hpp"

namespace homlab::cli {

enum ExitCode : int {
  kOk = 0,
  kConfig = 1,
  kRegime = 2,
  kIdentity = 3,
  kResolution = 4,
  kVerdict = 5,
  kInternal = 6,
};

struct RunConfig {
  TrigField W;
  double k = 2.0;
  GammaMode gamma_mode = GammaMode::unit;
  SignOverride sign_override = SignOverride::none;
  double T = 0.5;
  SourceDescriptor f;
  InitialDescriptor g;
  ResolutionPolicy grid_policy{16.0, 16.0};
  int checkpoints = 64;
  double budget = 1e10;
  double solve_eps = 0.125;
  std::vector<double> sweep_eps{1.0 / 8, 1.0 / 12, 1.0 / 16, 1.0 / 24, 1.0 / 32};
  double tolerance = 0.3;
  double min_r2 = 0.95;
  double richardson_max = 0.1;
  bool richardson = true;
  std::string out_dir = "out";
  bool trajectory_csv = false;
  bool corrupt_corrector = false;
  bool disable_diffusion = false;
};

/// Validates the schema (unknown keys rejected, naming the key) and fills
/// defaults. Throws ConfigError.
RunConfig parse_config(const Json& j);
/// The fully resolved configuration, defaults included.
Json to_json(const RunConfig& c);

/// Maps a library error onto its exit code.
int exit_code_for(const std::exception& e);

/// argv-style entry point; argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace homlab::cli
