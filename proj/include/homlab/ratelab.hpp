#pragma once

// eps sweeps: homogenization error per eps, log-log fit, and a verdict
// against the regime's rate exponent.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homlab/correctors.hpp"
#include "homlab/json_io.hpp"
#include "homlab/pdesolve.hpp"
#include "homlab/regimes.hpp"

namespace homlab {

struct SweepConfig {
  TrigField W;
  double k = 2.0;
  GammaMode gamma_mode = GammaMode::unit;
  SignOverride sign_override = SignOverride::none;
  SourceDescriptor f;
  InitialDescriptor g;
  double T = 0.5;
  std::vector<double> eps{1.0 / 8, 1.0 / 12, 1.0 / 16, 1.0 / 24, 1.0 / 32};
  int checkpoints = 64;
  // Grids are built from `grid_policy`; `minimum` is what the solver enforces.
  // The default step is twice as fine as the minimum so that refinement
  // changes the error by a few percent rather than ~15% (stiff fast modes).
  ResolutionPolicy grid_policy{16.0, 16.0};
  ResolutionPolicy minimum;
  double tolerance = 0.3;
  double min_r2 = 0.95;
  double richardson_max = 0.1;
  bool richardson = true;
  int workers = 1;
  // Estimated cell updates (grid points x steps, summed over all solves).
  double budget = 1e10;

  /// Throws InvalidSweep unless eps is strictly decreasing, has at least four
  /// entries and lies in (0, 1/4].
  void validate() const;
};

struct SweepRow {
  double eps = 0.0;
  double error = 0.0;
  double u_max = 0.0;            // max over checkpoints of ||u_eps||
  double u_max_all_steps = 0.0;  // same over every step
  double richardson = 0.0;       // relative error change under refinement
  GridSpec grid;
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::size_t> used;
  std::vector<std::string> notices;
};

/// Least squares on (log eps, log error). Points with error <= 1e-12 are
/// dropped with a notice; fewer than three survivors throw DegenerateFit.
LogLogFit fit_loglog(std::span<const std::pair<double, double>> points);

enum class Verdict { pass, fail, degenerate };
std::string to_string(Verdict v);

struct RateReport {
  RegimeSpec regime;
  EffectivePotential effective;
  IdentityReport identities;
  std::vector<SweepRow> rows;
  std::optional<LogLogFit> fit;
  double theoretical = 0.0;
  double tolerance = 0.3;
  double min_r2 = 0.95;
  double richardson_max = 0.1;
  Verdict verdict = Verdict::fail;
  std::vector<std::string> notices;
  // max / min of u_max across the sweep
  double uniform_spread = 1.0;
  bool monotone = true;
};

/// Cell updates the sweep will perform, refinement solves included.
double estimate_cost(const SweepConfig& cfg);

RateReport run_sweep(const SweepConfig& cfg);

Json to_json(const RateReport& r);
/// eps,error,u_max,u_max_all_steps,richardson,nx,dt plus slope metadata.
void write_rows_csv(const RateReport& r, std::ostream& os);
/// Two columns: eps error.
void write_gnuplot(const RateReport& r, std::ostream& os);

}  // namespace homlab
