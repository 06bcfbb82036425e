#pragma once

// Finite-difference solvers on the unit box with homogeneous Dirichlet data for
//   d_t u - Lap u - eps^{-gamma} W(x/eps, t/eps^k) u = f        (oscillating)
//   d_t u - Lap u + c_eff(t) u = f                              (homogenized)
// Each step is Strang split: exact reaction over dt/2, Crank-Nicolson
// diffusion over dt (trapezoidal source), exact reaction over dt/2.

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "homlab/correctors.hpp"
#include "homlab/potential.hpp"
#include "homlab/regimes.hpp"

namespace homlab {

struct GridSpec {
  int d = 1;
  // interior points per axis; spacing h = 1 / (nx + 1)
  int nx = 64;
  double T = 0.5;
  double dt = 1e-3;
  int checkpoints = 64;

  double h() const { return 1.0 / (nx + 1); }
  std::size_t points() const;
  int steps_per_checkpoint() const;
  int steps() const { return steps_per_checkpoint() * checkpoints; }
  /// Throws InvalidGrid on a violated invariant.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

/// Interior grid points in storage order (axis 0 fastest).
std::vector<Point> grid_points(const GridSpec& grid);

struct SourceTerm {
  double amp = 1.0;
  std::vector<int> j;  // sin(j_i pi x_i) per axis, j_i >= 1
  double sigma = 0.0;  // e^{sigma t}
  double omega = 0.0;  // cos(omega t)
};

struct SourceDescriptor {
  std::vector<SourceTerm> terms;
  bool empty() const { return terms.empty(); }
  double operator()(const Point& x, double t) const;
};

struct InitialTerm {
  double amp = 1.0;
  std::vector<int> j;
};

struct InitialDescriptor {
  std::vector<InitialTerm> terms;
  double operator()(const Point& x) const;
};

/// Throws InvalidGrid if a term has the wrong arity or a frequency below 1.
void validate(const SourceDescriptor& f, int d);
void validate(const InitialDescriptor& g, int d);

struct ProblemSpec {
  TrigField W;
  double eps = 0.125;
  RegimeSpec regime;
  SourceDescriptor f;
  InitialDescriptor g;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
};

struct Trajectory {
  GridSpec grid;
  std::vector<Snapshot> snapshots;
  // max of the discrete L2 norm over checkpoints, and over every step
  double max_l2_checkpoints = 0.0;
  double max_l2_all_steps = 0.0;
};

struct ResolutionPolicy {
  double points_per_period = 16.0;
  double dt_divisor = 8.0;
};

/// Finest time step the policy allows: min(eps^k, eps^{gamma+1}) / divisor.
double policy_dt(const RegimeSpec& regime, double eps, const ResolutionPolicy& policy = {});
/// Smallest policy-conforming grid whose step divides T / checkpoints.
GridSpec policy_grid(const RegimeSpec& regime, double eps, double T, int d, int checkpoints,
                     const ResolutionPolicy& policy = {});
/// Throws ResolutionViolation when the grid under-resolves the eps-problem.
void check_resolution(const RegimeSpec& regime, double eps, const GridSpec& grid,
                      const ResolutionPolicy& policy = {});

// Fills `out` with the source at time t on the grid points `x`.
using SourceSampler = std::function<void(double t, std::span<const Point> x, std::span<double> out)>;

struct SolverOptions {
  bool diffusion = true;
  bool reaction = true;
  bool enforce_resolution = true;
  ResolutionPolicy policy;
  // Replaces the descriptor-based source when set.
  SourceSampler source;
};

Trajectory solve_epsilon(const ProblemSpec& p, const GridSpec& grid, const SolverOptions& opts = {});
Trajectory solve_homogenized(const RegimeSpec& regime, const EffectivePotential& c_eff,
                             const SourceDescriptor& f, const InitialDescriptor& g, const GridSpec& grid,
                             const SolverOptions& opts = {});

/// sqrt(h^d sum u_i^2): composite trapezoid with the zero boundary values.
double discrete_l2(std::span<const double> u, const GridSpec& grid);
/// max over checkpoints of the discrete L2 norm of a - b.
double error_linf_l2(const Trajectory& a, const Trajectory& b);

/// The grid with dt -> dt/2 and nx -> 2nx+1 (old nodes are kept).
GridSpec refined(const GridSpec& grid);
/// |fine - coarse| / coarse, or 0 when both sit at the round-off floor.
double relative_change(double coarse, double fine);
/// Relative change of the homogenization error on the refined grid.
double richardson_check(const ProblemSpec& p, const GridSpec& grid, const SolverOptions& opts = {});

/// Rows "t,x1[,x2],u" for every snapshot and interior point.
void write_csv(const Trajectory& traj, std::ostream& os);

}  // namespace homlab
