#include "homlab/pdesolve.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

constexpr double kBlowUpNorm = 1e12;

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(double* p) const { fftw_free(p); }
};

// Crank-Nicolson step for the 5-point (3-point in 1D) Dirichlet Laplacian A:
//   u <- (I - dt/2 A)^{-1} [(I + dt/2 A) u + dt/2 (f_n + f_{n+1})]
// The implicit solve is diagonal in the discrete sine basis (RODFT00).
class SineDiffusion {
 public:
  explicit SineDiffusion(const GridSpec& grid)
      : grid_(grid), n_(grid.points()), buf_(static_cast<double*>(fftw_malloc(sizeof(double) * n_))) {
    if (!buf_) throw std::bad_alloc();
    {
      std::lock_guard lock(planner_mutex());
      plan_ = grid.d == 1 ? fftw_plan_r2r_1d(grid.nx, buf_.get(), buf_.get(), FFTW_RODFT00, FFTW_ESTIMATE)
                          : fftw_plan_r2r_2d(grid.nx, grid.nx, buf_.get(), buf_.get(), FFTW_RODFT00,
                                             FFTW_RODFT00, FFTW_ESTIMATE);
    }
    const double h = grid.h();
    lambda_1d_.resize(grid.nx);
    for (int k = 0; k < grid.nx; ++k) {
      const double s = std::sin(kPi * (k + 1) / (2.0 * (grid.nx + 1)));
      lambda_1d_[k] = -4.0 * s * s / (h * h);
    }
    norm_ = std::pow(2.0 * (grid.nx + 1), -grid.d);
  }

  ~SineDiffusion() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }

  SineDiffusion(const SineDiffusion&) = delete;
  SineDiffusion& operator=(const SineDiffusion&) = delete;

  void step(std::span<double> u, std::span<const double> source_sum, double dt) {
    if (dt != cached_dt_) refresh(dt);
    const double a = 0.5 * dt;
    apply_explicit(u, a);
    double* w = buf_.get();
    if (!source_sum.empty())
      for (std::size_t i = 0; i < n_; ++i) w[i] += a * source_sum[i];
    fftw_execute(plan_);
    for (std::size_t i = 0; i < n_; ++i) w[i] *= inverse_[i];
    fftw_execute(plan_);
    std::copy(w, w + n_, u.begin());
  }

 private:
  void refresh(double dt) {
    const double a = 0.5 * dt;
    inverse_.resize(n_);
    const int nx = grid_.nx;
    if (grid_.d == 1) {
      for (int k = 0; k < nx; ++k) inverse_[k] = norm_ / (1.0 - a * lambda_1d_[k]);
    } else {
      for (int j = 0; j < nx; ++j)
        for (int i = 0; i < nx; ++i)
          inverse_[i + static_cast<std::size_t>(nx) * j] = norm_ / (1.0 - a * (lambda_1d_[i] + lambda_1d_[j]));
    }
    cached_dt_ = dt;
  }

  // buf <- (I + a A) u
  void apply_explicit(std::span<const double> u, double a) {
    const int nx = grid_.nx;
    const double c = a / (grid_.h() * grid_.h());
    double* w = buf_.get();
    if (grid_.d == 1) {
      for (int i = 0; i < nx; ++i) {
        const double left = i > 0 ? u[i - 1] : 0.0;
        const double right = i + 1 < nx ? u[i + 1] : 0.0;
        w[i] = u[i] + c * (left - 2.0 * u[i] + right);
      }
      return;
    }
    for (int j = 0; j < nx; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t idx = i + static_cast<std::size_t>(nx) * j;
        const double left = i > 0 ? u[idx - 1] : 0.0;
        const double right = i + 1 < nx ? u[idx + 1] : 0.0;
        const double down = j > 0 ? u[idx - nx] : 0.0;
        const double up = j + 1 < nx ? u[idx + nx] : 0.0;
        w[idx] = u[idx] + c * (left + right + down + up - 4.0 * u[idx]);
      }
  }

  GridSpec grid_;
  std::size_t n_;
  std::unique_ptr<double, FftwFree> buf_;
  fftw_plan plan_{};
  std::vector<double> lambda_1d_;
  std::vector<double> inverse_;
  double norm_ = 1.0;
  double cached_dt_ = -1.0;
};

// Multiplies u by exp(eps^{-gamma} int_{ta}^{tb} W(x/eps, s/eps^k) ds). The
// time integral is taken mode by mode in closed form.
class OscillatingReaction {
 public:
  OscillatingReaction(const TrigField& W, double eps, double k, double gamma, std::span<const Point> x)
      : eps_k_(std::pow(static_cast<long double>(eps), static_cast<long double>(k))),
        amp_(std::pow(eps, -gamma)),
        n_points_(x.size()) {
    const long double inv_eps = 1.0L / static_cast<long double>(eps);
    std::map<SpatialFreq, std::size_t> group_index;
    for (const auto& [key, c] : W.modes()) {
      // Keep one member of each pair m, -m; the partner contributes the
      // complex conjugate.
      if (key.m < SpatialFreq{}) continue;
      auto [it, inserted] = group_index.try_emplace(key.m, groups_.size());
      if (inserted) {
        Group g;
        g.weight = key.m == SpatialFreq{} ? 1.0 : 2.0;
        g.phase.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
          long double arg = 0.0L;
          for (int a = 0; a < W.dim(); ++a) arg += static_cast<long double>(key.m[a]) * x[i][a] * inv_eps;
          g.phase[i] = std::polar(1.0, kTwoPi * unit_fraction(arg));
        }
        groups_.push_back(std::move(g));
      }
      groups_[it->second].temporal.emplace_back(key.n, c);
    }
    exponent_.resize(n_points_);
  }

  void apply(long double ta, long double tb, std::span<double> u) {
    if (groups_.empty()) return;
    const long double tau_mid = 0.5L * (ta + tb) / eps_k_;
    const double width = static_cast<double>((tb - ta) / eps_k_);
    const double eps_k = static_cast<double>(eps_k_);
    std::fill(exponent_.begin(), exponent_.end(), 0.0);
    for (const auto& g : groups_) {
      Complex a{};
      for (const auto& [n, c] : g.temporal) {
        if (n == 0) {
          a += c * (eps_k * width);
        } else {
          const double s = std::sin(kPi * n * width) / (kPi * n);
          a += c * (eps_k * s) * std::polar(1.0, kTwoPi * unit_fraction(static_cast<long double>(n) * tau_mid));
        }
      }
      a *= g.weight * amp_;
      for (std::size_t i = 0; i < n_points_; ++i)
        exponent_[i] += a.real() * g.phase[i].real() - a.imag() * g.phase[i].imag();
    }
    for (std::size_t i = 0; i < n_points_; ++i) u[i] *= std::exp(exponent_[i]);
  }

 private:
  struct Group {
    double weight = 1.0;
    std::vector<Complex> phase;
    std::vector<std::pair<int, Complex>> temporal;
  };

  long double eps_k_;
  double amp_;
  std::size_t n_points_;
  std::vector<Group> groups_;
  std::vector<double> exponent_;
};

using ReactionFn = std::function<void(long double, long double, std::span<double>)>;

void check_dimension(int d) {
  if (d != 1 && d != 2) throw InvalidGrid("spatial dimension must be 1 or 2");
}

std::vector<double> sample_initial(const InitialDescriptor& g, std::span<const Point> x) {
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = g(x[i]);
  return u;
}

SourceSampler descriptor_sampler(const SourceDescriptor& f) {
  if (f.empty()) return {};
  return [f](double t, std::span<const Point> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i], t);
  };
}

Trajectory integrate(const GridSpec& grid, std::vector<double> u, const ReactionFn& reaction,
                     const SourceSampler& source, const SolverOptions& opts) {
  grid.validate();
  const auto x = grid_points(grid);
  SineDiffusion diffusion(grid);

  Trajectory traj;
  traj.grid = grid;
  traj.snapshots.reserve(grid.checkpoints);

  std::vector<double> f_now, f_next, f_sum;
  if (source) {
    f_now.resize(u.size());
    f_next.resize(u.size());
    f_sum.resize(u.size());
    source(0.0, x, f_now);
  }

  const int per_cp = grid.steps_per_checkpoint();
  const long double dt = grid.dt;
  double running = discrete_l2(u, grid);
  long long step = 0;
  for (int cp = 1; cp <= grid.checkpoints; ++cp) {
    for (int s = 0; s < per_cp; ++s, ++step) {
      const long double t0 = dt * step;
      const long double t1 = dt * (step + 1);
      const long double th = 0.5L * (t0 + t1);
      if (opts.reaction) reaction(t0, th, u);
      if (opts.diffusion) {
        if (source) {
          source(static_cast<double>(t1), x, f_next);
          for (std::size_t i = 0; i < u.size(); ++i) f_sum[i] = f_now[i] + f_next[i];
          std::swap(f_now, f_next);
          diffusion.step(u, f_sum, grid.dt);
        } else {
          diffusion.step(u, {}, grid.dt);
        }
      }
      if (opts.reaction) reaction(th, t1, u);

      const double norm = discrete_l2(u, grid);
      if (!std::isfinite(norm) || norm > kBlowUpNorm) {
        std::ostringstream os;
        os << "solution norm " << norm << " at t=" << static_cast<double>(t1)
           << " exceeds the blow-up threshold (wrong regime or sign?)";
        throw BlowUp(os.str());
      }
      running = std::max(running, norm);
    }
    const double t = static_cast<double>(dt * step);
    traj.max_l2_checkpoints = std::max(traj.max_l2_checkpoints, discrete_l2(u, grid));
    traj.snapshots.push_back({t, u});
  }
  traj.max_l2_all_steps = running;
  return traj;
}

}  // namespace

std::size_t GridSpec::points() const {
  return d == 1 ? static_cast<std::size_t>(nx) : static_cast<std::size_t>(nx) * nx;
}

int GridSpec::steps_per_checkpoint() const {
  return static_cast<int>(std::llround(T / checkpoints / dt));
}

void GridSpec::validate() const {
  check_dimension(d);
  if (nx < 8) throw InvalidGrid("nx must be at least 8");
  if (!(dt > 0.0)) throw InvalidGrid("dt must be positive");
  if (!(T > 0.0)) throw InvalidGrid("T must be positive");
  if (checkpoints < 8) throw InvalidGrid("at least 8 checkpoints are required");
  const double ratio = T / checkpoints / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * rounded)
    throw InvalidGrid("dt must divide T / checkpoints");
}

std::vector<Point> grid_points(const GridSpec& grid) {
  check_dimension(grid.d);
  const double h = grid.h();
  std::vector<Point> x;
  x.reserve(grid.points());
  if (grid.d == 1) {
    for (int i = 0; i < grid.nx; ++i) x.push_back({(i + 1) * h, 0.0});
  } else {
    for (int j = 0; j < grid.nx; ++j)
      for (int i = 0; i < grid.nx; ++i) x.push_back({(i + 1) * h, (j + 1) * h});
  }
  return x;
}

double SourceDescriptor::operator()(const Point& x, double t) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    double v = term.amp * std::exp(term.sigma * t) * std::cos(term.omega * t);
    for (std::size_t a = 0; a < term.j.size(); ++a) v *= std::sin(term.j[a] * kPi * x[a]);
    sum += v;
  }
  return sum;
}

double InitialDescriptor::operator()(const Point& x) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    double v = term.amp;
    for (std::size_t a = 0; a < term.j.size(); ++a) v *= std::sin(term.j[a] * kPi * x[a]);
    sum += v;
  }
  return sum;
}

void validate(const SourceDescriptor& f, int d) {
  for (const auto& term : f.terms) {
    if (static_cast<int>(term.j.size()) != d) throw InvalidGrid("source term needs one frequency per axis");
    for (int j : term.j)
      if (j < 1) throw InvalidGrid("source frequencies must be >= 1 so the term vanishes on the boundary");
  }
}

void validate(const InitialDescriptor& g, int d) {
  for (const auto& term : g.terms) {
    if (static_cast<int>(term.j.size()) != d) throw InvalidGrid("initial term needs one frequency per axis");
    for (int j : term.j)
      if (j < 1) throw InvalidGrid("initial frequencies must be >= 1 so the datum lies in H^1_0");
  }
}

double policy_dt(const RegimeSpec& regime, double eps, const ResolutionPolicy& policy) {
  return std::min(std::pow(eps, regime.k), std::pow(eps, regime.gamma + 1.0)) / policy.dt_divisor;
}

GridSpec policy_grid(const RegimeSpec& regime, double eps, double T, int d, int checkpoints,
                     const ResolutionPolicy& policy) {
  GridSpec g;
  g.d = d;
  g.T = T;
  g.checkpoints = checkpoints;
  g.nx = std::max(8, static_cast<int>(std::ceil(policy.points_per_period / eps - 1e-9)));
  const double per_cp = T / checkpoints;
  const auto steps = static_cast<long long>(std::ceil(per_cp / policy_dt(regime, eps, policy) - 1e-9));
  g.dt = per_cp / static_cast<double>(std::max(1LL, steps));
  return g;
}

void check_resolution(const RegimeSpec& regime, double eps, const GridSpec& grid, const ResolutionPolicy& policy) {
  const double need_nx = policy.points_per_period / eps;
  if (grid.nx < need_nx * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "nx=" << grid.nx << " is below " << policy.points_per_period << "/eps = " << need_nx;
    throw ResolutionViolation(os.str());
  }
  const double max_dt = policy_dt(regime, eps, policy);
  if (grid.dt > max_dt * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << "dt=" << grid.dt << " exceeds min(eps^k, eps^(gamma+1))/" << policy.dt_divisor << " = " << max_dt;
    throw ResolutionViolation(os.str());
  }
}

Trajectory solve_epsilon(const ProblemSpec& p, const GridSpec& grid, const SolverOptions& opts) {
  grid.validate();
  if (p.W.dim() != grid.d) throw InvalidGrid("potential dimension differs from grid dimension");
  if (!(p.eps > 0.0 && p.eps < 1.0)) throw InvalidGrid("eps must lie in (0, 1)");
  validate(p.f, grid.d);
  validate(p.g, grid.d);
  if (opts.enforce_resolution && !p.W.is_zero()) check_resolution(p.regime, p.eps, grid, opts.policy);

  const auto x = grid_points(grid);
  auto reaction = std::make_shared<OscillatingReaction>(p.W, p.eps, p.regime.k, p.regime.gamma, x);
  ReactionFn fn = [reaction](long double ta, long double tb, std::span<double> u) { reaction->apply(ta, tb, u); };
  const SourceSampler source = opts.source ? opts.source : descriptor_sampler(p.f);
  return integrate(grid, sample_initial(p.g, x), fn, source, opts);
}

Trajectory solve_homogenized(const RegimeSpec&, const EffectivePotential& c_eff, const SourceDescriptor& f,
                             const InitialDescriptor& g, const GridSpec& grid, const SolverOptions& opts) {
  grid.validate();
  validate(f, grid.d);
  validate(g, grid.d);
  const auto x = grid_points(grid);
  ReactionFn fn = [c_eff](long double ta, long double tb, std::span<double> u) {
    const double factor = std::exp(-c_eff.integral(static_cast<double>(ta), static_cast<double>(tb)));
    for (double& v : u) v *= factor;
  };
  const SourceSampler source = opts.source ? opts.source : descriptor_sampler(f);
  return integrate(grid, sample_initial(g, x), fn, source, opts);
}

double discrete_l2(std::span<const double> u, const GridSpec& grid) {
  double sum = 0.0;
  for (double v : u) sum += v * v;
  return std::sqrt(sum * std::pow(grid.h(), grid.d));
}

double error_linf_l2(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid == b.grid) || a.snapshots.size() != b.snapshots.size())
    throw GridMismatch("trajectories live on different grids");
  double worst = 0.0;
  std::vector<double> diff;
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    const auto& ua = a.snapshots[s].u;
    const auto& ub = b.snapshots[s].u;
    if (ua.size() != ub.size() || a.snapshots[s].t != b.snapshots[s].t)
      throw GridMismatch("checkpoint mismatch between trajectories");
    diff.resize(ua.size());
    for (std::size_t i = 0; i < ua.size(); ++i) diff[i] = ua[i] - ub[i];
    worst = std::max(worst, discrete_l2(diff, a.grid));
  }
  return worst;
}

GridSpec refined(const GridSpec& grid) {
  GridSpec fine = grid;
  fine.nx = 2 * grid.nx + 1;
  fine.dt = grid.dt / 2.0;
  return fine;
}

double relative_change(double coarse, double fine) {
  constexpr double kFloor = 1e-13;
  if (std::max(coarse, fine) <= kFloor) return 0.0;
  return std::abs(fine - coarse) / std::max(coarse, kFloor);
}

double richardson_check(const ProblemSpec& p, const GridSpec& grid, const SolverOptions& opts) {
  const EffectivePotential c_eff = effective_potential(p.regime, p.W);
  const auto error_on = [&](const GridSpec& g) {
    return error_linf_l2(solve_epsilon(p, g, opts), solve_homogenized(p.regime, c_eff, p.f, p.g, g, opts));
  };
  return relative_change(error_on(grid), error_on(refined(grid)));
}

void write_csv(const Trajectory& traj, std::ostream& os) {
  const auto x = grid_points(traj.grid);
  os << (traj.grid.d == 1 ? "t,x1,u\n" : "t,x1,x2,u\n");
  char line[128];
  for (const auto& snap : traj.snapshots)
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (traj.grid.d == 1)
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", snap.t, x[i][0], snap.u[i]);
      else
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", snap.t, x[i][0], x[i][1], snap.u[i]);
      os << line;
    }
}

}  // namespace homlab
