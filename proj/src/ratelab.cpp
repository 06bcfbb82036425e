#include "homlab/ratelab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

constexpr double kErrorFloor = 1e-12;
constexpr double kMonotoneSlack = 0.2;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

SweepRow run_point(const SweepConfig& cfg, const RegimeSpec& regime, const EffectivePotential& c_eff, double eps) {
  ProblemSpec p{cfg.W, eps, regime, cfg.f, cfg.g};
  const int d = cfg.W.dim();
  SolverOptions opts;
  opts.policy = cfg.minimum;

  SweepRow row;
  row.eps = eps;
  row.grid = policy_grid(regime, eps, cfg.T, d, cfg.checkpoints, cfg.grid_policy);
  const Trajectory ue = solve_epsilon(p, row.grid, opts);
  const Trajectory u0 = solve_homogenized(regime, c_eff, cfg.f, cfg.g, row.grid, opts);
  row.error = error_linf_l2(ue, u0);
  row.u_max = ue.max_l2_checkpoints;
  row.u_max_all_steps = ue.max_l2_all_steps;
  if (cfg.richardson) {
    const GridSpec fine = refined(row.grid);
    const double fine_error =
        error_linf_l2(solve_epsilon(p, fine, opts), solve_homogenized(regime, c_eff, cfg.f, cfg.g, fine, opts));
    row.richardson = relative_change(row.error, fine_error);
  }
  return row;
}

}  // namespace

void SweepConfig::validate() const {
  if (eps.size() < 4) throw InvalidSweep("the eps list needs at least 4 values");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] <= 0.25)) throw InvalidSweep("every eps must lie in (0, 1/4]");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw InvalidSweep("the eps list must be strictly decreasing");
  }
  if (!(T > 0.0)) throw InvalidSweep("T must be positive");
  if (workers < 1) throw InvalidSweep("workers must be at least 1");
  if (tolerance < 0.0 || richardson_max < 0.0) throw InvalidSweep("tolerances must be non-negative");
}

LogLogFit fit_loglog(std::span<const std::pair<double, double>> points) {
  LogLogFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [eps, err] = points[i];
    if (!(eps > 0.0)) throw DegenerateFit("eps values must be positive");
    if (!(err > kErrorFloor)) {
      fit.notices.push_back("eps=" + fmt("%.6g", eps) + ": error " + fmt("%.3g", err) +
                            " is at the round-off floor; excluded from the fit");
      continue;
    }
    fit.used.push_back(i);
    lx.push_back(std::log(eps));
    ly.push_back(std::log(err));
  }
  if (lx.size() < 3) {
    std::string msg = "degenerate input: only " + std::to_string(lx.size()) + " point(s) above the round-off floor";
    throw DegenerateFit(msg);
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw DegenerateFit("degenerate input: all eps values coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // A constant series is fitted exactly by a horizontal line.
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::degenerate:
      return "degenerate";
  }
  return "fail";
}

double estimate_cost(const SweepConfig& cfg) {
  const RegimeSpec regime = resolve_regime(cfg.k, cfg.gamma_mode, cfg.W, cfg.sign_override);
  double total = 0.0;
  for (double eps : cfg.eps) {
    const GridSpec g = policy_grid(regime, eps, cfg.T, cfg.W.dim(), cfg.checkpoints, cfg.grid_policy);
    total += 2.0 * static_cast<double>(g.points()) * g.steps();
    if (cfg.richardson) {
      const GridSpec f = refined(g);
      total += 2.0 * static_cast<double>(f.points()) * f.steps();
    }
  }
  return total;
}

RateReport run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  RateReport report;
  report.regime = resolve_regime(cfg.k, cfg.gamma_mode, cfg.W, cfg.sign_override);
  report.effective = effective_potential(report.regime, cfg.W);
  report.identities = identity_report(cfg.W, report.regime);
  report.theoretical = report.regime.rate_exponent;
  report.tolerance = cfg.tolerance;
  report.min_r2 = cfg.min_r2;
  report.richardson_max = cfg.richardson_max;

  const double cost = estimate_cost(cfg);
  if (cost > cfg.budget) {
    std::ostringstream os;
    os << "estimated " << cost << " cell updates exceed the budget of " << cfg.budget;
    throw BudgetExceeded(os.str());
  }

  // Each worker claims the next eps; rows land in fixed slots, so the
  // report does not depend on scheduling.
  const std::size_t n = cfg.eps.size();
  std::vector<SweepRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rows[i] = run_point(cfg, report.regime, report.effective, cfg.eps[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = static_cast<int>(std::min<std::size_t>(cfg.workers, n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  report.rows = std::move(rows);

  std::vector<std::pair<double, double>> points;
  double lo = report.rows.front().u_max, hi = lo;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = report.rows[i];
    points.emplace_back(r.eps, r.error);
    lo = std::min(lo, r.u_max);
    hi = std::max(hi, r.u_max);
    if (i > 0 && r.error > (1.0 + kMonotoneSlack) * report.rows[i - 1].error) report.monotone = false;
  }
  report.uniform_spread = lo > 0.0 ? hi / lo : (hi > 0.0 ? INFINITY : 1.0);

  try {
    report.fit = fit_loglog(points);
    report.notices = report.fit->notices;
  } catch (const DegenerateFit& e) {
    report.verdict = Verdict::degenerate;
    report.notices.push_back(e.what());
    return report;
  }

  const auto& fit = *report.fit;
  bool pass = true;
  if (std::abs(fit.slope - report.theoretical) > cfg.tolerance) {
    pass = false;
    report.notices.push_back("slope " + fmt("%.4f", fit.slope) + " is farther than " + fmt("%.3g", cfg.tolerance) +
                             " from the theoretical " + fmt("%.4f", report.theoretical));
  }
  if (fit.r2 < cfg.min_r2) {
    pass = false;
    report.notices.push_back("R^2 " + fmt("%.4f", fit.r2) + " is below " + fmt("%.3g", cfg.min_r2));
  }
  for (const auto& r : report.rows)
    if (r.richardson > cfg.richardson_max) {
      pass = false;
      report.notices.push_back("eps=" + fmt("%.6g", r.eps) + ": refinement changes the error by " +
                               fmt("%.3g", r.richardson) + " (discretization not certified)");
    }
  if (!report.monotone) report.notices.push_back("errors are not monotone in eps within 20% slack");
  if (report.uniform_spread > 2.0)
    report.notices.push_back("max_t ||u_eps|| varies by a factor " + fmt("%.3g", report.uniform_spread) +
                             " across the sweep");
  report.verdict = pass ? Verdict::pass : Verdict::fail;
  return report;
}

Json to_json(const RateReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"eps", row.eps},
                    {"error", row.error},
                    {"u_max", row.u_max},
                    {"u_max_all_steps", row.u_max_all_steps},
                    {"richardson", row.richardson},
                    {"grid", to_json(row.grid)}});
  Json j;
  j["regime"] = to_json(r.regime);
  j["effective_potential"] = to_json(r.effective);
  j["rows"] = rows;
  if (r.fit) {
    j["fit"] = {{"slope", r.fit->slope}, {"intercept", r.fit->intercept}, {"r2", r.fit->r2},
                {"points_used", r.fit->used}};
  } else {
    j["fit"] = nullptr;
  }
  j["theoretical_exponent"] = r.theoretical;
  j["criteria"] = {{"slope_tolerance", r.tolerance}, {"min_r2", r.min_r2}, {"richardson_max", r.richardson_max}};
  j["verdict"] = to_string(r.verdict);
  j["uniform_spread"] = r.uniform_spread;
  j["monotone"] = r.monotone;
  j["notices"] = r.notices;
  j["identities"] = to_json(r.identities);
  return j;
}

void write_rows_csv(const RateReport& r, std::ostream& os) {
  const double slope = r.fit ? r.fit->slope : NAN;
  const double r2 = r.fit ? r.fit->r2 : NAN;
  os << "eps,error,u_max,u_max_all_steps,richardson,nx,dt,slope,r2,theoretical,verdict\n";
  char line[512];
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%s\n", row.eps,
                  row.error, row.u_max, row.u_max_all_steps, row.richardson, row.grid.nx, row.grid.dt, slope, r2,
                  r.theoretical, to_string(r.verdict).c_str());
    os << line;
  }
}

void write_gnuplot(const RateReport& r, std::ostream& os) {
  os << "# eps error\n";
  char line[96];
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%.17g %.17g\n", row.eps, row.error);
    os << line;
  }
}

}  // namespace homlab
