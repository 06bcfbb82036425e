#include "homlab/cli.hpp"

#include <fftw3.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "homlab/correctors.hpp"
#include "homlab/errors.hpp"

#ifndef HOMLAB_VERSION
#define HOMLAB_VERSION "0.0.0"
#endif

namespace homlab::cli {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!keys.contains(key)) throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <class T>
void read(const Json& obj, const char* key, const std::string& where, T& dst) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string name = where + "." + key;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(name + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(name + " must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(name + " must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(name + " must be a string");
    }
    dst = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(name + " has the wrong type");
  }
}

std::vector<int> read_freqs(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of integers");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an array of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

void parse_problem(const Json& p, RunConfig& c, int d) {
  reject_unknown(p, "problem", {"T", "source", "initial"});
  read(p, "T", "problem", c.T);
  if (!(c.T > 0.0)) throw ConfigError("problem.T must be positive");
  if (auto it = p.find("source"); it != p.end()) {
    if (!it->is_array()) throw ConfigError("problem.source must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "problem.source[" + std::to_string(i) + "]";
      const Json& t = (*it)[i];
      reject_unknown(t, where, {"amp", "j", "sigma", "omega"});
      SourceTerm term;
      read(t, "amp", where, term.amp);
      read(t, "sigma", where, term.sigma);
      read(t, "omega", where, term.omega);
      term.j = t.contains("j") ? read_freqs(t["j"], where + ".j") : std::vector<int>(d, 1);
      c.f.terms.push_back(term);
    }
  }
  if (auto it = p.find("initial"); it != p.end()) {
    if (!it->is_array()) throw ConfigError("problem.initial must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "problem.initial[" + std::to_string(i) + "]";
      const Json& t = (*it)[i];
      reject_unknown(t, where, {"amp", "j"});
      InitialTerm term;
      read(t, "amp", where, term.amp);
      term.j = t.contains("j") ? read_freqs(t["j"], where + ".j") : std::vector<int>(d, 1);
      c.g.terms.push_back(term);
    }
  } else {
    c.g.terms.push_back({1.0, std::vector<int>(d, 1)});
  }
  try {
    validate(c.f, d);
    validate(c.g, d);
  } catch (const InvalidGrid& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

Json manifest(const std::string& command, const RunConfig& c, int workers) {
  return {{"tool", "homlab"},
          {"version", HOMLAB_VERSION},
          {"command", command},
          {"fftw", std::string(fftw_version)},
          {"compiler", __VERSION__},
          {"workers", workers},
          {"config", cli::to_json(c)}};
}

RegimeSpec regime_of(const RunConfig& c) { return resolve_regime(c.k, c.gamma_mode, c.W, c.sign_override); }

// Negative control for the identity suite: perturb the primary corrector.
void corrupt(CorrectorSet& set) {
  TrigField& chi = set.fields[set.primary];
  ModeKey key{};
  key.m[0] = 1;
  key.n = chi.dim() > 0 ? 1 : 0;
  ModeKey partner{};
  partner.m[0] = -1;
  partner.n = -key.n;
  chi.add(key, 1e-3);
  chi.add(partner, 1e-3);
}

int cmd_correctors(const RunConfig& c, const fs::path& out, std::ostream& os) {
  const RegimeSpec regime = regime_of(c);
  const CorrectorSet set = compute_correctors(regime, c.W);
  Json j;
  j["regime"] = to_json(regime);
  if (set.effective.kind == EffectivePotential::Kind::constant)
    j["c_eff"] = set.effective.value;
  else
    j["c_eff"] = to_json(set.effective.series);
  j["effective_potential"] = to_json(set.effective);
  j["primary"] = set.primary;
  Json fields = Json::object();
  for (const auto& [name, field] : set.fields) fields[name] = to_json(field);
  j["correctors"] = fields;
  if (set.chain_depth) {
    j["chain_depth"] = *set.chain_depth;
    Json chain = Json::array();
    for (const auto& s : set.chain) chain.push_back(to_json(s));
    j["chain"] = chain;
  }
  write_json(out / "correctors.json", j);
  os << "theorem " << to_string(regime.theorem) << ", c_eff";
  if (set.effective.kind == EffectivePotential::Kind::constant)
    os << " = " << set.effective.value << "\n";
  else
    os << "(t) with mean " << set.effective.series.mean() << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& c, const fs::path& out, std::ostream& os, std::ostream& err) {
  const RegimeSpec regime = regime_of(c);
  CorrectorSet set = compute_correctors(regime, c.W);
  if (c.corrupt_corrector) corrupt(set);
  const IdentityReport report = identity_report(c.W, set);
  write_json(out / "identities.json", to_json(report));
  if (const auto* bad = report.first_failure()) {
    err << "homlab: identity '" << bad->id << "' failed (" << bad->description << "): residual " << bad->residual
        << " > " << report.tolerance << "\n";
    return kIdentity;
  }
  os << report.checks.size() << " identities hold to " << report.tolerance << "\n";
  return kOk;
}

int cmd_solve(const RunConfig& c, const fs::path& out, std::ostream& os) {
  const RegimeSpec regime = regime_of(c);
  if (!(c.solve_eps > 0.0 && c.solve_eps < 1.0)) throw ConfigError("solve.eps must lie in (0, 1)");
  const EffectivePotential c_eff = effective_potential(regime, c.W);
  const GridSpec grid = policy_grid(regime, c.solve_eps, c.T, c.W.dim(), c.checkpoints, c.grid_policy);
  const double cost = 2.0 * static_cast<double>(grid.points()) * grid.steps();
  if (cost > c.budget) {
    std::ostringstream msg;
    msg << "estimated " << cost << " cell updates exceed the budget of " << c.budget;
    throw BudgetExceeded(msg.str());
  }
  SolverOptions opts;
  opts.diffusion = !c.disable_diffusion;
  const ProblemSpec p{c.W, c.solve_eps, regime, c.f, c.g};
  const Trajectory ue = solve_epsilon(p, grid, opts);
  const Trajectory u0 = solve_homogenized(regime, c_eff, c.f, c.g, grid, opts);
  const double error = error_linf_l2(ue, u0);

  Json j;
  j["eps"] = c.solve_eps;
  j["regime"] = to_json(regime);
  j["effective_potential"] = to_json(c_eff);
  j["grid"] = to_json(grid);
  j["error_linf_l2"] = error;
  j["u_eps_max_l2"] = ue.max_l2_checkpoints;
  j["u_eps_max_l2_all_steps"] = ue.max_l2_all_steps;
  j["u0_max_l2"] = u0.max_l2_checkpoints;
  write_json(out / "solve.json", j);
  if (c.trajectory_csv) {
    std::ofstream a(out / "trajectory_eps.csv", std::ios::binary), b(out / "trajectory_hom.csv", std::ios::binary);
    write_csv(ue, a);
    write_csv(u0, b);
  }
  os << "eps=" << c.solve_eps << " error=" << error << "\n";
  return kOk;
}

int cmd_sweep(const RunConfig& c, const fs::path& out, int workers, std::ostream& os) {
  SweepConfig s;
  s.W = c.W;
  s.k = c.k;
  s.gamma_mode = c.gamma_mode;
  s.sign_override = c.sign_override;
  s.f = c.f;
  s.g = c.g;
  s.T = c.T;
  s.eps = c.sweep_eps;
  s.checkpoints = c.checkpoints;
  s.grid_policy = c.grid_policy;
  s.tolerance = c.tolerance;
  s.min_r2 = c.min_r2;
  s.richardson_max = c.richardson_max;
  s.richardson = c.richardson;
  s.workers = workers;
  s.budget = c.budget;
  const RateReport r = run_sweep(s);

  write_json(out / "report.json", to_json(r));
  std::ostringstream csv, dat;
  write_rows_csv(r, csv);
  write_gnuplot(r, dat);
  write_file(out / "rates.csv", csv.str());
  write_file(out / "rates.dat", dat.str());

  for (const auto& row : r.rows) os << "eps=" << row.eps << " error=" << row.error << "\n";
  if (r.fit) os << "slope=" << r.fit->slope << " r2=" << r.fit->r2 << " theory=" << r.theoretical << "\n";
  for (const auto& n : r.notices) os << "note: " << n << "\n";
  os << "verdict: " << to_string(r.verdict) << "\n";
  return r.verdict == Verdict::pass ? kOk : kVerdict;
}

int default_workers() {
  if (const char* env = std::getenv("HOMLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

RunConfig parse_config(const Json& j) {
  reject_unknown(j, "", {"potential", "regime", "problem", "grid", "solve", "sweep", "output", "test_hooks"});
  RunConfig c;

  if (!j.contains("potential")) throw ConfigError("missing key 'potential'");
  const Json& pot = j["potential"];
  reject_unknown(pot, "potential", {"dim", "modes"});
  int dim = 0;
  read(pot, "dim", "potential", dim);
  if (pot.contains("dim") && dim != 1 && dim != 2) throw ConfigError("potential.dim must be 1 or 2");
  try {
    c.W = parse_modes(pot.value("modes", Json::array()), dim);
  } catch (const InvalidPotential& e) {
    throw ConfigError(std::string("potential.modes: ") + e.what());
  }
  const int d = c.W.dim();

  if (!j.contains("regime")) throw ConfigError("missing key 'regime'");
  const Json& reg = j["regime"];
  reject_unknown(reg, "regime", {"k", "gamma_mode", "sign_override"});
  if (!reg.contains("k")) throw ConfigError("regime: missing key 'k'");
  read(reg, "k", "regime", c.k);
  if (!(c.k >= 0.0)) throw ConfigError("regime.k must be >= 0");
  std::string gm = "unit", so = "none";
  read(reg, "gamma_mode", "regime", gm);
  read(reg, "sign_override", "regime", so);
  try {
    c.gamma_mode = parse_gamma_mode(gm);
    c.sign_override = parse_sign_override(so);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("regime: ") + e.what());
  }

  parse_problem(j.value("problem", Json::object()), c, d);

  if (j.contains("grid")) {
    const Json& g = j["grid"];
    reject_unknown(g, "grid", {"points_per_period", "dt_divisor", "checkpoints", "budget"});
    read(g, "points_per_period", "grid", c.grid_policy.points_per_period);
    read(g, "dt_divisor", "grid", c.grid_policy.dt_divisor);
    read(g, "checkpoints", "grid", c.checkpoints);
    read(g, "budget", "grid", c.budget);
    if (!(c.grid_policy.points_per_period > 0.0 && c.grid_policy.dt_divisor > 0.0))
      throw ConfigError("grid.points_per_period and grid.dt_divisor must be positive");
    if (c.checkpoints < 8) throw ConfigError("grid.checkpoints must be at least 8");
    if (!(c.budget > 0.0)) throw ConfigError("grid.budget must be positive");
  }
  if (j.contains("solve")) {
    reject_unknown(j["solve"], "solve", {"eps"});
    read(j["solve"], "eps", "solve", c.solve_eps);
  }
  if (j.contains("sweep")) {
    const Json& s = j["sweep"];
    reject_unknown(s, "sweep", {"eps", "tolerance", "min_r2", "richardson_max", "richardson"});
    if (s.contains("eps")) {
      if (!s["eps"].is_array()) throw ConfigError("sweep.eps must be an array of numbers");
      c.sweep_eps.clear();
      for (const auto& v : s["eps"]) {
        if (!v.is_number()) throw ConfigError("sweep.eps must be an array of numbers");
        c.sweep_eps.push_back(v.get<double>());
      }
    }
    read(s, "tolerance", "sweep", c.tolerance);
    read(s, "min_r2", "sweep", c.min_r2);
    read(s, "richardson_max", "sweep", c.richardson_max);
    read(s, "richardson", "sweep", c.richardson);
  }
  if (j.contains("output")) {
    reject_unknown(j["output"], "output", {"dir", "trajectory_csv"});
    read(j["output"], "dir", "output", c.out_dir);
    read(j["output"], "trajectory_csv", "output", c.trajectory_csv);
  }
  if (j.contains("test_hooks")) {
    reject_unknown(j["test_hooks"], "test_hooks", {"corrupt_corrector", "disable_diffusion"});
    read(j["test_hooks"], "corrupt_corrector", "test_hooks", c.corrupt_corrector);
    read(j["test_hooks"], "disable_diffusion", "test_hooks", c.disable_diffusion);
  }
  return c;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["potential"] = homlab::to_json(c.W);
  j["regime"] = {{"k", c.k}, {"gamma_mode", to_string(c.gamma_mode)}, {"sign_override", to_string(c.sign_override)}};
  j["problem"] = {{"T", c.T}, {"source", homlab::to_json(c.f)}, {"initial", homlab::to_json(c.g)}};
  j["grid"] = {{"points_per_period", c.grid_policy.points_per_period},
               {"dt_divisor", c.grid_policy.dt_divisor},
               {"checkpoints", c.checkpoints},
               {"budget", c.budget}};
  j["solve"] = {{"eps", c.solve_eps}};
  j["sweep"] = {{"eps", c.sweep_eps},
                {"tolerance", c.tolerance},
                {"min_r2", c.min_r2},
                {"richardson_max", c.richardson_max},
                {"richardson", c.richardson}};
  j["output"] = {{"dir", c.out_dir}, {"trajectory_csv", c.trajectory_csv}};
  j["test_hooks"] = {{"corrupt_corrector", c.corrupt_corrector}, {"disable_diffusion", c.disable_diffusion}};
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidSweep*>(&e) ||
      dynamic_cast<const InvalidPotential*>(&e) || dynamic_cast<const InvalidGrid*>(&e) ||
      dynamic_cast<const nlohmann::json::exception*>(&e))
    return kConfig;
  if (dynamic_cast<const NoApplicableRegime*>(&e) || dynamic_cast<const UnsupportedK*>(&e) ||
      dynamic_cast<const SolvabilityViolation*>(&e))
    return kRegime;
  if (dynamic_cast<const ChainIdentityViolation*>(&e)) return kIdentity;
  if (dynamic_cast<const ResolutionViolation*>(&e) || dynamic_cast<const BudgetExceeded*>(&e)) return kResolution;
  return kInternal;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic parabolic homogenization laboratory"};
  app.name(args.empty() ? "homlab" : args.front());
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int workers = default_workers();
  double budget = 0.0;
  app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--workers", workers, "concurrent sweep points (default: $HOMLAB_WORKERS or core count)")
      ->check(CLI::PositiveNumber);
  app.add_option("--budget", budget, "maximum estimated cell updates")->check(CLI::PositiveNumber);
  app.fallthrough();
  auto* correctors = app.add_subcommand("correctors", "correctors and effective potential");
  auto* verify = app.add_subcommand("verify", "energy identity suite");
  auto* solve = app.add_subcommand("solve", "one eps-problem against its homogenized limit");
  auto* sweep = app.add_subcommand("sweep", "convergence-rate sweep over eps");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  std::string command;
  for (auto* sub : {correctors, verify, solve, sweep})
    if (sub->parsed()) command = sub->get_name();

  try {
    std::ifstream is(config_path);
    Json raw;
    try {
      raw = Json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    RunConfig c = parse_config(raw);
    if (!out_dir.empty()) c.out_dir = out_dir;
    if (budget > 0.0) c.budget = budget;

    const fs::path out_path(c.out_dir);
    fs::create_directories(out_path);
    write_json(out_path / "manifest.json", manifest(command, c, workers));

    if (command == "correctors") return cmd_correctors(c, out_path, out);
    if (command == "verify") return cmd_verify(c, out_path, out, err);
    if (command == "solve") return cmd_solve(c, out_path, out);
    return cmd_sweep(c, out_path, workers, out);
  } catch (const std::exception& e) {
    err << "homlab: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace homlab::cli
