#include "homlab/json_io.hpp"

#include <string>
#include <vector>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

const Json& required(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

template <class T>
T number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
  }
  return v.get<T>();
}

Json complex_pair(Complex c) { return {{"re", c.real()}, {"im", c.imag()}}; }

}  // namespace

TrigField parse_modes(const Json& modes, int dim) {
  if (!modes.is_array()) throw ConfigError("potential.modes must be an array");
  if (dim <= 0) dim = modes.empty() ? 1 : static_cast<int>(modes.front().value("m", Json::array()).size());
  if (dim != 1 && dim != 2) throw ConfigError("potential.dim must be 1 or 2");

  std::vector<Mode> list;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string where = "potential.modes[" + std::to_string(i) + "]";
    const Json& entry = modes[i];
    if (!entry.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : entry.items())
      if (key != "m" && key != "n" && key != "re" && key != "im")
        throw ConfigError(where + ": unknown key '" + key + "'");
    const Json& m = required(entry, "m", where);
    if (!m.is_array() || static_cast<int>(m.size()) != dim)
      throw ConfigError(where + ".m must list " + std::to_string(dim) + " integer(s)");
    Mode mode;
    for (int a = 0; a < dim; ++a) mode.m[a] = number<int>(m[a], where + ".m");
    mode.n = number<int>(required(entry, "n", where), where + ".n");
    const double re = entry.contains("re") ? number<double>(entry["re"], where + ".re") : 0.0;
    const double im = entry.contains("im") ? number<double>(entry["im"], where + ".im") : 0.0;
    mode.c = {re, im};
    list.push_back(mode);
  }
  return TrigField::from_modes(dim, list);
}

Json to_json(const TrigField& f) {
  Json modes = Json::array();
  for (const auto& [key, c] : f.modes()) {
    Json m = Json::array();
    for (int a = 0; a < f.dim(); ++a) m.push_back(key.m[a]);
    modes.push_back({{"m", m}, {"n", key.n}, {"re", c.real()}, {"im", c.imag()}});
  }
  return {{"dim", f.dim()}, {"modes", modes}};
}

Json to_json(const ScalarSeries& s) {
  Json modes = Json::array();
  for (const auto& [n, c] : s.coeffs()) modes.push_back({{"n", n}, {"re", c.real()}, {"im", c.imag()}});
  return {{"modes", modes}};
}

Json to_json(const SpatialField& f) {
  Json modes = Json::array();
  for (const auto& [m, c] : f.coeffs()) {
    Json mj = Json::array();
    for (int a = 0; a < f.dim(); ++a) mj.push_back(m[a]);
    Json entry = {{"m", mj}};
    entry.update(complex_pair(c));
    modes.push_back(entry);
  }
  return {{"dim", f.dim()}, {"modes", modes}};
}

Json to_json(const RegimeSpec& r) {
  return {{"k", r.k},
          {"gamma_mode", to_string(r.gamma_mode)},
          {"gamma", r.gamma},
          {"assumption", to_string(r.assumption)},
          {"theorem", to_string(r.theorem)},
          {"rate_exponent", r.rate_exponent},
          {"recipe", to_string(r.recipe)},
          {"sign_override", to_string(r.sign_override)}};
}

Json to_json(const EffectivePotential& e) {
  Json j;
  j["kind"] = e.kind == EffectivePotential::Kind::constant ? "constant" : "time_series";
  if (e.kind == EffectivePotential::Kind::constant)
    j["value"] = e.value;
  else
    j["series"] = to_json(e.series);
  j["sign_flipped"] = e.sign_flipped;
  return j;
}

Json to_json(const IdentityReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"id", c.id}, {"description", c.description}, {"residual", c.residual}, {"pass", c.pass}});
  return {{"tolerance", r.tolerance}, {"all_pass", r.all_pass()}, {"checks", checks}};
}

Json to_json(const GridSpec& g) {
  return {{"d", g.d}, {"nx", g.nx}, {"h", g.h()}, {"T", g.T}, {"dt", g.dt}, {"checkpoints", g.checkpoints},
          {"steps", g.steps()}};
}

Json to_json(const SourceDescriptor& f) {
  Json terms = Json::array();
  for (const auto& t : f.terms)
    terms.push_back({{"amp", t.amp}, {"j", t.j}, {"sigma", t.sigma}, {"omega", t.omega}});
  return terms;
}

Json to_json(const InitialDescriptor& g) {
  Json terms = Json::array();
  for (const auto& t : g.terms) terms.push_back({{"amp", t.amp}, {"j", t.j}});
  return terms;
}

}  // namespace homlab
