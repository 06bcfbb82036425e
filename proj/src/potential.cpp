#include "homlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

SpatialFreq negate(const SpatialFreq& m) { return {-m[0], -m[1]}; }
ModeKey negate(const ModeKey& k) { return {negate(k.m), -k.n}; }

bool consistent(Complex a, Complex b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-14 * scale;
}

std::string describe(const SpatialFreq& m, int dim) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << m[i];
  os << ")";
  return os.str();
}

// exp(2 pi i x) with the argument reduced to [0, 1) first.
Complex unit_phase(long double x) { return std::polar(1.0, kTwoPi * unit_fraction(x)); }

template <class Map, class Key>
void accumulate(Map& map, const Key& key, Complex c) {
  if (c == Complex{}) return;
  auto [it, inserted] = map.try_emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex{}) map.erase(it);
  }
}

template <class Map>
double max_abs(const Map& map) {
  double r = 0.0;
  for (const auto& [k, c] : map) r = std::max(r, std::abs(c));
  return r;
}

}  // namespace

ScalarSeries ScalarSeries::from_terms(std::span<const std::pair<int, Complex>> terms) {
  std::map<int, Complex> given;
  for (const auto& [n, c] : terms) {
    auto [it, inserted] = given.try_emplace(n, c);
    if (!inserted && !consistent(it->second, c))
      throw InvalidPotential("inconsistent duplicate for temporal mode " + std::to_string(n));
  }
  ScalarSeries s;
  for (const auto& [n, c] : given) {
    auto partner = given.find(-n);
    if (partner != given.end()) {
      if (!consistent(partner->second, std::conj(c)))
        throw InvalidPotential("temporal mode " + std::to_string(n) +
                               " has a non-conjugate Hermitian partner");
      s.add(n, n == 0 ? Complex{c.real(), 0.0} : c);
    } else {
      s.add(n, c);
      s.add(-n, std::conj(c));
    }
  }
  return s;
}

Complex ScalarSeries::coeff(int n) const {
  auto it = coeffs_.find(n);
  return it == coeffs_.end() ? Complex{} : it->second;
}

void ScalarSeries::add(int n, Complex c) { accumulate(coeffs_, n, c); }

double ScalarSeries::operator()(double tau) const {
  Complex sum{};
  for (const auto& [n, c] : coeffs_) sum += c * unit_phase(static_cast<long double>(n) * tau);
  return sum.real();
}

double ScalarSeries::integral(double ta, double tb) const {
  // e^{2 pi i n tb} - e^{2 pi i n ta} = 2i sin(pi n (tb - ta)) e^{2 pi i n (ta + tb) / 2}
  const long double mid = 0.5L * (static_cast<long double>(ta) + tb);
  const double width = tb - ta;
  Complex sum{};
  for (const auto& [n, c] : coeffs_) {
    if (n == 0) {
      sum += c * width;
    } else {
      const double s = std::sin(kPi * n * width) / (kPi * n);
      sum += c * s * unit_phase(static_cast<long double>(n) * mid);
    }
  }
  return sum.real();
}

ScalarSeries ScalarSeries::antiderivative() const {
  if (coeff(0) != Complex{})
    throw NonPeriodicAntiderivative("series has a nonzero mean; its antiderivative is not periodic");
  ScalarSeries r;
  for (const auto& [n, c] : coeffs_) {
    const Complex a = c / Complex(0.0, kTwoPi * n);
    r.add(n, a);
    r.add(0, -a);
  }
  return r;
}

double ScalarSeries::max_abs_coeff() const { return max_abs(coeffs_); }

ScalarSeries& ScalarSeries::operator+=(const ScalarSeries& o) {
  for (const auto& [n, c] : o.coeffs_) add(n, c);
  return *this;
}

ScalarSeries& ScalarSeries::operator-=(const ScalarSeries& o) {
  for (const auto& [n, c] : o.coeffs_) add(n, -c);
  return *this;
}

ScalarSeries& ScalarSeries::operator*=(double s) {
  if (s == 0.0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [n, c] : coeffs_) c *= s;
  return *this;
}

ScalarSeries operator*(const ScalarSeries& a, const ScalarSeries& b) {
  ScalarSeries r;
  for (const auto& [na, ca] : a.coeffs_)
    for (const auto& [nb, cb] : b.coeffs_) r.add(na + nb, ca * cb);
  return r;
}

SpatialField::SpatialField(int dim) : dim_(dim) {
  if (dim < 1 || dim > 2) throw InvalidPotential("spatial dimension must be 1 or 2");
}

Complex SpatialField::coeff(const SpatialFreq& m) const {
  auto it = coeffs_.find(m);
  return it == coeffs_.end() ? Complex{} : it->second;
}

void SpatialField::add(const SpatialFreq& m, Complex c) { accumulate(coeffs_, m, c); }

double SpatialField::operator()(const Point& y) const {
  Complex sum{};
  for (const auto& [m, c] : coeffs_) {
    long double phase = 0.0L;
    for (int i = 0; i < dim_; ++i) phase += static_cast<long double>(m[i]) * y[i];
    sum += c * unit_phase(phase);
  }
  return sum.real();
}

double SpatialField::max_abs_coeff() const { return max_abs(coeffs_); }

SpatialField& SpatialField::operator+=(const SpatialField& o) {
  for (const auto& [m, c] : o.coeffs_) add(m, c);
  return *this;
}

SpatialField& SpatialField::operator-=(const SpatialField& o) {
  for (const auto& [m, c] : o.coeffs_) add(m, -c);
  return *this;
}

SpatialField& SpatialField::operator*=(double s) {
  if (s == 0.0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [m, c] : coeffs_) c *= s;
  return *this;
}

TrigField::TrigField(int dim) : dim_(dim) {
  if (dim < 1 || dim > 2) throw InvalidPotential("spatial dimension must be 1 or 2");
}

TrigField TrigField::from_modes(int dim, std::span<const Mode> modes) {
  TrigField out(dim);
  std::map<ModeKey, Complex> given;
  for (const auto& mode : modes) {
    for (int i = dim; i < 2; ++i)
      if (mode.m[i] != 0) throw InvalidPotential("mode has more spatial components than dim");
    const ModeKey key{mode.m, mode.n};
    auto [it, inserted] = given.try_emplace(key, mode.c);
    if (!inserted && !consistent(it->second, mode.c))
      throw InvalidPotential("inconsistent duplicate for mode m=" + describe(mode.m, dim) +
                             " n=" + std::to_string(mode.n));
  }
  for (const auto& [key, c] : given) {
    const ModeKey partner_key = negate(key);
    auto partner = given.find(partner_key);
    if (partner != given.end()) {
      if (!consistent(partner->second, std::conj(c)))
        throw InvalidPotential("mode m=" + describe(key.m, dim) + " n=" + std::to_string(key.n) +
                               " has a non-conjugate Hermitian partner");
      out.add(key, key == partner_key ? Complex{c.real(), 0.0} : c);
    } else {
      out.add(key, c);
      out.add(partner_key, std::conj(c));
    }
  }
  return out;
}

TrigField TrigField::constant(int dim, double value) {
  TrigField f(dim);
  f.add(ModeKey{}, value);
  return f;
}

TrigField TrigField::cosine(int dim, SpatialFreq m, int n, double amp) {
  TrigField f(dim);
  const ModeKey key{m, n};
  if (key == ModeKey{}) {
    f.add(key, amp);
  } else {
    f.add(key, 0.5 * amp);
    f.add(negate(key), 0.5 * amp);
  }
  return f;
}

TrigField TrigField::sine(int dim, SpatialFreq m, int n, double amp) {
  TrigField f(dim);
  const ModeKey key{m, n};
  if (key == ModeKey{}) return f;
  // sin(z) = (e^{iz} - e^{-iz}) / (2i)
  f.add(key, Complex(0.0, -0.5 * amp));
  f.add(negate(key), Complex(0.0, 0.5 * amp));
  return f;
}

TrigField TrigField::lift(const SpatialField& s) {
  TrigField f(s.dim());
  for (const auto& [m, c] : s.coeffs()) f.add({m, 0}, c);
  return f;
}

TrigField TrigField::lift(const ScalarSeries& s, int dim) {
  TrigField f(dim);
  for (const auto& [n, c] : s.coeffs()) f.add({SpatialFreq{}, n}, c);
  return f;
}

Complex TrigField::coeff(const ModeKey& k) const {
  auto it = modes_.find(k);
  return it == modes_.end() ? Complex{} : it->second;
}

void TrigField::add(const ModeKey& k, Complex c) { accumulate(modes_, k, c); }

double TrigField::evaluate(const Point& y, double tau) const {
  Complex sum{};
  for (const auto& [k, c] : modes_) {
    long double phase = static_cast<long double>(k.n) * tau;
    for (int i = 0; i < dim_; ++i) phase += static_cast<long double>(k.m[i]) * y[i];
    sum += c * unit_phase(phase);
  }
  return sum.real();
}

double TrigField::max_abs_coeff() const { return max_abs(modes_); }

double TrigField::l1_norm() const {
  double r = 0.0;
  for (const auto& [k, c] : modes_) r += std::abs(c);
  return r;
}

double TrigField::hermitian_defect() const {
  double r = 0.0;
  for (const auto& [k, c] : modes_) r = std::max(r, std::abs(c - std::conj(coeff(negate(k)))));
  return r;
}

TrigField TrigField::pruned(double tol) const {
  TrigField r(dim_);
  for (const auto& [k, c] : modes_)
    if (std::abs(c) > tol) r.modes_.emplace(k, c);
  return r;
}

TrigField TrigField::without_tau_mean() const {
  TrigField r(dim_);
  for (const auto& [k, c] : modes_)
    if (k.n != 0) r.modes_.emplace(k, c);
  return r;
}

TrigField TrigField::without_y_mean() const {
  TrigField r(dim_);
  for (const auto& [k, c] : modes_)
    if (k.m != SpatialFreq{}) r.modes_.emplace(k, c);
  return r;
}

TrigField& TrigField::operator+=(const TrigField& o) {
  if (o.dim_ != dim_) throw InvalidPotential("dimension mismatch in field sum");
  for (const auto& [k, c] : o.modes_) add(k, c);
  return *this;
}

TrigField& TrigField::operator-=(const TrigField& o) {
  if (o.dim_ != dim_) throw InvalidPotential("dimension mismatch in field difference");
  for (const auto& [k, c] : o.modes_) add(k, -c);
  return *this;
}

TrigField& TrigField::operator*=(double s) {
  if (s == 0.0) {
    modes_.clear();
    return *this;
  }
  for (auto& [k, c] : modes_) c *= s;
  return *this;
}

TrigField operator*(const TrigField& a, const TrigField& b) {
  if (a.dim_ != b.dim_) throw InvalidPotential("dimension mismatch in field product");
  TrigField r(a.dim_);
  for (const auto& [ka, ca] : a.modes_)
    for (const auto& [kb, cb] : b.modes_)
      r.add({{ka.m[0] + kb.m[0], ka.m[1] + kb.m[1]}, ka.n + kb.n}, ca * cb);
  return r;
}

double mean_full(const TrigField& f) { return f.coeff(ModeKey{}).real(); }

ScalarSeries mean_y(const TrigField& f) {
  ScalarSeries s;
  for (const auto& [k, c] : f.modes())
    if (k.m == SpatialFreq{}) s.add(k.n, c);
  return s;
}

SpatialField mean_tau(const TrigField& f) {
  SpatialField s(f.dim());
  for (const auto& [k, c] : f.modes())
    if (k.n == 0) s.add(k.m, c);
  return s;
}

double mean_of_product(const TrigField& a, const TrigField& b) {
  Complex sum{};
  for (const auto& [k, c] : a.modes()) sum += c * b.coeff(negate(k));
  return sum.real();
}

TrigField antiderivative_tau(const TrigField& f) {
  TrigField r(f.dim());
  for (const auto& [k, c] : f.modes()) {
    if (k.n == 0)
      throw NonPeriodicAntiderivative("mode m=" + describe(k.m, f.dim()) +
                                      " has n=0; the tau-antiderivative is not periodic");
    const Complex a = c / Complex(0.0, kTwoPi * k.n);
    r.add(k, a);
    r.add({k.m, 0}, -a);
  }
  return r;
}

TrigField derivative_tau(const TrigField& f) {
  TrigField r(f.dim());
  for (const auto& [k, c] : f.modes()) r.add(k, c * Complex(0.0, kTwoPi * k.n));
  return r;
}

std::vector<TrigField> grad_y(const TrigField& f) {
  std::vector<TrigField> g(f.dim(), TrigField(f.dim()));
  for (const auto& [k, c] : f.modes())
    for (int i = 0; i < f.dim(); ++i) g[i].add(k, c * Complex(0.0, kTwoPi * k.m[i]));
  return g;
}

TrigField laplacian_y(const TrigField& f) {
  TrigField r(f.dim());
  for (const auto& [k, c] : f.modes()) {
    const double m2 = static_cast<double>(k.m[0]) * k.m[0] + static_cast<double>(k.m[1]) * k.m[1];
    r.add(k, -c * (kTwoPi * kTwoPi * m2));
  }
  return r;
}

TrigField dot(std::span<const TrigField> a, std::span<const TrigField> b) {
  if (a.size() != b.size() || a.empty()) throw InvalidPotential("gradient size mismatch");
  TrigField r(a.front().dim());
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}

std::string to_string(AssumptionId a) { return "A" + std::to_string(static_cast<int>(a)); }

std::string to_string(GammaMode g) { return g == GammaMode::unit ? "unit" : "k_minus_1"; }

GammaMode parse_gamma_mode(const std::string& s) {
  if (s == "unit") return GammaMode::unit;
  if (s == "k_minus_1") return GammaMode::k_minus_1;
  throw InvalidPotential("unknown gamma mode '" + s + "' (expected unit or k_minus_1)");
}

AssumptionId classify_assumption(const TrigField& W, double k, GammaMode gamma_mode) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw NoApplicableRegime("k must be finite and nonnegative");

  const auto require_mean_zero = [&](AssumptionId id) {
    if (W.coeff(ModeKey{}) != Complex{})
      throw NoApplicableRegime("Assumption " + std::to_string(static_cast<int>(id)) +
                               " requires M(W)=0: mean-zero violated");
    return id;
  };

  if (gamma_mode == GammaMode::k_minus_1) {
    if (!(k > 2.0 && k <= 3.0))
      throw NoApplicableRegime("gamma = k-1 is only admissible for 2 < k <= 3 (Assumption 1)");
    for (const auto& [key, c] : W.modes())
      if (key.n == 0)
        throw NoApplicableRegime("Assumption 1 requires M_tau(W)(y)=0 for every y: W has the n=0 mode m=" +
                                 describe(key.m, W.dim()));
    return AssumptionId::A1;
  }

  if (k <= 1.0) {
    for (const auto& [key, c] : W.modes())
      if (key.m == SpatialFreq{})
        throw NoApplicableRegime("Assumption 5 requires M_y(W)(tau)=0 for every tau: W has the m=0 mode n=" +
                                 std::to_string(key.n));
    return AssumptionId::A5;
  }
  if (k < 2.0) return require_mean_zero(AssumptionId::A2);
  if (k == 2.0) return require_mean_zero(AssumptionId::A3);
  return require_mean_zero(AssumptionId::A4);
}

double unit_fraction(long double x) {
  long double f = x - std::floor(x);
  if (f >= 1.0L) f -= 1.0L;
  if (f < 0.0L) f = 0.0L;
  return static_cast<double>(f);
}

std::vector<double> sample_oscillated(const TrigField& W, double eps, double k, double gamma,
                                      std::span<const Point> x, double t) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidPotential("eps must lie in (0, 1)");
  const long double inv_eps = 1.0L / static_cast<long double>(eps);
  const double tau = unit_fraction(static_cast<long double>(t) / std::pow(static_cast<long double>(eps), k));
  const double amp = std::pow(eps, -gamma);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Point y{};
    for (int a = 0; a < W.dim(); ++a) y[a] = unit_fraction(static_cast<long double>(x[i][a]) * inv_eps);
    out[i] = amp * W.evaluate(y, tau);
  }
  return out;
}

}  // namespace homlab
