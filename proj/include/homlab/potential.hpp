#pragma once

// Exact algebra for real 1-periodic functions on T^d x T stored as finite
// trigonometric polynomials  f(y, tau) = sum_k c_k exp(2 pi i (m.y + n tau)).
//
// Every field keeps both members of each Hermitian pair (k, -k) so that the
// coefficient tables are directly usable in convolutions; all operations below
// preserve that symmetry.

#include <array>
#include <complex>
#include <compare>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace homlab {

using Complex = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Spatial frequency vector. Only the first dim() entries are meaningful; the
// rest stay zero.
using SpatialFreq = std::array<int, 2>;
// A point of T^d or of Omega; same padding convention as SpatialFreq.
using Point = std::array<double, 2>;

struct ModeKey {
  SpatialFreq m{};
  int n = 0;
  auto operator<=>(const ModeKey&) const = default;
};

struct Mode {
  SpatialFreq m{};
  int n = 0;
  Complex c{};
};

/// Real period-1 function of tau alone.
class ScalarSeries {
 public:
  ScalarSeries() = default;

  /// Completes Hermitian partners. A term given together with an inconsistent
  /// partner is rejected with InvalidPotential.
  static ScalarSeries from_terms(std::span<const std::pair<int, Complex>> terms);

  const std::map<int, Complex>& coeffs() const { return coeffs_; }
  Complex coeff(int n) const;
  bool is_zero() const { return coeffs_.empty(); }

  double operator()(double tau) const;
  double mean() const { return coeff(0).real(); }
  /// Exact value of the integral of the series over [ta, tb].
  double integral(double ta, double tb) const;
  /// tau -> int_0^tau f; requires a vanishing mean.
  ScalarSeries antiderivative() const;

  double max_abs_coeff() const;

  ScalarSeries& operator+=(const ScalarSeries& o);
  ScalarSeries& operator-=(const ScalarSeries& o);
  ScalarSeries& operator*=(double s);
  friend ScalarSeries operator+(ScalarSeries a, const ScalarSeries& b) { return a += b; }
  friend ScalarSeries operator-(ScalarSeries a, const ScalarSeries& b) { return a -= b; }
  friend ScalarSeries operator*(ScalarSeries a, double s) { return a *= s; }
  friend ScalarSeries operator*(double s, ScalarSeries a) { return a *= s; }
  friend ScalarSeries operator*(const ScalarSeries& a, const ScalarSeries& b);

  void add(int n, Complex c);

 private:
  std::map<int, Complex> coeffs_;
};

/// Real period-1 function of y alone.
class SpatialField {
 public:
  explicit SpatialField(int dim = 1);

  int dim() const { return dim_; }
  const std::map<SpatialFreq, Complex>& coeffs() const { return coeffs_; }
  Complex coeff(const SpatialFreq& m) const;
  bool is_zero() const { return coeffs_.empty(); }

  double operator()(const Point& y) const;
  double mean() const { return coeff(SpatialFreq{}).real(); }
  double max_abs_coeff() const;

  SpatialField& operator+=(const SpatialField& o);
  SpatialField& operator-=(const SpatialField& o);
  SpatialField& operator*=(double s);
  friend SpatialField operator+(SpatialField a, const SpatialField& b) { return a += b; }
  friend SpatialField operator-(SpatialField a, const SpatialField& b) { return a -= b; }
  friend SpatialField operator*(SpatialField a, double s) { return a *= s; }

  void add(const SpatialFreq& m, Complex c);

 private:
  int dim_;
  std::map<SpatialFreq, Complex> coeffs_;
};

class TrigField {
 public:
  explicit TrigField(int dim = 1);

  /// Builds a field from a user-facing mode list: Hermitian partners are
  /// added when missing, duplicates must agree, and an explicitly listed
  /// partner must be the conjugate. Violations raise InvalidPotential.
  static TrigField from_modes(int dim, std::span<const Mode> modes);

  static TrigField constant(int dim, double value);
  /// amp * cos(2 pi (m.y + n tau))
  static TrigField cosine(int dim, SpatialFreq m, int n, double amp = 1.0);
  /// amp * sin(2 pi (m.y + n tau))
  static TrigField sine(int dim, SpatialFreq m, int n, double amp = 1.0);
  static TrigField lift(const SpatialField& f);
  static TrigField lift(const ScalarSeries& f, int dim);

  int dim() const { return dim_; }
  const std::map<ModeKey, Complex>& modes() const { return modes_; }
  Complex coeff(const ModeKey& k) const;
  bool is_zero() const { return modes_.empty(); }
  std::size_t size() const { return modes_.size(); }

  double evaluate(const Point& y, double tau) const;
  double operator()(const Point& y, double tau) const { return evaluate(y, tau); }

  /// Largest |c| over all modes.
  double max_abs_coeff() const;
  /// sum |c|, an upper bound for the sup norm.
  double l1_norm() const;
  /// Largest |c_k - conj(c_{-k})|.
  double hermitian_defect() const;

  /// Copy without modes whose amplitude is at most tol.
  TrigField pruned(double tol) const;
  /// Copy restricted to the modes with n != 0, i.e. f - M_tau(f).
  TrigField without_tau_mean() const;
  /// Copy restricted to the modes with m != 0, i.e. f - M_y(f).
  TrigField without_y_mean() const;

  TrigField& operator+=(const TrigField& o);
  TrigField& operator-=(const TrigField& o);
  TrigField& operator*=(double s);
  friend TrigField operator+(TrigField a, const TrigField& b) { return a += b; }
  friend TrigField operator-(TrigField a, const TrigField& b) { return a -= b; }
  friend TrigField operator-(TrigField a) { return a *= -1.0; }
  friend TrigField operator*(TrigField a, double s) { return a *= s; }
  friend TrigField operator*(double s, TrigField a) { return a *= s; }
  /// Pointwise product, computed as an exact coefficient convolution.
  friend TrigField operator*(const TrigField& a, const TrigField& b);

  /// Adds c to the coefficient of k. Callers are responsible for adding the
  /// conjugate partner; exact zeros are erased.
  void add(const ModeKey& k, Complex c);

 private:
  int dim_;
  std::map<ModeKey, Complex> modes_;
};

/// M(f): average over T^{d+1}.
double mean_full(const TrigField& f);
/// M_y(f)(tau): restriction to the m = 0 modes.
ScalarSeries mean_y(const TrigField& f);
/// M_tau(f)(y): restriction to the n = 0 modes.
SpatialField mean_tau(const TrigField& f);
/// M(a b) without forming the product.
double mean_of_product(const TrigField& a, const TrigField& b);

/// tau -> int_0^tau f(y, s) ds. Requires every n = 0 amplitude to vanish;
/// otherwise NonPeriodicAntiderivative.
TrigField antiderivative_tau(const TrigField& f);
TrigField derivative_tau(const TrigField& f);
std::vector<TrigField> grad_y(const TrigField& f);
TrigField laplacian_y(const TrigField& f);
/// sum_i a_i b_i for two gradient vectors.
TrigField dot(std::span<const TrigField> a, std::span<const TrigField> b);

enum class AssumptionId { A1 = 1, A2 = 2, A3 = 3, A4 = 4, A5 = 5 };
enum class GammaMode { unit, k_minus_1 };

std::string to_string(AssumptionId a);
std::string to_string(GammaMode g);
GammaMode parse_gamma_mode(const std::string& s);

/// Selects the assumption that (W, k, gamma mode) satisfies, or throws
/// NoApplicableRegime naming the first violated condition.
AssumptionId classify_assumption(const TrigField& W, double k, GammaMode gamma_mode);

/// Fractional part of x in [0, 1), computed in extended precision.
double unit_fraction(long double x);

/// eps^{-gamma} W(x / eps mod 1, t / eps^k mod 1) at every point.
std::vector<double> sample_oscillated(const TrigField& W, double eps, double k, double gamma,
                                      std::span<const Point> x, double t);

}  // namespace homlab
