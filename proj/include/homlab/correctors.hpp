#pragma once

// Cell problems solved exactly in coefficient space, the effective potentials
// built from them, and the energy identities that tie correctors to W.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homlab/potential.hpp"
#include "homlab/regimes.hpp"

namespace homlab {

/// d_tau chi1 - Lap_y chi1 = W with M(chi1) = 0.
TrigField solve_chi1(const TrigField& W);
/// Lap_y chi2 = M_tau(W) with M_y(chi2) = 0.
SpatialField solve_chi2(const TrigField& W);
/// Lap_y chi3 = W - M_y(W) for every tau, M_y(chi3)(tau) = 0.
TrigField solve_chi3(const TrigField& W);

struct Chi5Chain {
  TrigField chi5;
  TrigField chi5_tilde;
  TrigField chi4;
};

/// chi5 = int_0^tau W, chi5~ = chi5 - M_tau(chi5), chi4 = int_0^tau chi5~.
Chi5Chain chi5_chain(const TrigField& W);

/// chi_{3-1} = int_0^tau W4 and chi_{3-i} = int_0^tau chi_{3-(i-1)} W4 with
/// W4 = M_y(W). Each stage is checked for M_tau(chi_{3-i} W4) = 0.
std::vector<ScalarSeries> chi3_chain(const TrigField& W, int count);

/// chi7 = int_0^tau chi5~ W.
TrigField solve_chi7(const TrigField& W);

struct EffectivePotential {
  enum class Kind { constant, time_series };
  Kind kind = Kind::constant;
  double value = 0.0;
  ScalarSeries series;
  bool sign_flipped = false;

  static EffectivePotential constant(double v) { return {Kind::constant, v, {}, false}; }

  double at(double t) const { return kind == Kind::constant ? value : series(t); }
  /// int_{ta}^{tb} c_eff(s) ds in closed form.
  double integral(double ta, double tb) const;
};

/// c_eff such that the homogenized problem reads d_t u0 - Lap u0 + c_eff u0 = f.
EffectivePotential effective_potential(const RegimeSpec& regime, const TrigField& W);

struct CorrectorSet {
  RegimeSpec regime;
  // Name of the regime's primary corrector inside `fields`.
  std::string primary;
  // Every corrector whose solvability condition W satisfies: chi1, chi2, chi3,
  // chi5, chi5_tilde, chi4, chi7.
  std::map<std::string, TrigField> fields;
  // chi_{3-1} .. chi_{3-(I_k+1)} for 1 < k < 2, as a diagnostic.
  std::vector<ScalarSeries> chain;
  std::optional<int> chain_depth;
  EffectivePotential effective;

  const TrigField& chi() const { return fields.at(primary); }
};

CorrectorSet compute_correctors(const RegimeSpec& regime, const TrigField& W);

struct IdentityCheck {
  std::string id;
  std::string description;
  double residual = 0.0;
  bool pass = true;
};

struct IdentityReport {
  double tolerance = 1e-10;
  std::vector<IdentityCheck> checks;

  bool all_pass() const;
  const IdentityCheck* first_failure() const;
};

/// Cell-problem residuals plus the identities (a)-(f) and the chain
/// vanishing averages, each evaluated from the correctors in `set`.
IdentityReport identity_report(const TrigField& W, const CorrectorSet& set, double tolerance = 1e-10);
IdentityReport identity_report(const TrigField& W, const RegimeSpec& regime, double tolerance = 1e-10);

}  // namespace homlab
