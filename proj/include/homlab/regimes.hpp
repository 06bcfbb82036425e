#pragma once

#include <string>

#include "homlab/potential.hpp"

namespace homlab {

enum class Theorem { T3_1, T3_2, T3_3, T3_4_kpos, T3_4_k0, T3_6 };

// Which corrector carries the effective potential of a regime.
enum class CorrectorRecipe {
  parabolic_chi1,    // d_tau chi1 - Lap_y chi1 = W
  elliptic_chi2,     // Lap_y chi2 = M_tau(W)
  elliptic_chi3,     // Lap_y chi3 = W - M_y(W), constant average
  chi3_time_series,  // same corrector, average kept as a function of t
  tau_chain_chi4,    // chi4 = int chi5~, chi5 = int W
};

enum class SignOverride { none, flip };

struct RegimeSpec {
  double k = 0.0;
  GammaMode gamma_mode = GammaMode::unit;
  double gamma = 1.0;
  AssumptionId assumption = AssumptionId::A3;
  Theorem theorem = Theorem::T3_1;
  double rate_exponent = 1.0;
  CorrectorRecipe recipe = CorrectorRecipe::parabolic_chi1;
  SignOverride sign_override = SignOverride::none;
};

/// Maps (k, gamma mode, W) to its governing theorem. Throws UnsupportedK for
/// gamma = k-1 beyond k = 3 and NoApplicableRegime when W violates the
/// matching assumption.
RegimeSpec resolve_regime(double k, GammaMode gamma_mode, const TrigField& W,
                          SignOverride sign = SignOverride::none);

/// Exponent of the dominant power of eps in the theorem's error bound.
double theoretical_rate(double k, Theorem theorem);

/// Throws std::invalid_argument if (theorem, k, gamma) are inconsistent or the
/// stored exponent disagrees with theoretical_rate.
void check_consistency(const RegimeSpec& r);

/// Smallest positive integer I with I (k - 1) >= k, defined for 1 < k < 2.
int chain_depth(double k);

std::string to_string(Theorem t);
std::string to_string(CorrectorRecipe r);
std::string to_string(SignOverride s);
SignOverride parse_sign_override(const std::string& s);

}  // namespace homlab
