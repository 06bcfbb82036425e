#include "homlab/regimes.hpp"

#include <cmath>
#include <stdexcept>

#include "homlab/errors.hpp"

namespace homlab {

double theoretical_rate(double k, Theorem theorem) {
  switch (theorem) {
    case Theorem::T3_1:
      return 1.0;
    case Theorem::T3_2:
      return std::min(k - 2.0, 1.0);
    case Theorem::T3_3:
      return std::min(2.0 - k, k - 1.0);
    case Theorem::T3_4_kpos:
      return k;
    case Theorem::T3_4_k0:
      return 1.0;
    case Theorem::T3_6:
      return k - 2.0;
  }
  throw std::invalid_argument("unknown theorem");
}

RegimeSpec resolve_regime(double k, GammaMode gamma_mode, const TrigField& W, SignOverride sign) {
  if (gamma_mode == GammaMode::k_minus_1 && k > 3.0)
    throw UnsupportedK("gamma = k-1 with k > 3 has no nontrivial effective potential; no correct gamma exists");

  RegimeSpec r;
  r.k = k;
  r.gamma_mode = gamma_mode;
  r.sign_override = sign;
  r.assumption = classify_assumption(W, k, gamma_mode);

  switch (r.assumption) {
    case AssumptionId::A1:
      r.gamma = k - 1.0;
      r.theorem = Theorem::T3_6;
      r.recipe = CorrectorRecipe::tau_chain_chi4;
      break;
    case AssumptionId::A2:
      r.theorem = Theorem::T3_3;
      r.recipe = CorrectorRecipe::elliptic_chi3;
      break;
    case AssumptionId::A3:
      r.theorem = Theorem::T3_1;
      r.recipe = CorrectorRecipe::parabolic_chi1;
      break;
    case AssumptionId::A4:
      r.theorem = Theorem::T3_2;
      r.recipe = CorrectorRecipe::elliptic_chi2;
      break;
    case AssumptionId::A5:
      r.theorem = k == 0.0 ? Theorem::T3_4_k0 : Theorem::T3_4_kpos;
      r.recipe = k == 0.0 ? CorrectorRecipe::chi3_time_series : CorrectorRecipe::elliptic_chi3;
      break;
  }
  r.rate_exponent = theoretical_rate(k, r.theorem);
  return r;
}

void check_consistency(const RegimeSpec& r) {
  const auto fail = [&](const char* what) {
    throw std::invalid_argument(std::string("inconsistent regime: ") + what);
  };
  const bool unit = r.gamma == 1.0;
  switch (r.theorem) {
    case Theorem::T3_1:
      if (!(r.k == 2.0 && unit)) fail("T3_1 needs k=2, gamma=1");
      break;
    case Theorem::T3_2:
      if (!(r.k > 2.0 && unit)) fail("T3_2 needs k>2, gamma=1");
      break;
    case Theorem::T3_3:
      if (!(r.k > 1.0 && r.k < 2.0 && unit)) fail("T3_3 needs 1<k<2, gamma=1");
      break;
    case Theorem::T3_4_kpos:
      if (!(r.k > 0.0 && r.k <= 1.0 && unit)) fail("T3_4 needs 0<k<=1, gamma=1");
      break;
    case Theorem::T3_4_k0:
      if (!(r.k == 0.0 && unit)) fail("T3_4 (k=0) needs k=0, gamma=1");
      break;
    case Theorem::T3_6:
      if (!(r.k > 2.0 && r.k <= 3.0 && r.gamma == r.k - 1.0)) fail("T3_6 needs 2<k<=3, gamma=k-1");
      break;
  }
  if (r.rate_exponent != theoretical_rate(r.k, r.theorem)) fail("rate exponent mismatch");
}

int chain_depth(double k) {
  if (!(k > 1.0 && k < 2.0)) throw std::invalid_argument("chain depth is defined for 1 < k < 2");
  int i = static_cast<int>(std::ceil(k / (k - 1.0)));
  // guard against k/(k-1) landing a hair above an integer
  if ((i - 1) * (k - 1.0) >= k) --i;
  return std::max(i, 1);
}

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::T3_1:
      return "T3_1";
    case Theorem::T3_2:
      return "T3_2";
    case Theorem::T3_3:
      return "T3_3";
    case Theorem::T3_4_kpos:
      return "T3_4_kpos";
    case Theorem::T3_4_k0:
      return "T3_4_k0";
    case Theorem::T3_6:
      return "T3_6";
  }
  return "?";
}

std::string to_string(CorrectorRecipe r) {
  switch (r) {
    case CorrectorRecipe::parabolic_chi1:
      return "parabolic_chi1";
    case CorrectorRecipe::elliptic_chi2:
      return "elliptic_chi2";
    case CorrectorRecipe::elliptic_chi3:
      return "elliptic_chi3";
    case CorrectorRecipe::chi3_time_series:
      return "chi3_time_series";
    case CorrectorRecipe::tau_chain_chi4:
      return "tau_chain_chi4";
  }
  return "?";
}

std::string to_string(SignOverride s) { return s == SignOverride::flip ? "flip" : "none"; }

SignOverride parse_sign_override(const std::string& s) {
  if (s == "none") return SignOverride::none;
  if (s == "flip") return SignOverride::flip;
  throw std::invalid_argument("unknown sign_override '" + s + "' (expected none or flip)");
}

}  // namespace homlab
