#include "homlab/correctors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

double freq_norm2(const SpatialFreq& m) {
  return static_cast<double>(m[0]) * m[0] + static_cast<double>(m[1]) * m[1];
}

bool has_tau_constant_mode(const TrigField& W) {
  return std::any_of(W.modes().begin(), W.modes().end(), [](const auto& kv) { return kv.first.n == 0; });
}

void require_mean_zero(const TrigField& W, const char* who) {
  if (W.coeff(ModeKey{}) != Complex{})
    throw SolvabilityViolation(std::string(who) + ": M(W) != 0, the cell problem is not solvable");
}

void require_no_tau_constant(const TrigField& W, const char* who) {
  if (has_tau_constant_mode(W))
    throw SolvabilityViolation(std::string(who) + ": M_tau(W)(y) != 0 for some y");
}

double max_abs(const SpatialField& s) { return s.max_abs_coeff(); }

}  // namespace

TrigField solve_chi1(const TrigField& W) {
  require_mean_zero(W, "chi1");
  TrigField chi(W.dim());
  for (const auto& [k, c] : W.modes()) {
    const Complex symbol(kTwoPi * kTwoPi * freq_norm2(k.m), kTwoPi * k.n);
    chi.add(k, c / symbol);
  }
  return chi;
}

SpatialField solve_chi2(const TrigField& W) {
  require_mean_zero(W, "chi2");
  SpatialField chi(W.dim());
  for (const auto& [k, c] : W.modes()) {
    if (k.n != 0 || k.m == SpatialFreq{}) continue;
    chi.add(k.m, -c / (kTwoPi * kTwoPi * freq_norm2(k.m)));
  }
  return chi;
}

TrigField solve_chi3(const TrigField& W) {
  TrigField chi(W.dim());
  for (const auto& [k, c] : W.modes()) {
    if (k.m == SpatialFreq{}) continue;
    chi.add(k, -c / (kTwoPi * kTwoPi * freq_norm2(k.m)));
  }
  return chi;
}

Chi5Chain chi5_chain(const TrigField& W) {
  require_no_tau_constant(W, "chi5");
  Chi5Chain out;
  out.chi5 = antiderivative_tau(W);
  out.chi5_tilde = out.chi5.without_tau_mean();
  out.chi4 = antiderivative_tau(out.chi5_tilde);
  return out;
}

std::vector<ScalarSeries> chi3_chain(const TrigField& W, int count) {
  require_mean_zero(W, "chi3 chain");
  const ScalarSeries w4 = mean_y(W);
  double scale_base = 0.0;
  for (const auto& [n, c] : w4.coeffs()) scale_base += std::abs(c);
  scale_base = std::max(scale_base, 1.0);

  std::vector<ScalarSeries> chain;
  chain.reserve(std::max(count, 0));
  ScalarSeries integrand = w4;
  double scale = scale_base;
  for (int i = 1; i <= count; ++i) {
    ScalarSeries next = integrand.antiderivative();
    integrand = next * w4;
    scale *= scale_base;
    const double avg = std::abs(integrand.mean());
    if (avg > 1e-12 * scale) {
      std::ostringstream os;
      os << "M_tau(chi_{3-" << i << "} W4) = " << avg << " does not vanish";
      throw ChainIdentityViolation(os.str());
    }
    // The mean is zero analytically; drop the rounding residue so the next
    // antiderivative is periodic.
    integrand.add(0, -integrand.coeff(0));
    chain.push_back(std::move(next));
  }
  return chain;
}

TrigField solve_chi7(const TrigField& W) {
  require_no_tau_constant(W, "chi7");
  const Chi5Chain c5 = chi5_chain(W);
  const TrigField product = c5.chi5_tilde * W;
  const SpatialField tau_mean = mean_tau(product);
  const double scale = std::max(1.0, c5.chi5_tilde.l1_norm() * W.l1_norm());
  if (max_abs(tau_mean) > 1e-12 * scale)
    throw SolvabilityViolation("chi7: M_tau(chi5~ W) does not vanish");
  return antiderivative_tau(product.without_tau_mean());
}

double EffectivePotential::integral(double ta, double tb) const {
  if (kind == Kind::constant) return value * (tb - ta);
  return series.integral(ta, tb);
}

EffectivePotential effective_potential(const RegimeSpec& regime, const TrigField& W) {
  EffectivePotential eff;
  switch (regime.theorem) {
    case Theorem::T3_1:
      eff.value = -mean_of_product(solve_chi1(W), W);
      break;
    case Theorem::T3_2:
      eff.value = mean_of_product(TrigField::lift(solve_chi2(W)), W);
      break;
    case Theorem::T3_3:
    case Theorem::T3_4_kpos:
      eff.value = mean_of_product(solve_chi3(W), W);
      break;
    case Theorem::T3_4_k0:
      eff.kind = EffectivePotential::Kind::time_series;
      eff.series = mean_y(solve_chi3(W) * W);
      break;
    case Theorem::T3_6: {
      const Chi5Chain c5 = chi5_chain(W);
      const auto g4 = grad_y(c5.chi4);
      const auto gw = grad_y(W);
      double sum = 0.0;
      for (std::size_t i = 0; i < g4.size(); ++i) sum += mean_of_product(g4[i], gw[i]);
      eff.value = sum;
      break;
    }
  }
  if (regime.sign_override == SignOverride::flip) {
    eff.value = -eff.value;
    eff.series *= -1.0;
    eff.sign_flipped = true;
  }
  return eff;
}

CorrectorSet compute_correctors(const RegimeSpec& regime, const TrigField& W) {
  CorrectorSet set;
  set.regime = regime;
  const bool mean_zero = W.coeff(ModeKey{}) == Complex{};
  const bool tau_mean_zero = !has_tau_constant_mode(W);

  set.fields.emplace("chi3", solve_chi3(W));
  if (mean_zero) {
    set.fields.emplace("chi1", solve_chi1(W));
    set.fields.emplace("chi2", TrigField::lift(solve_chi2(W)));
  }
  if (tau_mean_zero) {
    Chi5Chain c5 = chi5_chain(W);
    set.fields.emplace("chi5", std::move(c5.chi5));
    set.fields.emplace("chi5_tilde", std::move(c5.chi5_tilde));
    set.fields.emplace("chi4", std::move(c5.chi4));
    set.fields.emplace("chi7", solve_chi7(W));
  }

  switch (regime.recipe) {
    case CorrectorRecipe::parabolic_chi1:
      set.primary = "chi1";
      break;
    case CorrectorRecipe::elliptic_chi2:
      set.primary = "chi2";
      break;
    case CorrectorRecipe::elliptic_chi3:
    case CorrectorRecipe::chi3_time_series:
      set.primary = "chi3";
      break;
    case CorrectorRecipe::tau_chain_chi4:
      set.primary = "chi4";
      break;
  }
  if (!set.fields.contains(set.primary))
    throw SolvabilityViolation("W does not satisfy the solvability condition of " + set.primary);

  if (regime.theorem == Theorem::T3_3) {
    set.chain_depth = chain_depth(regime.k);
    set.chain = chi3_chain(W, *set.chain_depth + 1);
  }
  set.effective = effective_potential(regime, W);
  return set;
}

bool IdentityReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.pass; });
}

const IdentityCheck* IdentityReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return &c;
  return nullptr;
}

IdentityReport identity_report(const TrigField& W, const CorrectorSet& set, double tolerance) {
  IdentityReport report;
  report.tolerance = tolerance;
  const auto record = [&](std::string id, std::string description, double residual) {
    report.checks.push_back({std::move(id), std::move(description), residual,
                             std::isfinite(residual) && residual <= tolerance});
  };
  const auto field = [&](const char* name) -> const TrigField* {
    auto it = set.fields.find(name);
    return it == set.fields.end() ? nullptr : &it->second;
  };
  const auto grad_sq = [](const TrigField& f) {
    const auto g = grad_y(f);
    double s = 0.0;
    for (const auto& gi : g) s += mean_of_product(gi, gi);
    return s;
  };

  // Cell-problem residuals, coefficient-wise.
  if (const auto* chi1 = field("chi1"))
    record("cell_chi1", "d_tau chi1 - Lap_y chi1 - W = 0",
           (derivative_tau(*chi1) - laplacian_y(*chi1) - W).max_abs_coeff());
  if (const auto* chi2 = field("chi2"))
    record("cell_chi2", "Lap_y chi2 - M_tau(W) = 0",
           (laplacian_y(*chi2) - TrigField::lift(mean_tau(W))).max_abs_coeff());
  if (const auto* chi3 = field("chi3"))
    record("cell_chi3", "Lap_y chi3 - (W - M_y(W)) = 0",
           (laplacian_y(*chi3) - W.without_y_mean()).max_abs_coeff());
  if (const auto* chi5 = field("chi5"))
    record("cell_chi5", "d_tau chi5 - W = 0", (derivative_tau(*chi5) - W).max_abs_coeff());
  if (const auto* chi4 = field("chi4"); chi4 && field("chi5_tilde"))
    record("cell_chi4", "d_tau chi4 - chi5~ = 0",
           (derivative_tau(*chi4) - *field("chi5_tilde")).max_abs_coeff());
  if (const auto* chi7 = field("chi7"); chi7 && field("chi5_tilde"))
    record("cell_chi7", "d_tau chi7 - chi5~ W = 0",
           (derivative_tau(*chi7) - *field("chi5_tilde") * W).max_abs_coeff());

  // (a) M(|grad chi1|^2) = M(chi1 W)
  if (const auto* chi1 = field("chi1"))
    record("a", "M(|grad_y chi1|^2) - M(chi1 W) = 0", std::abs(grad_sq(*chi1) - mean_of_product(*chi1, W)));
  // (b) M(|grad chi2|^2) + M(chi2 W) = 0
  if (const auto* chi2 = field("chi2"))
    record("b", "M(|grad_y chi2|^2) + M(chi2 W) = 0", std::abs(grad_sq(*chi2) + mean_of_product(*chi2, W)));
  // (c) M(|grad chi3|^2) + M(chi3 W) = 0
  if (const auto* chi3 = field("chi3"))
    record("c", "M(|grad_y chi3|^2) + M(chi3 W) = 0", std::abs(grad_sq(*chi3) + mean_of_product(*chi3, W)));
  // (d) M(grad chi4 . grad W) + M(|grad chi5~|^2) = 0
  if (const auto* chi4 = field("chi4"); chi4 && field("chi5_tilde")) {
    const auto g4 = grad_y(*chi4);
    const auto gw = grad_y(W);
    double cross = 0.0;
    for (std::size_t i = 0; i < g4.size(); ++i) cross += mean_of_product(g4[i], gw[i]);
    record("d", "M(grad_y chi4 . grad_y W) + M(|grad_y chi5~|^2) = 0",
           std::abs(cross + grad_sq(*field("chi5_tilde"))));
  }

  // (e) averages that vanish in the trivial regimes.
  if (const auto* chi5 = field("chi5"))
    record("e_case1", "M(W int_0^tau W) = 0 when M_tau(W) = 0", std::abs(mean_of_product(W, *chi5)));
  if (W.coeff(ModeKey{}) == Complex{}) {
    const ScalarSeries w4 = mean_y(W);
    const ScalarSeries x1 = w4.antiderivative();
    const ScalarSeries x1w4 = x1 * w4;
    record("e_case5", "M(W int_0^tau M_y(W)) = 0 when M(W) = 0",
           std::abs(mean_full(W * TrigField::lift(x1, W.dim()))));
    ScalarSeries inner = x1w4;
    inner.add(0, -inner.coeff(0));
    record("e_case2", "int M_y(W) int M_y(W) int M_y(W) = (1/6) M(W)^3 = 0",
           std::abs(x1w4.mean()) + std::abs((inner.antiderivative() * w4).mean()));

    // (5.8) for i <= 6
    double worst = 0.0;
    try {
      const auto chain = chi3_chain(W, 6);
      for (const auto& c : chain) worst = std::max(worst, std::abs((c * w4).mean()));
    } catch (const ChainIdentityViolation&) {
      worst = std::numeric_limits<double>::infinity();
    }
    record("chain", "M_tau(chi_{3-i} M_y(W)) = 0 for i = 1..6", worst);
  }

  // (f) M_tau(chi7 W)(y) = 0, on a sample grid and coefficient-wise.
  if (const auto* chi7 = field("chi7")) {
    const SpatialField avg = mean_tau(*chi7 * W);
    double worst = avg.max_abs_coeff();
    constexpr int kSamples = 32;
    const int ny = W.dim() == 2 ? kSamples : 1;
    for (int i = 0; i < kSamples; ++i)
      for (int j = 0; j < ny; ++j) {
        const Point y{static_cast<double>(i) / kSamples, static_cast<double>(j) / kSamples};
        worst = std::max(worst, std::abs(avg(y)));
      }
    record("f", "M_tau(chi7 W)(y) = 0 for every y", worst);
  }
  return report;
}

IdentityReport identity_report(const TrigField& W, const RegimeSpec& regime, double tolerance) {
  return identity_report(W, compute_correctors(regime, W), tolerance);
}

}  // namespace homlab
