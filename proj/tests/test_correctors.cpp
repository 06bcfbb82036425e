#include <doctest.h>

#include <cmath>
#include <random>

#include "homlab/correctors.hpp"
#include "homlab/errors.hpp"
#include "homlab/regimes.hpp"
#include "support.hpp"

using namespace homlab;
using homlab::testing::Constraint;
using homlab::testing::random_field;

namespace {

const double kPi2 = kPi * kPi;

TrigField cosy(int d = 1) { return TrigField::cosine(d, {1, 0}, 0); }
TrigField cost(int d = 1) { return TrigField::cosine(d, {0, 0}, 1); }
TrigField sint(int d = 1) { return TrigField::sine(d, {0, 0}, 1); }
TrigField travelling() { return TrigField::cosine(1, {1, 0}, -1); }
TrigField remark_potential() { return sint() * cosy(); }

double diff(const TrigField& a, const TrigField& b) { return (a - b).max_abs_coeff(); }

double series_diff(const ScalarSeries& a, const ScalarSeries& b) { return (a - b).max_abs_coeff(); }

ScalarSeries tau_series(const TrigField& f) { return mean_y(f); }

}  // namespace

TEST_CASE("solve_chi1") {
  CHECK(solve_chi1(TrigField(1)).is_zero());
  const TrigField chi = solve_chi1(travelling());
  CHECK(std::abs(chi.coeff({{1, 0}, -1})) == doctest::Approx(0.5 / std::sqrt(4 * kPi2 + 16 * kPi2 * kPi2)));
  CHECK(diff(derivative_tau(chi) - laplacian_y(chi), travelling()) < 1e-15);
  CHECK_THROWS_AS(solve_chi1(TrigField::constant(1, 1.0)), SolvabilityViolation);
}

TEST_CASE("solve_chi2") {
  const TrigField W = cosy() * (TrigField::constant(1, 1.0) + cost());
  const SpatialField chi = solve_chi2(W);
  CHECK(std::abs(chi.coeff({1, 0}) - Complex(-0.5 / (4 * kPi2), 0.0)) < 1e-16);
  CHECK(chi.coeffs().size() == 2);
  CHECK(chi.mean() == 0.0);
  CHECK(solve_chi2(remark_potential()).is_zero());
  CHECK(solve_chi2(cost() + sint() * 0.3).is_zero());
  CHECK_THROWS_AS(solve_chi2(TrigField::constant(1, 2.0)), SolvabilityViolation);
}

TEST_CASE("solve_chi3") {
  const TrigField W = cosy() * sint();
  CHECK(diff(solve_chi3(W), W * (-1.0 / (4 * kPi2))) < 1e-16);
  CHECK(solve_chi3(cost() + sint()).is_zero());
  const TrigField W2 = cosy(2) * TrigField::cosine(2, {0, 1}, 0);
  CHECK(diff(solve_chi3(W2), W2 * (-1.0 / (8 * kPi2))) < 1e-16);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const TrigField r = random_field(rng, 1 + i % 2, Constraint::none);
    const TrigField chi = solve_chi3(r);
    CHECK(mean_y(chi).is_zero());
    CHECK(diff(laplacian_y(chi), r.without_y_mean()) < 1e-14);
  }
}

TEST_CASE("chi5_chain") {
  const Chi5Chain r = chi5_chain(remark_potential());
  CHECK(diff(r.chi5_tilde, cost() * cosy() * (-1.0 / (2 * kPi))) < 1e-16);
  CHECK(diff(r.chi4, sint() * cosy() * (-1.0 / (4 * kPi2))) < 1e-16);

  const Chi5Chain z = chi5_chain(TrigField(1));
  CHECK((z.chi5.is_zero() && z.chi5_tilde.is_zero() && z.chi4.is_zero()));

  // cos(2 pi tau) cos(2 pi y): chi4 = (1 - cos(2 pi tau)) cos(2 pi y) / (4 pi^2)
  const Chi5Chain c = chi5_chain(cost() * cosy());
  CHECK(diff(c.chi4, (TrigField::constant(1, 1.0) - cost()) * cosy() * (1.0 / (4 * kPi2))) < 1e-16);
  for (double y : {0.0, 0.2, 0.9}) {
    CHECK(std::abs(c.chi4({y, 0.0}, 0.0)) < 1e-16);
    CHECK(std::abs(c.chi5({y, 0.0}, 0.0)) < 1e-16);
  }
  CHECK_THROWS_AS(chi5_chain(cosy()), SolvabilityViolation);
}

TEST_CASE("chi3_chain") {
  // W4 = cos(2 pi tau): chi_{3-1} = sin(2 pi tau) / (2 pi), chi_{3-2} = sin^2(2 pi tau) / (8 pi^2)
  const auto c = chi3_chain(cost() + remark_potential(), 2);
  REQUIRE(c.size() == 2);
  CHECK(series_diff(c[0], tau_series(sint() * (1.0 / (2 * kPi)))) < 1e-16);
  CHECK(series_diff(c[1], tau_series(sint() * sint() * (1.0 / (8 * kPi2)))) < 1e-16);

  // W4 = sin(2 pi tau): chi_{3-2} = (1 - cos(2 pi tau))^2 / (8 pi^2)
  const TrigField one_minus_cos = TrigField::constant(1, 1.0) - cost();
  const auto s = chi3_chain(sint(), 2);
  CHECK(series_diff(s[0], tau_series(one_minus_cos * (1.0 / (2 * kPi)))) < 1e-16);
  CHECK(series_diff(s[1], tau_series(one_minus_cos * one_minus_cos * (1.0 / (8 * kPi2)))) < 1e-16);
  CHECK(std::abs(s[1](0.0)) < 1e-17);

  for (const auto& z : chi3_chain(cosy() * sint(), 4)) CHECK(z.is_zero());

  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const TrigField W = random_field(rng, 1, Constraint::mean_zero);
    const ScalarSeries W4 = mean_y(W);
    const auto chain = chi3_chain(W, 6);
    REQUIRE(chain.size() == 6);
    for (const auto& chi : chain) CHECK(std::abs((chi * W4).mean()) < 1e-12);
  }
}

TEST_CASE("solve_chi7") {
  const TrigField W = remark_potential();
  const Chi5Chain c5 = chi5_chain(W);
  for (double y : {0.0, 0.1, 0.35})
    CHECK(std::abs(mean_tau(c5.chi5_tilde * W)({y, 0.0})) < 1e-16);
  const TrigField chi7 = solve_chi7(W);
  CHECK(std::abs(mean_tau(chi7 * W)({0.0, 0.0})) < 1e-16);
  CHECK(solve_chi7(TrigField(1)).is_zero());
  CHECK_THROWS_AS(solve_chi7(cosy()), SolvabilityViolation);
}

TEST_CASE("effective potentials: closed forms") {
  const RegimeSpec r36 = resolve_regime(2.5, GammaMode::k_minus_1, remark_potential());
  CHECK(std::abs(effective_potential(r36, remark_potential()).value + 0.25) < 1e-13);

  const RegimeSpec r31 = resolve_regime(2.0, GammaMode::unit, travelling());
  CHECK(std::abs(effective_potential(r31, travelling()).value + 0.5 / (1 + 4 * kPi2)) < 1e-15);

  const TrigField w32 = cosy() * (TrigField::constant(1, 1.0) + cost());
  const RegimeSpec r32 = resolve_regime(2.5, GammaMode::unit, w32);
  CHECK(std::abs(effective_potential(r32, w32).value + 1.0 / (8 * kPi2)) < 1e-15);

  // k = 0: c_eff(t) = M_y(chi3 W)(t) = -(1 + cos t)^2 / (8 pi^2) for W = cos(2 pi y)(1 + cos(2 pi tau))
  const RegimeSpec r0 = resolve_regime(0.0, GammaMode::unit, w32);
  const EffectivePotential e0 = effective_potential(r0, w32);
  CHECK(e0.kind == EffectivePotential::Kind::time_series);
  for (double t : {0.0, 0.3, 0.61}) {
    const double c = std::cos(kTwoPi * t);
    CHECK(e0.at(t) == doctest::Approx(-(1 + c) * (1 + c) / (8 * kPi2)).epsilon(1e-13));
  }
  CHECK(e0.integral(0.0, 1.0) == doctest::Approx(-1.5 / (8 * kPi2)).epsilon(1e-13));

  const RegimeSpec flipped = resolve_regime(2.0, GammaMode::unit, travelling(), SignOverride::flip);
  const EffectivePotential ef = effective_potential(flipped, travelling());
  CHECK(ef.sign_flipped);
  CHECK(ef.value == doctest::Approx(0.5 / (1 + 4 * kPi2)));
}

TEST_CASE("effective potentials: signs on random admissible W") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const int d = 1 + i % 2;
    const TrigField a = random_field(rng, d, Constraint::mean_zero);
    CHECK(mean_of_product(solve_chi1(a), a) >= 0.0);
    CHECK(mean_of_product(TrigField::lift(solve_chi2(a)), a) <= 1e-16);
    CHECK(mean_of_product(solve_chi3(a), a) <= 1e-16);
    const TrigField b = random_field(rng, d, Constraint::no_tau_mean);
    const RegimeSpec r = resolve_regime(2.5, GammaMode::k_minus_1, b);
    CHECK(effective_potential(r, b).value <= 1e-16);
  }
}

TEST_CASE("effective constants agree with tensor quadrature on 128^{d+1} samples") {
  using homlab::testing::sample_torus;
  const auto average_product = [](const TrigField& a, const TrigField& b) {
    const auto sa = sample_torus(a, 128), sb = sample_torus(b, 128);
    double s = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) s += sa[i] * sb[i];
    return s / static_cast<double>(sa.size());
  };
  std::mt19937_64 rng(17);
  for (int d = 1; d <= 2; ++d) {
    const TrigField W = random_field(rng, d, Constraint::mean_zero);
    const double q1 = average_product(solve_chi1(W), W);
    const double q2 = average_product(TrigField::lift(solve_chi2(W)), W);
    const double q3 = average_product(solve_chi3(W), W);
    CHECK(std::abs(q1 + effective_potential(resolve_regime(2.0, GammaMode::unit, W), W).value) < 1e-8);
    CHECK(std::abs(q2 - effective_potential(resolve_regime(2.5, GammaMode::unit, W), W).value) < 1e-8);
    CHECK(std::abs(q3 - effective_potential(resolve_regime(1.5, GammaMode::unit, W), W).value) < 1e-8);

    const TrigField V = random_field(rng, d, Constraint::no_tau_mean);
    const auto g4 = grad_y(chi5_chain(V).chi4);
    const auto gv = grad_y(V);
    double q6 = 0.0;
    for (int a = 0; a < d; ++a) q6 += average_product(g4[a], gv[a]);
    CHECK(std::abs(q6 - effective_potential(resolve_regime(2.5, GammaMode::k_minus_1, V), V).value) < 1e-8);
  }
}

TEST_CASE("identity_report") {
  const IdentityReport r36 = identity_report(remark_potential(), resolve_regime(2.5, GammaMode::k_minus_1,
                                                                                 remark_potential()));
  CHECK(r36.all_pass());
  for (const auto& c : r36.checks)
    if (c.id == "d") CHECK(c.residual < 1e-12);

  const IdentityReport r31 = identity_report(travelling(), resolve_regime(2.0, GammaMode::unit, travelling()));
  CHECK(r31.all_pass());
  for (const auto& c : r31.checks)
    if (c.id == "a") CHECK(c.residual < 1e-12);

  const IdentityReport zero = identity_report(TrigField(1), resolve_regime(2.0, GammaMode::unit, TrigField(1)));
  CHECK(!zero.checks.empty());
  for (const auto& c : zero.checks) CHECK(c.residual == 0.0);

  // A corrupted corrector is caught by its cell residual.
  const RegimeSpec r = resolve_regime(2.0, GammaMode::unit, travelling());
  CorrectorSet set = compute_correctors(r, travelling());
  set.fields["chi1"].add({{1, 0}, 1}, 1e-3);
  set.fields["chi1"].add({{-1, 0}, -1}, 1e-3);
  const IdentityReport bad = identity_report(travelling(), set);
  REQUIRE(bad.first_failure() != nullptr);
  CHECK(bad.first_failure()->id == "cell_chi1");
}

TEST_CASE("identity suite on random admissible potentials") {
  struct Case {
    double k;
    GammaMode g;
    Constraint c;
  };
  const Case cases[] = {{2.0, GammaMode::unit, Constraint::mean_zero},
                        {2.5, GammaMode::unit, Constraint::mean_zero},
                        {1.5, GammaMode::unit, Constraint::mean_zero},
                        {0.5, GammaMode::unit, Constraint::no_y_mean},
                        {0.0, GammaMode::unit, Constraint::no_y_mean},
                        {2.5, GammaMode::k_minus_1, Constraint::no_tau_mean}};
  std::mt19937_64 rng(21);
  for (const auto& cs : cases)
    for (int i = 0; i < 5; ++i) {
      const TrigField W = random_field(rng, 1 + i % 2, cs.c);
      const IdentityReport rep = identity_report(W, resolve_regime(cs.k, cs.g, W));
      CHECK(rep.all_pass());
    }
}

TEST_CASE("correctors for the intermediate regime carry the diagnostic chain") {
  const TrigField W = travelling() + cost();
  const CorrectorSet set = compute_correctors(resolve_regime(1.5, GammaMode::unit, W), W);
  REQUIRE(set.chain_depth.has_value());
  CHECK(*set.chain_depth == 3);
  CHECK(set.chain.size() == 4);
  CHECK(set.primary == "chi3");
  CHECK(set.effective.value == doctest::Approx(-1.0 / (8 * kPi2)));
}
