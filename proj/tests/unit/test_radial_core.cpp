#include <gtest/gtest.h>

#include <cmath>

#include "radwave/energy_ledger.hpp"
#include "radwave/errors.hpp"
#include "radwave/radial_core.hpp"

using namespace radwave;

namespace {

RadialProfile standard_profile() { return {ShapeSpec::gaussian(1.0, 5.0, 1.0), ShapeSpec::zero()}; }

}  // namespace

TEST(CriticalExponents, CubicValues) {
  const CriticalExponents c = critical_exponents({3.0, false});
  EXPECT_NEAR(c.s_p, 0.5, 1e-15);
  EXPECT_NEAR(c.beta0, 0.5, 1e-15);
  EXPECT_NEAR(c.kappa0, 0.5, 1e-15);
}

TEST(CriticalExponents, QuarticValues) {
  const CriticalExponents c = critical_exponents({4.0, false});
  EXPECT_NEAR(c.s_p, 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(c.beta0, 0.8, 1e-15);
  EXPECT_NEAR(c.kappa0, 0.2, 1e-15);
  EXPECT_NEAR(c.kappa0, 1.0 - c.beta0, 1e-15);
}

TEST(CriticalExponents, RejectsOutsideRange) {
  EXPECT_THROW(critical_exponents({5.0, false}), DomainError);
  EXPECT_THROW(critical_exponents({2.9, false}), DomainError);
  EXPECT_NO_THROW(validate({4.999, false}));
}

TEST(Nonlinearity, ClosedFormValues) {
  const ModelParams p3{3.0, false};
  EXPECT_EQ(nonlinearity(0.0, 1.0, p3), 0.0);
  EXPECT_DOUBLE_EQ(nonlinearity(2.0, 1.0, p3), 8.0);
  EXPECT_EQ(nonlinearity(0.1, 0.0, p3), 0.0);
  EXPECT_DOUBLE_EQ(nonlinearity(-2.0, 2.0, p3), -2.0);
  const ModelParams p45{4.5, false};
  EXPECT_NEAR(nonlinearity(2.0, 1.5, p45), std::pow(2.0, 4.5) / std::pow(1.5, 3.5), 1e-12);
}

TEST(Nonlinearity, LinearModeDisablesSource) {
  const ModelParams lin{3.0, true};
  EXPECT_EQ(nonlinearity(2.0, 1.0, lin), 0.0);
  EXPECT_EQ(potential_density(2.0, 1.0, lin), 0.0);
  EXPECT_EQ(dissipation_density(2.0, 1.0, lin), 0.0);
}

TEST(Densities, MatchDefinitions) {
  const ModelParams p{4.0, false};
  EXPECT_NEAR(potential_density(1.5, 2.0, p), std::pow(1.5, 5.0) / std::pow(2.0, 3.0), 1e-12);
  EXPECT_NEAR(dissipation_density(1.5, 2.0, p), std::pow(1.5, 5.0) / std::pow(2.0, 4.0), 1e-12);
  EXPECT_NEAR(source_magnitude(-1.5, 2.0, p), std::pow(1.5, 4.0) / std::pow(2.0, 3.0), 1e-12);
}

TEST(Grid, LatticeAndGuards) {
  const GridSpec g = make_grid(0.25, 16.0, 4.0);
  EXPECT_EQ(g.n_r, 64u);
  EXPECT_EQ(g.n_t, 16u);
  EXPECT_TRUE(g.on_lattice(3.75));
  EXPECT_FALSE(g.on_lattice(3.7));
  EXPECT_EQ(g.index_of(2.5, "r"), 10u);
  EXPECT_THROW(g.index_of(2.6, "r"), ProbeError);
  EXPECT_THROW(make_grid(0.3, 16.0, 4.0), ConfigError);
  EXPECT_THROW(make_grid(-1.0, 16.0, 4.0), ConfigError);
}

TEST(Profiles, KindNamesRoundTrip) {
  for (auto k : {ProfileKind::zero, ProfileKind::gaussian_bump, ProfileKind::polynomial_bump, ProfileKind::power_tail,
                 ProfileKind::custom_samples}) {
    EXPECT_EQ(profile_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(profile_kind_from_string("tophat"), ConfigError);
}

TEST(Profiles, DerivativesMatchFiniteDifferences) {
  const ShapeSpec shapes[] = {ShapeSpec::gaussian(1.0, 5.0, 1.0), ShapeSpec::polynomial(0.7, 4.0, 2.0),
                              ShapeSpec::power_tail(1.0, 1.0, 0.885, 6.0)};
  for (const auto& s : shapes) {
    for (double r : {0.5, 3.3, 4.9, 6.7}) {
      const double h = 1e-5;
      const double fd = (s.value(r + h) - s.value(r - h)) / (2.0 * h);
      EXPECT_NEAR(s.derivative(r), fd, 1e-7) << to_string(s.kind) << " r=" << r;
    }
  }
}

TEST(Profiles, SupportRadius) {
  EXPECT_DOUBLE_EQ(ShapeSpec::gaussian(1.0, 5.0, 1.0).support_radius(), 14.0);
  EXPECT_DOUBLE_EQ(ShapeSpec::polynomial(1.0, 5.0, 2.0).support_radius(), 7.0);
  EXPECT_DOUBLE_EQ(ShapeSpec::power_tail(1.0, 1.0, 0.885, 10.0).support_radius(), 12.0);
  EXPECT_EQ(ShapeSpec::power_tail(1.0, 1.0, 0.885, 10.0).value(12.5), 0.0);
}

TEST(Profiles, CustomSamplesInterpolate) {
  std::vector<double> samples;
  for (int k = 0; k <= 40; ++k) samples.push_back(std::exp(-std::pow(k * 0.25 - 5.0, 2) / 2.0));
  const ShapeSpec s = ShapeSpec::custom(samples, 0.25);
  EXPECT_NEAR(s.value(5.0), 1.0, 1e-12);
  EXPECT_NEAR(s.value(4.1), std::exp(-0.405), 2e-3);
  EXPECT_EQ(s.value(11.0), 0.0);
  EXPECT_THROW(ShapeSpec::custom({1.0, 2.0}, 0.25), ConfigError);
}

TEST(InitState, ZeroProfileIsZero) {
  const GridSpec g = make_grid(0.125, 16.0, 4.0);
  const FieldState s = init_state({}, g);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s.w[i], 0.0);
    EXPECT_EQ(s.phi[i], 0.0);
    EXPECT_EQ(s.psi[i], 0.0);
  }
}

TEST(InitState, VelocityFreeDataHasEqualInvariants) {
  const GridSpec g = make_grid(1.0 / 64, 24.0, 4.0);
  const FieldState s = init_state(standard_profile(), g);
  EXPECT_EQ(s.w[0], 0.0);
  EXPECT_EQ(s.phi[0], s.psi[0]);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s.phi[i], s.psi[i]);
    EXPECT_NEAR(s.w[i], s.radius(i) * std::exp(-std::pow(s.radius(i) - 5.0, 2) / 2.0), 1e-14);
  }
}

TEST(InitState, CentralDifferenceMatchesInvariants) {
  RadialProfile prof{ShapeSpec::gaussian(1.0, 5.0, 1.0), ShapeSpec::gaussian(0.5, 6.0, 1.5)};
  double prev = 0.0;
  for (double dr : {1.0 / 32, 1.0 / 64}) {
    const GridSpec g = make_grid(dr, 32.0, 4.0);
    const FieldState s = init_state(prof, g);
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      err = std::max(err, std::abs((s.w[i + 1] - s.w[i - 1]) / (2.0 * dr) - s.w_r(i)));
    }
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
    }
    prev = err;
  }
}

TEST(InitState, SupportGuardRejectsShortDomain) {
  const GridSpec g = make_grid(0.125, 16.0, 4.0);
  EXPECT_THROW(init_state(standard_profile(), g), ConfigError);
}

TEST(InitState, PowerTailFromRemarkExponent) {
  const double q = remark_tail_exponent(3.0, 0.01);
  EXPECT_NEAR(q, 0.885, 1e-12);
  const ShapeSpec u0 = ShapeSpec::power_tail(1.0, 1.0, q, 10.0);
  const ModelParams p{3.0, false};
  const double tail = truncation_tail_energy(u0, p);
  EXPECT_TRUE(std::isfinite(tail));
  EXPECT_GT(tail, 0.0);
  const GridSpec g = make_grid(1.0 / 32, 24.0, 4.0);
  const FieldState s = init_state({u0, ShapeSpec::zero()}, g);
  const double E = energy_of_state(s, p);
  EXPECT_TRUE(std::isfinite(E));
  EXPECT_GT(E, 0.0);
}

TEST(PointwiseBound, ZeroStateHasNoViolation) {
  const GridSpec g = make_grid(0.125, 16.0, 4.0);
  const BoundReport b = pointwise_bound_report(zero_state(g), 0.0, {3.0, false});
  EXPECT_EQ(b.energy_ratio_max, 0.0);
  EXPECT_EQ(b.lemma_ratio_max, 0.0);
  EXPECT_FALSE(b.violation);
}

TEST(PointwiseBound, AdmissibleStateWithinBound) {
  const GridSpec g = make_grid(1.0 / 64, 24.0, 4.0);
  const FieldState s = init_state(standard_profile(), g);
  const ModelParams p{3.0, false};
  const BoundReport b = pointwise_bound_report(s, energy_of_state(s, p), p);
  EXPECT_LE(b.energy_ratio_max, 1.0);
  EXPECT_LE(b.lemma_ratio_max, 1.0);
  EXPECT_FALSE(b.violation);
  EXPECT_NEAR(b.lemma_constant, std::pow(2.0, 1.0), 1e-15);
}

TEST(PointwiseBound, SyntheticStateFlagsViolation) {
  const GridSpec g = make_grid(0.125, 16.0, 4.0);
  FieldState s = zero_state(g);
  const double E = 2.0;
  for (std::size_t i = 0; i < s.size(); ++i) s.w[i] = std::sqrt(2.0 * E * s.radius(i));
  const BoundReport b = pointwise_bound_report(s, E, {3.0, false});
  EXPECT_NEAR(b.energy_ratio_max, std::sqrt(2.0), 1e-12);
  EXPECT_TRUE(b.violation);
}

TEST(PointwiseBound, NonpositiveEnergyForNonzeroStateIsInconsistent) {
  const GridSpec g = make_grid(0.125, 16.0, 4.0);
  FieldState s = zero_state(g);
  s.w[3] = 1.0;
  EXPECT_THROW(pointwise_bound_report(s, 0.0, {3.0, false}), InconsistencyError);
}
