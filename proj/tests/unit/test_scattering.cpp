#include <gtest/gtest.h>

#include <cmath>

#include "radwave/energy_ledger.hpp"
#include "radwave/errors.hpp"
#include "radwave/quadrature.hpp"
#include "radwave/scattering.hpp"

using namespace radwave;

namespace {

const ModelParams kCubic{3.0, false};
const ModelParams kLinear{3.0, true};

RadialProfile standard_profile() { return {ShapeSpec::gaussian(1.0, 5.0, 1.0), ShapeSpec::zero()}; }
RadialProfile moving_profile() { return {ShapeSpec::gaussian(1.0, 5.0, 1.0), ShapeSpec::gaussian(0.5, 6.0, 1.5)}; }

// Shared two-sided cubic run: dr = 1/32, r_max = 48, horizon 24.
const TwoSidedRun& cubic_run() {
  static const TwoSidedRun two = [] {
    const GridSpec g = make_grid(1.0 / 32, 48.0, 24.0);
    ProbeSet probes;
    probes.snapshot_stride = 32;
    probes.add_trace(TraceKind::outgoing, 0.0);
    probes.add_radius(4.0);
    probes.add_radius(8.0);
    probes.label_sums = true;
    return run_two_sided(init_state(standard_profile(), g), g, kCubic, probes);
  }();
  return two;
}

const Trajectory& zero_forward() {
  static const Trajectory tr = [] {
    const GridSpec g = make_grid(0.125, 16.0, 8.0);
    ProbeSet probes;
    probes.label_sums = true;
    return run(zero_state(g), g, kCubic, probes);
  }();
  return tr;
}

}  // namespace

TEST(ExtractG, ZeroSolutionGivesZeroProfile) {
  const RadiationProfile g = extract_g(zero_forward(), 8.0, kCubic);
  EXPECT_EQ(g.scattered_energy, 0.0);
  for (const auto& s : g.samples) EXPECT_EQ(s.value, 0.0);
}

TEST(ExtractG, LinearModeMatchesClosedFormInvariant) {
  const GridSpec g = make_grid(1.0 / 64, 48.0, 24.0);
  const RadialProfile prof = moving_profile();
  const Trajectory tr = run(init_state(prof, g), g, kLinear);
  const RadiationProfile gp = extract_g(tr, 24.0, kLinear);
  ASSERT_EQ(gp.samples.size(), g.n_r + 1);
  double err = 0.0, mag = 0.0;
  for (std::size_t k = 0; k < gp.samples.size(); k += 7) {
    const double r = 24.0 - gp.samples[k].label;
    const LinearSample ex = dalembert_linear(prof, r, 24.0);
    err = std::max(err, std::abs(gp.samples[k].value - (ex.w_r - ex.w_t)));
    mag = std::max(mag, std::abs(ex.w_r - ex.w_t));
  }
  EXPECT_LE(err / mag, 1e-10);
}

TEST(ExtractG, ScatteredEnergyBoundedAndGrowingWithHorizon) {
  const Trajectory& fw = cubic_run().forward;
  const double E = fw.steps.front().energy;
  double prev = 0.0;
  for (double H : {8.0, 16.0, 24.0}) {
    const RadiationProfile gp = extract_g(fw, H, kCubic);
    EXPECT_LE(gp.scattered_energy, E * (1.0 + 1e-6));
    EXPECT_GT(gp.scattered_energy, prev);
    prev = gp.scattered_energy;
  }
  EXPECT_GT(prev / E, 0.95);
}

TEST(ExtractG, BackwardProfileUsesIncomingLabels) {
  const RadiationProfile gm = extract_g(cubic_run().backward, 24.0, kCubic);
  EXPECT_EQ(gm.kind, RadiationKind::g_minus);
  EXPECT_DOUBLE_EQ(gm.label_min(), -24.0);
  EXPECT_DOUBLE_EQ(gm.samples.front().extraction_time, -24.0);
  EXPECT_NEAR(gm.scattered_energy, extract_g(cubic_run().forward, 24.0, kCubic).scattered_energy,
              1e-9 * gm.scattered_energy);
}

TEST(ExtractG, LabelSubsetAndLatticeChecks) {
  const Trajectory& fw = cubic_run().forward;
  const RadiationProfile sub = extract_g(fw, {0.0, -2.0, 1.0}, 24.0, kCubic);
  ASSERT_EQ(sub.samples.size(), 3u);
  EXPECT_DOUBLE_EQ(sub.samples.front().label, -2.0);
  EXPECT_THROW(extract_g(fw, {0.01}, 24.0, kCubic), ProbeError);
  EXPECT_THROW(extract_g(fw, {30.0}, 24.0, kCubic), ProbeError);
  EXPECT_THROW(extract_g(fw, 30.0, kCubic), DomainError);
}

TEST(ExtractG, DecayConstantFormula) {
  const double E = 100.0;
  const double expect = std::pow(4.0 * E / (4.0 * M_PI), 0.75);
  EXPECT_NEAR(radiation_decay_constant(E, kCubic), expect, 1e-12 * expect);
  EXPECT_EQ(radiation_decay_constant(E, kLinear), 0.0);
}

TEST(DecayFit, CubicExponentAboveThreshold) {
  const DecayFit f = decay_fit(cubic_run().forward.trace(TraceKind::outgoing, 0.0), 0.2, 20.0, kCubic);
  EXPECT_NEAR(f.threshold, 0.15, 1e-15);
  EXPECT_FALSE(f.below_noise_floor);
  EXPECT_GE(f.alpha, 0.15);
  EXPECT_TRUE(f.passed);
}

TEST(DecayFit, QuarticExponentAboveThreshold) {
  const ModelParams p4{4.0, false};
  const GridSpec g = make_grid(1.0 / 32, 48.0, 24.0);
  ProbeSet probes;
  probes.add_trace(TraceKind::outgoing, 0.0);
  const Trajectory tr = run(init_state(standard_profile(), g), g, p4, probes);
  const DecayFit f = decay_fit(tr.trace(TraceKind::outgoing, 0.0), 0.2, 20.0, p4);
  EXPECT_NEAR(f.threshold, 0.3, 1e-15);
  EXPECT_GE(f.alpha, 0.3);
}

TEST(DecayFit, LinearModeBelowNoiseFloor) {
  const GridSpec g = make_grid(1.0 / 32, 32.0, 12.0);
  ProbeSet probes;
  probes.add_trace(TraceKind::outgoing, 0.0);
  const Trajectory tr = run(init_state(standard_profile(), g), g, kLinear, probes);
  const DecayFit f = decay_fit(tr.trace(TraceKind::outgoing, 0.0), 0.2, 10.0, kLinear);
  EXPECT_TRUE(f.below_noise_floor);
  EXPECT_THROW(decay_fit(tr.trace(TraceKind::outgoing, 0.0), 2.0, 1.0, kLinear), DomainError);
}

TEST(FreeWave, ZeroProfile) {
  const FreeWave v = free_wave_eval(RadiationProfile{}, 1.0, 2.0);
  EXPECT_EQ(v.V, 0.0);
  EXPECT_EQ(v.V_r, 0.0);
  EXPECT_EQ(v.V_t, 0.0);
}

TEST(FreeWave, ConstantProfileGivesLinearGrowth) {
  RadiationProfile g;
  g.dlabel = 0.125;
  for (int k = 0; k <= 80; ++k) g.samples.push_back({-5.0 + 0.125 * k, 2.0, 0.0, 0.0, false});
  const FreeWave v = free_wave_eval(g, 0.5, 1.0);
  EXPECT_NEAR(v.V, 2.0 * 0.5, 1e-14);
  EXPECT_NEAR(v.V_r, 2.0, 1e-14);
  EXPECT_NEAR(v.V_t, 0.0, 1e-14);
}

TEST(ExteriorDifference, ZeroSolutionAgainstZeroProfile) {
  const RadiationProfile g = extract_g(zero_forward(), 8.0, kCubic);
  EXPECT_EQ(exterior_difference(zero_forward(), g, 0.0, 8.0).value, 0.0);
}

TEST(ExteriorDifference, LinearModeAgainstExactProfileIsRounding) {
  const GridSpec g = make_grid(1.0 / 64, 48.0, 24.0);
  ProbeSet probes;
  probes.add_snapshot(8.0);
  const Trajectory tr = run(init_state(moving_profile(), g), g, kLinear, probes);
  const RadiationProfile gp = extract_g(tr, 24.0, kLinear);
  EXPECT_LE(exterior_difference(tr, gp, 0.0, 8.0).value, 1e-20 * tr.steps.front().energy);
}

TEST(ExteriorDifference, CubicStrictlyDecreasing) {
  const TwoSidedRun& two = cubic_run();
  const RadiationProfile gp = extract_g(two.forward, 24.0, kCubic);
  double prev = INFINITY;
  for (double t : {4.0, 8.0, 16.0}) {
    const double v = exterior_difference(two.forward, gp, 0.0, t).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LE(prev, 0.05 * two.forward.steps.front().energy);
  const RadiationProfile gm = extract_g(two.backward, 24.0, kCubic);
  EXPECT_THROW(exterior_difference(two.forward, gm, 0.0, 8.0), DomainError);
  EXPECT_NO_THROW(exterior_difference(two.backward, gm, 0.0, 8.0));
}

TEST(Annulus, ZeroStateAllZero) {
  FieldState s = zero_state(make_grid(0.125, 16.0, 8.0));
  s.t = 8.0;
  const AnnulusEnergy a = annulus_energy(s, 0.5, 0.4, kCubic);
  EXPECT_EQ(a.inner, 0.0);
  EXPECT_EQ(a.annulus, 0.0);
  EXPECT_EQ(a.exterior, 0.0);
}

TEST(Annulus, ReversedFlowInnerPartSmall) {
  const TwoSidedRun& two = cubic_run();
  const double E = two.forward.steps.front().energy;
  const AnnulusEnergy a = annulus_energy(two.backward.snapshot_at(24.0), 0.5, 0.4, kCubic);
  EXPECT_LE(a.inner, 0.05 * E);
  EXPECT_NEAR(a.inner + a.annulus + a.exterior, E, 1e-2 * E);
}

TEST(Annulus, RejectsBadParameters) {
  const FieldState& s = cubic_run().forward.snapshot_at(24.0);
  EXPECT_THROW(annulus_energy(s, 1.2, 0.4, kCubic), DomainError);
  EXPECT_THROW(annulus_energy(s, 0.5, 0.6, kCubic), DomainError);
  EXPECT_THROW(annulus_energy(cubic_run().forward.snapshot_at(2.0), 0.5, 0.4, kCubic), DomainError);
  EXPECT_NEAR(annulus_min_time(0.5, 0.4), std::pow(2.0, 1.0 / 0.6), 1e-12);
}

TEST(Annulus, EstimatorsAgreeWithinBar) {
  for (const Trajectory* tr : {&cubic_run().forward, &cubic_run().backward}) {
    for (double t : {8.0, 16.0, 24.0}) {
      const EstimatorConsistency c = estimator_consistency(*tr, t, 0.5, 0.4, kCubic);
      EXPECT_TRUE(c.agree) << "t=" << t;
      EXPECT_GE(c.defect, 0.0);
    }
  }
}

TEST(WeightedEnergy, ZeroState) {
  EXPECT_EQ(weighted_energy(zero_state(make_grid(0.125, 16.0, 8.0)), 0.6, kCubic), 0.0);
}

TEST(WeightedEnergy, KappaZeroIsExteriorEnergy) {
  const FieldState& s = cubic_run().forward.snapshot_at(4.0);
  const auto e3 = energy_density_3d(s, kCubic);
  const double ext = clipped_trapezoid(e3, s.dr, 4.0, 48.0);
  EXPECT_NEAR(weighted_energy(s, 0.0, kCubic), ext, 1e-12 * ext);
}

TEST(WeightedEnergy, NonincreasingInTime) {
  const Trajectory& fw = cubic_run().forward;
  const double I0 = weighted_energy(fw.initial, 0.6, kCubic);
  double prev = I0;
  for (double t : {5.0, 10.0, 15.0, 20.0}) {
    const double I = weighted_energy(fw.snapshot_at(t), 0.6, kCubic);
    EXPECT_LE(I, prev + 1e-3 * I0);
    prev = I;
  }
}

TEST(WeightedLedger, ExponentWindow) {
  const CriticalExponents c = critical_exponents(kCubic);
  EXPECT_NEAR(c.kappa0, 0.5, 1e-15);
  EXPECT_NO_THROW(validate_theorem2_exponents(0.45, 0.6, kCubic));
  EXPECT_THROW(validate_theorem2_exponents(0.39, 0.6, kCubic), DomainError);
  EXPECT_THROW(validate_theorem2_exponents(0.5, 0.6, kCubic), DomainError);
  EXPECT_THROW(validate_theorem2_exponents(0.45, 0.5, kCubic), DomainError);
}

TEST(WeightedLedger, ZeroSolutionLedger) {
  const GridSpec g = make_grid(0.125, 16.0, 8.0);
  ProbeSet probes;
  probes.add_radius(4.0);
  const TwoSidedRun two = run_two_sided(zero_state(g), g, kCubic, probes);
  const Theorem2Ledger L = theorem2_ledger(two, 4.0, 0.45, 0.6, 0.0, kCubic);
  EXPECT_EQ(L.raw_lhs, 0.0);
  EXPECT_EQ(L.raw_rhs, 0.0);
  EXPECT_EQ(L.I, 0.0);
  EXPECT_TRUE(L.lhs_le_rhs);
  EXPECT_TRUE(L.rhs_le_upper);
}

TEST(WeightedLedger, CubicLedgerHolds) {
  const TwoSidedRun& two = cubic_run();
  const double Em = extract_g(two.backward, 24.0, kCubic).scattered_energy;
  for (double R : {4.0, 8.0}) {
    const Theorem2Ledger L = theorem2_ledger(two, R, 0.45, 0.6, Em, kCubic);
    EXPECT_LE(L.raw_lhs, L.raw_rhs);
    EXPECT_LE(L.raw_rhs, L.rhs_upper);
    EXPECT_NEAR(L.exponent_gap, 0.05, 1e-12);
  }
}

TEST(Appendix, ZeroSolutionHolds) {
  const RadiationProfile g = extract_g(zero_forward(), 8.0, kCubic);
  const AppendixReport rep = appendix_inequalities(zero_forward(), g, {{0.0, 4.0}}, kCubic);
  EXPECT_EQ(rep.m_integral, 0.0);
  EXPECT_EQ(rep.double_integral, 0.0);
  ASSERT_EQ(rep.windows.size(), 1u);
  EXPECT_TRUE(rep.windows.front().holds);
}

TEST(Appendix, ChangeOfVariablesAndWindowBound) {
  const Trajectory& fw = cubic_run().forward;
  const RadiationProfile gp = extract_g(fw, 24.0, kCubic);
  const AppendixReport rep = appendix_inequalities(fw, gp, {{0.0, 5.0}}, kCubic);
  EXPECT_LE(rep.relative_gap, 1e-6);
  EXPECT_TRUE(rep.windows.front().holds);
  EXPECT_LE(rep.windows.front().mu, rep.windows.front().rhs);
  EXPECT_GT(rep.empirical_constant, 0.0);
  EXPECT_LE(rep.empirical_constant, rep.proof_constant);
  EXPECT_THROW(appendix_inequalities(cubic_run().backward, gp, {{0.0, 5.0}}, kCubic), DomainError);
}

TEST(Appendix, RandomWindowsDeterministicAndOnLattice) {
  const auto a = random_windows(10, 0.0, 40.0, 1.0 / 64, 12345);
  const auto b = random_windows(10, 0.0, 40.0, 1.0 / 64, 12345);
  ASSERT_EQ(a.size(), 10u);
  EXPECT_EQ(a, b);
  for (const auto& [lo, hi] : a) {
    EXPECT_LT(lo, hi);
    EXPECT_GE(lo, 0.0);
    EXPECT_LE(hi, 40.0);
    EXPECT_EQ(lo * 64.0, std::round(lo * 64.0));
  }
}
