#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "radwave/energy_ledger.hpp"
#include "radwave/evolve.hpp"

namespace radwave {

enum class RadiationKind { g_plus, g_minus };

struct RadiationSample {
  double label = 0.0;
  double value = 0.0;
  double extraction_time = 0.0;
  double error_estimate = 0.0;
  bool short_span = false;  // extraction time minus label below the configured minimum
};

struct RadiationProfile {
  RadiationKind kind = RadiationKind::g_plus;
  double dlabel = 0.0;
  std::vector<RadiationSample> samples;  // ascending labels, spacing dlabel
  double scattered_energy = 0.0;         // pi int g^2
  double decay_constant = 0.0;           // C in C (t - tau)^{-(p-2)/(p+1)}

  // Linear interpolation between samples, zero outside the sampled range.
  double value_at(double label) const;
  double label_min() const { return samples.empty() ? 0.0 : samples.front().label; }
  double label_max() const { return samples.empty() ? 0.0 : samples.back().label; }
};

// Reads g from the invariant at time `horizon` of the run: g_plus from a forward
// run, g_minus (labels s = -tau) from a run started at reverse_time of the data.
// Every lattice label whose line is inside the grid at the horizon is sampled.
RadiationProfile extract_g(const Trajectory& trajectory, double horizon, const ModelParams& params,
                           double min_span = 0.0);
// Restricts the extraction to the given labels (physical labels: tau for g_plus, s for g_minus).
RadiationProfile extract_g(const Trajectory& trajectory, const std::vector<double>& labels, double horizon,
                           const ModelParams& params, double min_span = 0.0);

// Sharp Hoelder constant [(p+1)E/(4pi)]^{p/(p+1)} (p-2)^{-1/(p+1)} of the invariant decay bound.
double radiation_decay_constant(double E, const ModelParams& params);

struct DecayFit {
  double alpha = 0.0;
  double C = 0.0;
  std::size_t points = 0;
  bool below_noise_floor = false;
  double threshold = 0.0;  // (p-2)/(p+1) - 0.1
  bool passed = false;
};

// Least squares of log|invariant(t) - g| against log(t - label) for t - label in [lo, hi],
// with g the invariant at the last sample of the trace.
DecayFit decay_fit(const CharacteristicTrace& trace, double lo, double hi, const ModelParams& params);

struct FreeWave {
  double V = 0.0;
  double V_r = 0.0;
  double V_t = 0.0;
};

FreeWave free_wave_eval(const RadiationProfile& profile, double r, double t);

struct ExteriorDifference {
  double value = 0.0;
  double r_start = 0.0;
  bool truncated = false;  // exterior starts beyond the grid
};

// 2 pi int_{r > t - label0} (|w_r - V_r|^2 + |w_t - V_t|^2) dr at run time t.
// For g_minus the trajectory must be the reversed run and label0 is s0.
ExteriorDifference exterior_difference(const Trajectory& trajectory, const RadiationProfile& profile,
                                       double label0, double t);

struct AnnulusEnergy {
  double t_abs = 0.0;
  double inner_radius = 0.0;  // c|t|
  double outer_radius = 0.0;  // |t| - |t|^beta
  double inner = 0.0;
  double annulus = 0.0;
  double exterior = 0.0;
};

double annulus_min_time(double c, double beta);
AnnulusEnergy annulus_energy(const FieldState& state, double c, double beta, const ModelParams& params);

// Compares two estimators of the retarded energy at run time t of a forward run:
// the annulus energy E(t; ct, t - t^beta) and E - E~_+ with E~_+ = pi int psi(t)^2.
// The bar collects the inner energy, E_-(t; a, inf), the potential part beyond a,
// the boundary term 2 pi w(a)^2/a and the outgoing energy pi int_0^a psi^2, a = t - t^beta.
struct EstimatorConsistency {
  double annulus = 0.0;
  double defect = 0.0;  // E - E~_+
  double bar = 0.0;
  bool agree = false;
};

EstimatorConsistency estimator_consistency(const Trajectory& trajectory, double t, double c, double beta,
                                           const ModelParams& params);

// int_{r > |t|} (r - |t|)^kappa e3 dr; kappa = 0 gives the exterior energy.
double weighted_energy(const FieldState& state, double kappa, const ModelParams& params);

struct Theorem2Ledger {
  double R = 0.0;
  double beta = 0.0;
  double kappa = 0.0;
  double I = 0.0;             // weighted energy of the data
  double raw_lhs = 0.0;       // int_{R<|t|<=T} int_{|x|<R} e
  double raw_rhs = 0.0;       // int_{-R}^{R} int_{|x|>R} e
  double rhs_upper = 0.0;     // 2/(1-kappa) R^{1-kappa} I
  double retarded = 0.0;      // int_{-R-R^beta}^{-R} int_{|x|<R} e
  double lhs_lower = 0.0;     // (E - E~_-)/2 R^beta
  double exponent_gap = 0.0;  // beta - (1 - kappa)
  bool lhs_le_rhs = false;
  bool rhs_le_upper = false;
};

// Throws DomainError with the admissible (beta, kappa) region when the exponents are out of order.
void validate_theorem2_exponents(double beta, double kappa, const ModelParams& params);

// Needs radius probes at R in both runs and a horizon >= R + R^beta.
Theorem2Ledger theorem2_ledger(const TwoSidedRun& run, double R, double beta, double kappa, double E_tilde_minus,
                               const ModelParams& params, double tol = 1e-9);

struct AppendixWindow {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double mu = 0.0;
  double rhs = 0.0;  // 2 int g^2 + 2 int K^2
  bool holds = false;
};

struct AppendixReport {
  double m_integral = 0.0;       // sum_tau M(tau) dtau
  double double_integral = 0.0;  // int int |w|^{p+1}/r^p
  double relative_gap = 0.0;
  std::vector<AppendixWindow> windows;
  double empirical_constant = 0.0;  // max_tau K / (Q^{2/(p+1)} M^{(p-2)/(p+1)})
  double proof_constant = 0.0;
  std::size_t labels_used = 0;
};

std::vector<std::pair<double, double>> random_windows(std::size_t count, double lo, double hi, double dr,
                                                      std::uint32_t seed);

// Needs label sums on a forward run; windows lie within [0, t_end].
AppendixReport appendix_inequalities(const Trajectory& trajectory, const RadiationProfile& g_plus,
                                     const std::vector<std::pair<double, double>>& windows,
                                     const ModelParams& params);

}  // namespace radwave
