#include "radwave/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "radwave/errors.hpp"
#include "radwave/quadrature.hpp"

namespace radwave {

namespace {

std::vector<double> sample_values(const RadiationProfile& profile) {
  std::vector<double> v(profile.samples.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = profile.samples[k].value;
  return v;
}

std::vector<double> e3_series(const RadiusSeries& rs, const Trajectory& tr, bool outer) {
  std::vector<double> v(rs.inner_e3.size());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = outer ? tr.steps[n].e3_total - rs.inner_e3[n] : rs.inner_e3[n];
  return v;
}

}  // namespace

double RadiationProfile::value_at(double label) const {
  if (samples.empty() || dlabel <= 0.0) return 0.0;
  const double u = (label - label_min()) / dlabel;
  const double last = static_cast<double>(samples.size() - 1);
  if (u < -1e-9 || u > last + 1e-9) return 0.0;
  const double uc = std::clamp(u, 0.0, last);
  auto k = static_cast<std::size_t>(std::floor(uc));
  if (k >= samples.size() - 1) return samples.back().value;
  const double th = uc - static_cast<double>(k);
  return samples[k].value * (1.0 - th) + samples[k + 1].value * th;
}

double radiation_decay_constant(double E, const ModelParams& params) {
  const double p = params.p;
  if (params.linear || E <= 0.0) return 0.0;
  return std::pow((p + 1.0) * E / (4.0 * M_PI), p / (p + 1.0)) * std::pow(p - 2.0, -1.0 / (p + 1.0));
}

RadiationProfile extract_g(const Trajectory& trajectory, double horizon, const ModelParams& params, double min_span) {
  const GridSpec& g = trajectory.grid;
  if (horizon < 0.0 || horizon > g.t_end + 1e-9 || !g.on_lattice(horizon)) {
    throw DomainError("extraction horizon must be a lattice time within the run");
  }
  const FieldState& s = trajectory.snapshot_at(trajectory.initial.t + horizon);
  RadiationProfile prof;
  prof.kind = trajectory.reversed ? RadiationKind::g_minus : RadiationKind::g_plus;
  prof.dlabel = g.dr;
  const double E = trajectory.steps.front().energy;
  prof.decay_constant = radiation_decay_constant(E, params);
  const double alpha = (params.p - 2.0) / (params.p + 1.0);
  for (std::size_t i = 0; i <= g.n_r; ++i) {
    const double r = g.radius(i);
    RadiationSample smp;
    smp.label = trajectory.reversed ? r - horizon : horizon - r;
    smp.value = s.psi[i];
    smp.extraction_time = trajectory.reversed ? -horizon : horizon;
    smp.error_estimate = prof.decay_constant * std::pow(std::max(r, g.dr), -alpha);
    smp.short_span = r < min_span;
    prof.samples.push_back(smp);
  }
  if (!trajectory.reversed) std::reverse(prof.samples.begin(), prof.samples.end());
  const auto v = sample_values(prof);
  std::vector<double> sq(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) sq[k] = v[k] * v[k];
  prof.scattered_energy = M_PI * trapezoid(sq, g.dr, 0, sq.size() - 1);
  return prof;
}

RadiationProfile extract_g(const Trajectory& trajectory, const std::vector<double>& labels, double horizon,
                           const ModelParams& params, double min_span) {
  RadiationProfile full = extract_g(trajectory, horizon, params, min_span);
  RadiationProfile out = full;
  out.samples.clear();
  std::vector<double> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  for (double lab : sorted) {
    if (!trajectory.grid.on_lattice(lab)) throw ProbeError("radiation label " + std::to_string(lab) + " is off the lattice");
    bool found = false;
    for (const auto& smp : full.samples) {
      if (std::abs(smp.label - lab) <= 1e-9 * full.dlabel) {
        out.samples.push_back(smp);
        found = true;
        break;
      }
    }
    if (!found) throw ProbeError("radiation label " + std::to_string(lab) + " is outside the grid at the horizon");
  }
  double acc = 0.0;
  for (std::size_t k = 1; k < out.samples.size(); ++k) {
    const double dl = out.samples[k].label - out.samples[k - 1].label;
    acc += 0.5 * dl * (out.samples[k].value * out.samples[k].value + out.samples[k - 1].value * out.samples[k - 1].value);
  }
  out.scattered_energy = M_PI * acc;
  return out;
}

DecayFit decay_fit(const CharacteristicTrace& trace, double lo, double hi, const ModelParams& params) {
  if (!(hi > lo) || lo <= 0.0) throw DomainError("decay fit window must satisfy 0 < lo < hi");
  if (trace.samples.size() < 3) throw ProbeError("trace too short for a decay fit");
  DecayFit fit;
  fit.threshold = (params.p - 2.0) / (params.p + 1.0) - 0.1;
  const double g = trace.invariant(trace.samples.size() - 1);
  double scale = std::abs(g);
  for (std::size_t k = 0; k < trace.samples.size(); ++k) scale = std::max(scale, std::abs(trace.invariant(k)));
  const double floor = 1e-12 * std::max(1.0, scale);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < trace.samples.size(); ++k) {
    const double x = trace.samples[k].r;
    if (x < lo || x > hi) continue;
    const double d = std::abs(trace.invariant(k) - g);
    if (d <= floor) continue;
    const double lx = std::log(x), ly = std::log(d);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  fit.points = n;
  if (n < 3) {
    fit.below_noise_floor = true;
    fit.passed = true;
    return fit;
  }
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  fit.alpha = -slope;
  fit.C = std::exp((sy - slope * sx) / dn);
  fit.passed = fit.alpha >= fit.threshold;
  return fit;
}

FreeWave free_wave_eval(const RadiationProfile& profile, double r, double t) {
  FreeWave out;
  if (profile.samples.empty()) return out;
  const double a = t - r, b = t + r;
  out.V = 0.5 * clipped_trapezoid(sample_values(profile), profile.dlabel, std::min(a, b), std::max(a, b),
                                  profile.label_min());
  if (b < a) out.V = -out.V;
  out.V_r = 0.5 * (profile.value_at(b) + profile.value_at(a));
  out.V_t = 0.5 * (profile.value_at(b) - profile.value_at(a));
  return out;
}

ExteriorDifference exterior_difference(const Trajectory& trajectory, const RadiationProfile& profile, double label0,
                                       double t) {
  const bool minus = profile.kind == RadiationKind::g_minus;
  if (minus != trajectory.reversed) {
    throw DomainError(minus ? "g_minus comparisons need the reversed run" : "g_plus comparisons need the forward run");
  }
  const double run_label0 = minus ? -label0 : label0;
  auto f = [&](double x) { return profile.value_at(minus ? -x : x); };
  const FieldState& s = trajectory.snapshot_at(t);
  ExteriorDifference out;
  out.r_start = std::max(0.0, s.t - run_label0);
  const double r_max = s.dr * static_cast<double>(s.size() - 1);
  if (out.r_start >= r_max) {
    out.truncated = true;
    return out;
  }
  std::vector<double> d(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = s.radius(i);
    const double a = s.phi[i] - f(s.t + r);
    const double b = s.psi[i] - f(s.t - r);
    d[i] = M_PI * (a * a + b * b);
  }
  out.value = clipped_trapezoid(d, s.dr, out.r_start, r_max);
  return out;
}

double annulus_min_time(double c, double beta) { return std::pow(1.0 / (1.0 - c), 1.0 / (1.0 - beta)); }

AnnulusEnergy annulus_energy(const FieldState& state, double c, double beta, const ModelParams& params) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("annulus requires 0 < c < 1");
  const double beta0 = params.linear ? 1.0 : critical_exponents(params).beta0;
  if (!(beta > 0.0 && beta < beta0)) throw DomainError("annulus requires 0 < beta < beta0 = " + std::to_string(beta0));
  AnnulusEnergy out;
  out.t_abs = std::abs(state.t);
  out.inner_radius = c * out.t_abs;
  out.outer_radius = out.t_abs - std::pow(out.t_abs, beta);
  if (!(out.inner_radius < out.outer_radius)) {
    throw DomainError("annulus ordering c|t| < |t| - |t|^beta fails; need |t| > " +
                      std::to_string(annulus_min_time(c, beta)));
  }
  const auto e3 = energy_density_3d(state, params);
  const double r_max = state.dr * static_cast<double>(state.size() - 1);
  out.inner = clipped_trapezoid(e3, state.dr, 0.0, out.inner_radius);
  out.annulus = clipped_trapezoid(e3, state.dr, out.inner_radius, out.outer_radius);
  out.exterior = clipped_trapezoid(e3, state.dr, out.outer_radius, r_max);
  return out;
}

EstimatorConsistency estimator_consistency(const Trajectory& trajectory, double t, double c, double beta,
                                           const ModelParams& params) {
  const FieldState& s = trajectory.snapshot_at(t);
  const AnnulusEnergy an = annulus_energy(s, c, beta, params);
  const double E = trajectory.steps.front().energy;
  const double a = an.outer_radius;
  const double r_max = s.dr * static_cast<double>(s.size() - 1);
  std::vector<double> psi2(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) psi2[i] = M_PI * s.psi[i] * s.psi[i];
  const double e_tilde = trapezoid(psi2, s.dr, 0, psi2.size() - 1);
  const EnergyPartition outer = partition_energies(s, a, r_max, params);
  std::vector<double> w(s.w);
  const double wa = clipped_trapezoid(w, s.dr, a - 0.5 * s.dr, a + 0.5 * s.dr) / s.dr;
  EstimatorConsistency out;
  out.annulus = an.annulus;
  out.defect = E - e_tilde;
  out.bar = an.inner + outer.E_minus + outer.potential_part + 2.0 * M_PI * wa * wa / a +
            clipped_trapezoid(psi2, s.dr, 0.0, a);
  out.agree = std::abs(out.annulus - out.defect) <= out.bar + 1e-6 * E;
  return out;
}

double weighted_energy(const FieldState& state, double kappa, const ModelParams& params) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw DomainError("weight exponent must lie in [0, 1]");
  const double ta = std::abs(state.t);
  auto e3 = energy_density_3d(state, params);
  const double r_max = state.dr * static_cast<double>(state.size() - 1);
  if (kappa > 0.0) {
    for (std::size_t i = 0; i < e3.size(); ++i) {
      const double x = state.radius(i) - ta;
      e3[i] = x > 0.0 ? std::pow(x, kappa) * e3[i] : 0.0;
    }
  }
  return clipped_trapezoid(e3, state.dr, ta, r_max);
}

void validate_theorem2_exponents(double beta, double kappa, const ModelParams& params) {
  const auto ce = critical_exponents(params);
  const bool ok = kappa > ce.kappa0 && kappa <= 1.0 && beta > 1.0 - kappa && beta < ce.beta0;
  if (!ok) {
    throw DomainError("exponents (beta=" + std::to_string(beta) + ", kappa=" + std::to_string(kappa) +
                      ") outside the admissible region: kappa in (" + std::to_string(ce.kappa0) +
                      ", 1], beta in (1 - kappa, " + std::to_string(ce.beta0) + ")");
  }
}

Theorem2Ledger theorem2_ledger(const TwoSidedRun& run, double R, double beta, double kappa, double E_tilde_minus,
                               const ModelParams& params, double tol) {
  validate_theorem2_exponents(beta, kappa, params);
  const Trajectory& f = run.forward;
  const Trajectory& b = run.backward;
  const double T = std::min(f.grid.t_end, b.grid.t_end);
  const double Rb = std::pow(R, beta);
  if (T + 1e-9 < R + Rb) {
    throw DomainError("horizon " + std::to_string(T) + " is shorter than R + R^beta = " + std::to_string(R + Rb));
  }
  const RadiusSeries& rf = f.radius(R);
  const RadiusSeries& rb = b.radius(R);
  const double h = f.grid.dr;
  Theorem2Ledger L;
  L.R = R;
  L.beta = beta;
  L.kappa = kappa;
  const double E = f.steps.front().energy;
  L.I = weighted_energy(f.initial, kappa, params);
  L.raw_lhs = time_integral(e3_series(rf, f, false), h, R, T) + time_integral(e3_series(rb, b, false), h, R, T);
  L.raw_rhs = time_integral(e3_series(rf, f, true), h, 0.0, R) + time_integral(e3_series(rb, b, true), h, 0.0, R);
  L.rhs_upper = 2.0 / (1.0 - kappa) * std::pow(R, 1.0 - kappa) * L.I;
  L.retarded = time_integral(e3_series(rb, b, false), h, R, R + Rb);
  L.lhs_lower = 0.5 * (E - E_tilde_minus) * Rb;
  L.exponent_gap = beta - (1.0 - kappa);
  L.lhs_le_rhs = L.raw_lhs <= L.raw_rhs * (1.0 + tol);
  L.rhs_le_upper = L.raw_rhs <= L.rhs_upper * (1.0 + tol);
  return L;
}

std::vector<std::pair<double, double>> random_windows(std::size_t count, double lo, double hi, double dr,
                                                      std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<std::pair<double, double>> out;
  while (out.size() < count) {
    double a = std::round(dist(gen) / dr) * dr;
    double b = std::round(dist(gen) / dr) * dr;
    if (a > b) std::swap(a, b);
    if (b - a < dr) continue;
    out.emplace_back(a, b);
  }
  return out;
}

AppendixReport appendix_inequalities(const Trajectory& trajectory, const RadiationProfile& g_plus,
                                     const std::vector<std::pair<double, double>>& windows,
                                     const ModelParams& params) {
  if (!trajectory.labels) throw ProbeError("appendix checks need label sums recorded during the run");
  if (trajectory.reversed || g_plus.kind != RadiationKind::g_plus) {
    throw DomainError("appendix checks use the forward run and g_plus");
  }
  const LabelSums& ls = *trajectory.labels;
  const double h = trajectory.grid.dr;
  const double p = params.p;
  AppendixReport rep;
  for (double m : ls.m) rep.m_integral += h * m;
  std::vector<double> dis(trajectory.steps.size());
  for (std::size_t n = 0; n < dis.size(); ++n) dis[n] = trajectory.steps[n].dissipation;
  rep.double_integral = time_integral(dis, h, 0.0, trajectory.grid.t_end);
  const double denom = std::max(std::abs(rep.double_integral), 1e-300);
  rep.relative_gap = rep.double_integral == 0.0 && rep.m_integral == 0.0
                         ? 0.0
                         : std::abs(rep.m_integral - rep.double_integral) / denom;

  std::vector<double> g2(g_plus.samples.size());
  for (std::size_t k = 0; k < g2.size(); ++k) g2[k] = g_plus.samples[k].value * g_plus.samples[k].value;
  std::vector<double> k2(ls.k.size());
  for (std::size_t k = 0; k < k2.size(); ++k) k2[k] = ls.k[k] * ls.k[k];
  const double k_origin = ls.tau(0);
  for (const auto& [a, b] : windows) {
    if (a < 0.0 || b > trajectory.grid.t_end + 1e-9 || !(a < b)) {
      throw DomainError("appendix window must lie within [0, t_end]");
    }
    AppendixWindow w;
    w.tau1 = a;
    w.tau2 = b;
    w.mu = mu_accumulate(trajectory, a, b);
    w.rhs = 2.0 * clipped_trapezoid(g2, g_plus.dlabel, a, b, g_plus.label_min()) +
            2.0 * clipped_trapezoid(k2, h, a, b, k_origin);
    w.holds = w.mu <= w.rhs;
    rep.windows.push_back(w);
  }

  const double m_max = ls.m.empty() ? 0.0 : *std::max_element(ls.m.begin(), ls.m.end());
  for (std::size_t k = 0; k < ls.m.size(); ++k) {
    if (!(ls.m[k] > 1e-8 * m_max) || !(ls.q_plus_plus[k] > 0.0)) continue;
    const double ratio =
        ls.k[k] / (std::pow(ls.q_plus_plus[k], 2.0 / (p + 1.0)) * std::pow(ls.m[k], (p - 2.0) / (p + 1.0)));
    rep.empirical_constant = std::max(rep.empirical_constant, ratio);
    ++rep.labels_used;
  }
  rep.proof_constant = (std::pow(2.0, -1.0 / (p + 1.0)) + std::pow(p - 2.0, -1.0 / (p + 1.0))) *
                       std::pow((p + 1.0) / (4.0 * M_PI), 2.0 / (p + 1.0));
  return rep;
}

}  // namespace radwave
