#include "radwave/energy_ledger.hpp"

#include <algorithm>
#include <cmath>

#include "radwave/errors.hpp"
#include "radwave/quadrature.hpp"

namespace radwave {

namespace {

double pot_coeff(const ModelParams& params) { return 2.0 / (params.p + 1.0); }

double dissipation_coeff(const ModelParams& params) { return 2.0 * M_PI * (params.p - 1.0) / (params.p + 1.0); }

template <class F>
std::vector<double> nodal(const FieldState& s, F&& f) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = f(i);
  return out;
}

double signed_integral(const std::vector<double>& series, double h, double a, double b) {
  if (b >= a) return clipped_trapezoid(series, h, a, b);
  return -clipped_trapezoid(series, h, b, a);
}

template <class F>
double trace_integral(const CharacteristicTrace& tr, double t1, double t2, F&& integrand) {
  const double lo = std::min(t1, t2), hi = std::max(t1, t2);
  const std::size_t k1 = tr.index_at(lo), k2 = tr.index_at(hi);
  double s = 0.0;
  for (std::size_t k = k1; k < k2; ++k) {
    const double dt = tr.samples[k + 1].t - tr.samples[k].t;
    s += 0.5 * dt * (integrand(tr.samples[k]) + integrand(tr.samples[k + 1]));
  }
  return t2 >= t1 ? s : -s;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a) + std::abs(b)); }

}  // namespace

double energy_of_state(const FieldState& state, const ModelParams& params) {
  const double pc = pot_coeff(params);
  const auto f = nodal(state, [&](std::size_t i) {
    const double wr = state.w_r(i), wt = state.w_t(i);
    return 2.0 * M_PI * (wr * wr + wt * wt + pc * potential_density(state.w[i], state.radius(i), params));
  });
  return trapezoid(f, state.dr, 0, f.size() - 1);
}

std::vector<double> energy_density_3d(const FieldState& state, const ModelParams& params) {
  const double pc = pot_coeff(params);
  return nodal(state, [&](std::size_t i) {
    const double r = state.radius(i);
    const double g = i == 0 ? 0.0 : state.w_r(i) - state.w[i] / r;
    const double wt = state.w_t(i);
    return 2.0 * M_PI * (g * g + wt * wt + pc * potential_density(state.w[i], r, params));
  });
}

EnergyPartition partition_energies(const FieldState& state, double r1, double r2, const ModelParams& params) {
  if (!(r1 < r2)) throw DomainError("partition requires r1 < r2");
  if (r1 < 0.0) throw DomainError("partition requires r1 >= 0");
  const double pc = pot_coeff(params);
  const auto pot = nodal(state, [&](std::size_t i) { return M_PI * pc * potential_density(state.w[i], state.radius(i), params); });
  const auto em = nodal(state, [&](std::size_t i) { return M_PI * state.phi[i] * state.phi[i] + pot[i]; });
  const auto ep = nodal(state, [&](std::size_t i) { return M_PI * state.psi[i] * state.psi[i] + pot[i]; });
  EnergyPartition out;
  out.t = state.t;
  out.r1 = r1;
  out.r2 = r2;
  out.E_total = energy_of_state(state, params);
  out.E_minus = clipped_trapezoid(em, state.dr, r1, r2);
  out.E_plus = clipped_trapezoid(ep, state.dr, r1, r2);
  out.potential_part = clipped_trapezoid(pot, state.dr, r1, r2);
  return out;
}

std::string to_string(FluxKind kind) {
  switch (kind) {
    case FluxKind::Q_minus_minus: return "Q_minus_minus";
    case FluxKind::Q_plus_minus: return "Q_plus_minus";
    case FluxKind::Q_minus_plus: return "Q_minus_plus";
    case FluxKind::Q_plus_plus: return "Q_plus_plus";
  }
  return "";
}

FluxSegment flux_segment(const CharacteristicTrace& trace, double t1, double t2, FluxKind kind,
                         const ModelParams& params) {
  const bool incoming_kind = kind == FluxKind::Q_minus_minus || kind == FluxKind::Q_plus_minus;
  if (incoming_kind != (trace.kind == TraceKind::incoming)) {
    throw DomainError(to_string(kind) + " is not carried by a trace of this direction");
  }
  if (t2 < t1) throw DomainError("flux window must satisfy t1 <= t2");
  FluxSegment seg;
  seg.kind = kind;
  seg.label = trace.label;
  seg.t1 = t1;
  seg.t2 = t2;
  const double qc = 4.0 * M_PI / (params.p + 1.0);
  switch (kind) {
    case FluxKind::Q_minus_minus:
    case FluxKind::Q_plus_plus:
      seg.value = trace_integral(trace, t1, t2, [&](const TraceSample& s) { return qc * potential_density(s.w, s.r, params); });
      break;
    case FluxKind::Q_plus_minus:
      seg.value = trace_integral(trace, t1, t2, [&](const TraceSample& s) { return 2.0 * M_PI * s.psi * s.psi; });
      break;
    case FluxKind::Q_minus_plus:
      seg.value = trace_integral(trace, t1, t2, [&](const TraceSample& s) { return 2.0 * M_PI * s.phi * s.phi; });
      break;
  }
  return seg;
}

MuAccumulator mu_series(const Trajectory& trajectory) {
  MuAccumulator mu;
  const double h = trajectory.grid.dr;
  double acc = 0.0;
  for (std::size_t n = 0; n < trajectory.steps.size(); ++n) {
    const double u = trajectory.steps[n].u0_richardson;
    mu.t.push_back(trajectory.steps[n].t);
    mu.density.push_back(u * u);
    if (n > 0) acc += 0.5 * h * (mu.density[n - 1] + mu.density[n]);
    mu.P.push_back(acc);
  }
  return mu;
}

double mu_accumulate(const Trajectory& trajectory, double t1, double t2) {
  const double t0 = trajectory.initial.t;
  const double end = t0 + trajectory.grid.t_end;
  if (t1 < t0 - 1e-12 || t2 > end + 1e-9 || t2 < t1) {
    throw DomainError("mu window must lie within the run horizon");
  }
  std::vector<double> density(trajectory.steps.size());
  for (std::size_t n = 0; n < density.size(); ++n) {
    const double u = trajectory.steps[n].u0_richardson;
    density[n] = u * u;
  }
  return clipped_trapezoid(density, trajectory.grid.dr, t1 - t0, t2 - t0);
}

std::string to_string(FluxFamily family) { return family == FluxFamily::inward ? "inward" : "outward"; }

void validate_region(const Polygon& region, const GridSpec& grid) {
  const auto& v = region.vertices;
  if (v.size() < 3) throw ProbeError("region needs at least 3 vertices");
  double area2 = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto [r1, t1] = v[k];
    const auto [r2, t2] = v[(k + 1) % v.size()];
    if (r1 < 0.0) throw ProbeError("region vertex with negative radius");
    if (r1 > grid.r_max + 1e-12 || t1 < -1e-12 || t1 > grid.t_end + 1e-12) {
      throw ProbeError("region vertex outside the computed domain [0, r_max] x [0, t_end]");
    }
    grid.index_of(r1, "region vertex r");
    grid.index_of(t1, "region vertex t");
    const double dr = r2 - r1, dt = t2 - t1;
    const bool ok = dt == 0.0 || dr == 0.0 || close(dr, dt) || close(dr, -dt);
    if (!ok || (dr == 0.0 && dt == 0.0)) {
      throw ProbeError("region side is not horizontal, vertical or characteristic");
    }
    area2 += r1 * t2 - r2 * t1;
  }
  if (!(area2 > 0.0)) throw ProbeError("region must be oriented counterclockwise in the (r, t) plane");
}

FluxResidual flux_identity_residual(const Trajectory& trajectory, const Polygon& region, FluxFamily family,
                                    const ModelParams& params) {
  const GridSpec& g = trajectory.grid;
  validate_region(region, g);
  const bool inward = family == FluxFamily::inward;
  const double pc = pot_coeff(params);
  const double h = g.dr;
  FluxResidual out;
  out.family = family;
  const auto& v = region.vertices;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto [r1, t1] = v[k];
    const auto [r2, t2] = v[(k + 1) % v.size()];
    EdgeTerm e;
    e.from = v[k];
    e.to = v[(k + 1) % v.size()];
    const double dr = r2 - r1, dt = t2 - t1;
    if (dt == 0.0) {
      e.kind = "horizontal";
      const FieldState& s = trajectory.snapshot_at(trajectory.initial.t + t1);
      const auto A = nodal(s, [&](std::size_t i) {
        const double P = pc * potential_density(s.w[i], s.radius(i), params);
        const double x = inward ? s.phi[i] : s.psi[i];
        return M_PI * (x * x + P);
      });
      e.value = -signed_integral(A, h, r1, r2);
    } else if (dr == 0.0 && r1 == 0.0) {
      e.kind = "axis";
      std::vector<double> B(trajectory.steps.size());
      for (std::size_t n = 0; n < B.size(); ++n) {
        const double u = trajectory.steps[n].u0_richardson;
        B[n] = (inward ? M_PI : -M_PI) * u * u;
      }
      e.value = -signed_integral(B, h, t1, t2);
    } else if (dr == 0.0) {
      e.kind = "vertical";
      const RadiusSeries& rs = trajectory.radius(r1);
      std::vector<double> B(rs.t.size());
      for (std::size_t n = 0; n < B.size(); ++n) {
        const double P = pc * potential_density(rs.w[n], rs.R, params);
        B[n] = inward ? M_PI * (rs.phi[n] * rs.phi[n] - P) : M_PI * (-rs.psi[n] * rs.psi[n] + P);
      }
      e.value = -signed_integral(B, h, t1, t2);
    } else if (close(dr, dt)) {
      e.kind = "outgoing";
      const CharacteristicTrace& tr = trajectory.trace(TraceKind::outgoing, t1 - r1);
      e.value = -trace_integral(tr, trajectory.initial.t + t1, trajectory.initial.t + t2, [&](const TraceSample& s) {
        return inward ? 2.0 * M_PI * s.phi * s.phi : 2.0 * M_PI * pc * potential_density(s.w, s.r, params);
      });
    } else {
      e.kind = "incoming";
      const CharacteristicTrace& tr = trajectory.trace(TraceKind::incoming, t1 + r1);
      e.value = trace_integral(tr, trajectory.initial.t + t1, trajectory.initial.t + t2, [&](const TraceSample& s) {
        return inward ? 2.0 * M_PI * pc * potential_density(s.w, s.r, params) : 2.0 * M_PI * s.psi * s.psi;
      });
    }
    out.line_sum += e.value;
    out.scale += std::abs(e.value);
    out.edges.push_back(e);
  }
  out.double_integral = trajectory.region(region).dissipation;
  const double c = dissipation_coeff(params);
  out.area_term = (inward ? -c : c) * out.double_integral;
  out.scale += std::abs(out.area_term);
  out.residual = std::abs(out.line_sum - out.area_term);
  return out;
}

ProbeSet triangle_law_probes(double t0, double r0) {
  ProbeSet p;
  p.add_region(Polygon::triangle(t0, r0));
  return p;
}

TriangleLawReport triangle_law_report(const Trajectory& trajectory, double t0, double r0, const ModelParams& params) {
  if (!(r0 > 0.0)) throw DomainError("triangle needs r0 > 0");
  const double t_start = trajectory.initial.t;
  if (t0 < t_start - 1e-12 || t0 + r0 > t_start + trajectory.grid.t_end + 1e-9) {
    throw DomainError("triangle extends beyond the computed horizon");
  }
  TriangleLawReport rep;
  rep.t0 = t0;
  rep.r0 = r0;
  const FieldState& s = trajectory.snapshot_at(t0);
  rep.e_minus = partition_energies(s, 0.0, r0, params).E_minus;
  rep.mu_term = M_PI * mu_accumulate(trajectory, t0, t0 + r0);
  const auto& tr = trajectory.trace(TraceKind::incoming, t0 + r0 - t_start);
  rep.q_minus_minus = flux_segment(tr, t0, t0 + r0, FluxKind::Q_minus_minus, params).value;
  rep.double_term = dissipation_coeff(params) * trajectory.region(Polygon::triangle(t0 - t_start, r0)).dissipation;
  rep.residual = std::abs(rep.e_minus - rep.mu_term - rep.q_minus_minus - rep.double_term);
  return rep;
}

double time_integral(const std::vector<double>& series, double dr, double t1, double t2) {
  return signed_integral(series, dr, t1, t2);
}

EnergyIdentityReport energy_identity_check(const TwoSidedRun& run, double T, const ModelParams& params) {
  const Trajectory& f = run.forward;
  const Trajectory& b = run.backward;
  if (T > f.grid.t_end + 1e-9 || T > b.grid.t_end + 1e-9) {
    throw DomainError("identity horizon exceeds the computed runs");
  }
  EnergyIdentityReport rep;
  rep.T = T;
  rep.energy = f.steps.front().energy;
  rep.mu_term = M_PI * (mu_accumulate(f, 0.0, T) + mu_accumulate(b, 0.0, T));
  auto dis = [](const Trajectory& tr) {
    std::vector<double> d(tr.steps.size());
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = tr.steps[n].dissipation;
    return d;
  };
  const double h = f.grid.dr;
  rep.double_term = dissipation_coeff(params) * (time_integral(dis(f), h, 0.0, T) + time_integral(dis(b), h, 0.0, T));
  rep.residual = std::abs(rep.mu_term + rep.double_term - rep.energy);
  rep.tail_estimate = f.steps[f.step_index(T)].e_minus + b.steps[b.step_index(T)].e_minus;
  rep.horizon_sufficient = rep.tail_estimate <= 1e-2 * rep.energy;
  return rep;
}

MorawetzReport morawetz_report(const TwoSidedRun& run, double R, double T, const ModelParams& params) {
  const Trajectory& f = run.forward;
  const Trajectory& b = run.backward;
  if (!f.grid.on_lattice(R) || R <= 0.0) throw ProbeError("Morawetz radius must be a positive lattice radius");
  if (T > f.grid.t_end + 1e-9 || T > b.grid.t_end + 1e-9) throw DomainError("Morawetz horizon exceeds the runs");
  const RadiusSeries& rf = f.radius(R);
  const RadiusSeries& rb = b.radius(R);
  const double h = f.grid.dr;
  const double p = params.p;
  auto both = [&](auto&& getter, double a, double c) {
    return time_integral(getter(rf, f), h, a, c) + time_integral(getter(rb, b), h, a, c);
  };
  auto inner_e3 = [](const RadiusSeries& rs, const Trajectory&) { return rs.inner_e3; };
  auto inner_pot = [](const RadiusSeries& rs, const Trajectory&) { return rs.inner_potential; };
  auto inner_kin = [](const RadiusSeries& rs, const Trajectory&) { return rs.inner_kinetic; };
  auto w2 = [R](const RadiusSeries& rs, const Trajectory&) {
    std::vector<double> v(rs.w.size());
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = rs.w[n] * rs.w[n] / (R * R);
    return v;
  };
  auto outer_dis = [](const RadiusSeries& rs, const Trajectory& tr) {
    std::vector<double> v(rs.w.size());
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = tr.steps[n].dissipation - rs.inner_dissipation[n];
    return v;
  };
  auto total_dis = [](const RadiusSeries& rs, const Trajectory& tr) {
    std::vector<double> v(rs.w.size());
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = tr.steps[n].dissipation;
    return v;
  };
  auto outer_e3 = [](const RadiusSeries& rs, const Trajectory& tr) {
    std::vector<double> v(rs.w.size());
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = tr.steps[n].e3_total - rs.inner_e3[n];
    return v;
  };

  MorawetzReport rep;
  rep.R = R;
  rep.T = T;
  rep.energy = f.steps.front().energy;
  rep.terms[0] = both(inner_e3, 0.0, T) / (2.0 * R);
  rep.terms[1] = M_PI * both(w2, 0.0, T);
  rep.terms[2] = 2.0 * M_PI * (p - 3.0) / ((p + 1.0) * R) * both(inner_pot, 0.0, T);
  rep.terms[3] = dissipation_coeff(params) * both(outer_dis, 0.0, T);
  rep.sum = rep.terms[0] + rep.terms[1] + rep.terms[2] + rep.terms[3];
  rep.defect = rep.energy - rep.sum;

  auto boundary = [&](const RadiusSeries& rs, const Trajectory& tr, std::size_t n) {
    return 2.0 * M_PI * (rs.inner_wtwr_weighted[n] + tr.steps[n].wtwr_total - rs.inner_wtwr[n]);
  };
  rep.boundary_future = boundary(rf, f, f.step_index(T));
  rep.boundary_past = -boundary(rb, b, b.step_index(T));
  rep.boundary_difference = rep.boundary_past - rep.boundary_future;
  rep.identity_residual = std::abs(rep.sum - rep.boundary_difference);

  rep.corollary[0] = both(inner_kin, 0.0, T);
  rep.corollary[1] = both(inner_pot, 0.0, T);
  rep.corollary[2] = both(total_dis, 0.0, T);
  rep.corollary[3] = both(w2, 0.0, T);
  rep.corollary_bounds[0] = R * rep.energy / M_PI;
  rep.corollary_bounds[1] = (p + 1.0) * R * rep.energy / (2.0 * (p - 2.0) * M_PI);
  rep.corollary_bounds[2] = (p + 1.0) * rep.energy / (2.0 * (p - 1.0) * M_PI);
  rep.corollary_bounds[3] = rep.energy / M_PI;

  rep.prop_lhs = T > R ? both(inner_e3, R, T) : 0.0;
  rep.prop_rhs = both(outer_e3, 0.0, std::min(R, T));
  rep.horizon_truncated = T < 2.0 * R;
  return rep;
}

}  // namespace radwave
