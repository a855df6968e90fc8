#include "radwave/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "radwave/errors.hpp"
#include "radwave/parallel.hpp"

namespace radwave {

namespace {

constexpr double kOverflow = 1e150;

std::size_t lattice_steps(double x, double h) { return static_cast<std::size_t>(std::llround(x / h)); }

bool same(double a, double b, double h) { return std::abs(a - b) <= 1e-9 * h; }

// Reusable buffers for one predictor-corrector step.
class Integrator {
 public:
  Integrator(const GridSpec& grid, const ModelParams& params) : grid_(grid), params_(params) {
    const std::size_t n = grid.n_r + 1;
    n_old_.resize(n);
    w_pred_.resize(n);
    pa_pred_.resize(grid.n_r);
    qa_pred_.resize(grid.n_r);
    n_node_.resize(n);
    n_half_.resize(grid.n_r);
    phi_.resize(n);
    psi_.resize(n);
    pa_.resize(grid.n_r);
    qa_.resize(grid.n_r);
    radius_.resize(n);
    for (std::size_t i = 0; i < n; ++i) radius_[i] = grid.radius(i);
  }

  void advance(FieldState& s) {
    const std::size_t nr = grid_.n_r;
    const double h = grid_.dr;
    if (params_.linear) {
      shift(s);
      return;
    }
    const std::vector<double>& w = s.w;
    for (std::size_t j = 0; j <= nr; ++j) n_old_[j] = N(w[j], radius_[j]);

    for (std::size_t i = 0; i + 1 < nr; ++i) pa_pred_[i] = s.phi_avg[i + 1] - h * n_old_[i + 1];
    pa_pred_[nr - 1] = 0.0;
    qa_pred_[0] = s.phi_avg[0];
    for (std::size_t i = 1; i < nr; ++i) qa_pred_[i] = s.psi_avg[i - 1] + h * n_old_[i];
    w_pred_[0] = 0.0;
    for (std::size_t i = 0; i < nr; ++i) w_pred_[i + 1] = w_pred_[i] + 0.5 * h * (pa_pred_[i] + qa_pred_[i]);

    for (std::size_t j = 0; j <= nr; ++j) n_node_[j] = N(0.5 * (w[j] + w_pred_[j]), radius_[j]);
    for (std::size_t j = 0; j < nr; ++j) {
      const double wm = 0.25 * (w[j] + w[j + 1] + w_pred_[j] + w_pred_[j + 1]);
      n_half_[j] = N(wm, radius_[j] + 0.5 * h);
    }

    for (std::size_t i = 0; i < nr; ++i) phi_[i] = s.phi[i + 1] - h * n_half_[i];
    phi_[nr] = 0.0;
    for (std::size_t i = 1; i <= nr; ++i) psi_[i] = s.psi[i - 1] + h * n_half_[i - 1];
    psi_[0] = phi_[0];

    for (std::size_t i = 0; i + 1 < nr; ++i) pa_[i] = s.phi_avg[i + 1] - h * n_node_[i + 1];
    pa_[nr - 1] = 0.0;
    for (std::size_t i = 1; i < nr; ++i) qa_[i] = s.psi_avg[i - 1] + h * n_node_[i];
    {
      // Origin cell: the reflected part of the cell is the triangle below the
      // line t - r = t_old, the rest is the triangle above it; centroids at r = h/3.
      const double dw = w_pred_[1] - w[1];
      const double w_low = (w[1] + dw / 3.0) / 3.0;
      const double w_high = (w[1] + 2.0 * dw / 3.0) / 3.0;
      const double rc = h / 3.0;
      qa_[0] = s.phi_avg[0] + 0.5 * h * (N(w_high, rc) - N(w_low, rc));
    }

    s.phi.swap(phi_);
    s.psi.swap(psi_);
    s.phi_avg.swap(pa_);
    s.psi_avg.swap(qa_);
    rebuild_w(s);
    s.t += h;
  }

 private:
  double N(double w, double r) const { return nonlinearity(w, r, params_); }

  void shift(FieldState& s) {
    const std::size_t nr = grid_.n_r;
    const double h = grid_.dr;
    for (std::size_t i = 0; i < nr; ++i) phi_[i] = s.phi[i + 1];
    phi_[nr] = 0.0;
    for (std::size_t i = 1; i <= nr; ++i) psi_[i] = s.psi[i - 1];
    psi_[0] = phi_[0];
    for (std::size_t i = 0; i + 1 < nr; ++i) pa_[i] = s.phi_avg[i + 1];
    pa_[nr - 1] = 0.0;
    for (std::size_t i = 1; i < nr; ++i) qa_[i] = s.psi_avg[i - 1];
    qa_[0] = s.phi_avg[0];
    s.phi.swap(phi_);
    s.psi.swap(psi_);
    s.phi_avg.swap(pa_);
    s.psi_avg.swap(qa_);
    rebuild_w(s);
    s.t += h;
  }

  void rebuild_w(FieldState& s) const {
    const double h = grid_.dr;
    s.w[0] = 0.0;
    for (std::size_t i = 0; i < grid_.n_r; ++i) s.w[i + 1] = s.w[i] + 0.5 * h * (s.phi_avg[i] + s.psi_avg[i]);
  }

  GridSpec grid_;
  ModelParams params_;
  std::vector<double> radius_;
  std::vector<double> n_old_, w_pred_, pa_pred_, qa_pred_, n_node_, n_half_;
  std::vector<double> phi_, psi_, pa_, qa_;
};

void check_state(const FieldState& s, const GridSpec& grid) {
  const std::size_t n = grid.n_r + 1;
  if (s.w.size() != n || s.phi.size() != n || s.psi.size() != n || s.phi_avg.size() != grid.n_r ||
      s.psi_avg.size() != grid.n_r) {
    throw ConfigError("state size does not match the grid");
  }
  if (s.dr != grid.dr) throw ConfigError("state spacing does not match the grid");
}

struct TraceSlot {
  CharacteristicTrace trace;
  long label_steps = 0;
  double last_n = 0.0;
};

struct RegionSlot {
  RegionIntegral integral;
  long n_lo = 0, n_hi = 0;
};

// Cross-section [a, b] of a convex polygon at height t.
bool cross_section(const Polygon& poly, double t, double& a, double& b) {
  a = std::numeric_limits<double>::infinity();
  b = -a;
  const auto& v = poly.vertices;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto [r1, t1] = v[k];
    const auto [r2, t2] = v[(k + 1) % v.size()];
    const double lo = std::min(t1, t2), hi = std::max(t1, t2);
    if (t < lo || t > hi) continue;
    if (t1 == t2) {
      a = std::min({a, r1, r2});
      b = std::max({b, r1, r2});
    } else {
      const double r = r1 + (t - t1) * (r2 - r1) / (t2 - t1);
      a = std::min(a, r);
      b = std::max(b, r);
    }
  }
  return a <= b;
}

class Recorder {
 public:
  Recorder(Trajectory& traj, const ProbeSet& probes) : traj_(traj), probes_(probes) {
    const GridSpec& g = traj.grid;
    const double h = g.dr;
    for (double t : probes.snapshot_times) {
      if (t < -1e-12 || t > g.t_end + 1e-9 || !g.on_lattice(t)) {
        throw ProbeError("snapshot time " + std::to_string(t) + " is not a lattice time within the run");
      }
      snap_steps_.push_back(lattice_steps(t, h));
    }
    for (const auto& req : probes.traces) {
      if (!g.on_lattice(req.label)) {
        throw ProbeError("characteristic label " + std::to_string(req.label) + " is not on the lattice");
      }
      bool dup = false;
      for (const auto& slot : traces_) {
        if (slot.trace.kind == req.kind && same(slot.trace.label, req.label, h)) dup = true;
      }
      if (dup) continue;
      TraceSlot slot;
      slot.trace.kind = req.kind;
      slot.trace.label = req.label;
      slot.label_steps = std::lround(req.label / h);
      traces_.push_back(slot);
    }
    for (double R : probes.radii) {
      bool dup = false;
      for (const auto& rs : radii_) dup = dup || same(rs.R, R, h);
      if (dup) continue;
      if (R <= 0.0 || R > g.r_max) throw ProbeError("radius " + std::to_string(R) + " outside (0, r_max]");
      RadiusSeries rs;
      rs.R = R;
      rs.index = g.index_of(R, "radius probe");
      radii_.push_back(rs);
    }
    std::sort(radii_.begin(), radii_.end(), [](const RadiusSeries& a, const RadiusSeries& b) { return a.index < b.index; });
    for (const auto& poly : probes.regions) {
      RegionSlot slot;
      slot.integral.region = poly;
      double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
      for (const auto& [r, t] : poly.vertices) {
        g.index_of(r, "region vertex r");
        if (t < -1e-12 || t > g.t_end + 1e-9) throw ProbeError("region vertex time outside the run");
        g.index_of(t, "region vertex t");
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
      }
      slot.n_lo = std::lround(tmin / h);
      slot.n_hi = std::lround(tmax / h);
      regions_.push_back(slot);
    }
    if (probes.label_sums) {
      LabelSums ls;
      ls.dr = h;
      ls.tau_offset = static_cast<std::ptrdiff_t>(g.n_r);
      const std::size_t count = g.n_r + g.n_t + 1;
      ls.q_plus_plus.assign(count, 0.0);
      ls.m.assign(count, 0.0);
      ls.k.assign(count, 0.0);
      ls.q_minus_minus.assign(count, 0.0);
      traj.labels = std::move(ls);
    }
    const std::size_t n = g.n_r + 1;
    pot_.resize(n);
    dis_.resize(n);
  }

  void record(std::size_t n, const FieldState& s) {
    const GridSpec& g = traj_.grid;
    const ModelParams& prm = traj_.params;
    const double h = g.dr;
    const std::size_t nn = g.n_r + 1;
    const double pc = 2.0 / (prm.p + 1.0);

    StepDiagnostics d;
    d.t = s.t;
    double s_kin_m = 0, s_kin_p = 0, s_pot = 0, s_dis = 0, s_e3 = 0, s_wtwr = 0;
    double c_kin = 0, c_pot = 0, c_dis = 0, c_e3 = 0, c_wtwr_w = 0, c_wtwr = 0;
    double f0_kin = 0, f0_e3 = 0;
    std::size_t next_radius = 0;

    for (std::size_t i = 0; i < nn; ++i) {
      const double r = g.radius(i);
      const double w = s.w[i];
      const double ph = s.phi[i], ps = s.psi[i];
      const double wr = 0.5 * (ph + ps), wt = 0.5 * (ph - ps);
      const double pot = potential_density(w, r, prm);
      const double dis = i == 0 ? 0.0 : pot / r;
      pot_[i] = pot;
      dis_[i] = dis;
      const double wt_weight = (i == 0 || i == nn - 1) ? 0.5 : 1.0;
      s_kin_m += wt_weight * ph * ph;
      s_kin_p += wt_weight * ps * ps;
      s_pot += wt_weight * pot;
      s_dis += wt_weight * dis;
      const double g3 = i == 0 ? 0.0 : wr - w / r;
      const double e3 = 2.0 * M_PI * (g3 * g3 + wt * wt + pc * pot);
      s_e3 += wt_weight * e3;
      s_wtwr += wt_weight * wt * wr;
      if (!radii_.empty()) {
        const double kin = wr * wr + wt * wt;
        if (i == 0) {
          f0_kin = kin;
          f0_e3 = e3;
        }
        c_kin += kin;
        c_pot += pot;
        c_dis += dis;
        c_e3 += e3;
        c_wtwr += wt * wr;
        while (next_radius < radii_.size() && radii_[next_radius].index == i) {
          RadiusSeries& rs = radii_[next_radius];
          const double R = rs.R;
          rs.t.push_back(s.t);
          rs.w.push_back(w);
          rs.phi.push_back(ph);
          rs.psi.push_back(ps);
          rs.inner_kinetic.push_back(h * (c_kin - 0.5 * (f0_kin + kin)));
          rs.inner_potential.push_back(h * (c_pot - 0.5 * pot));
          rs.inner_dissipation.push_back(h * (c_dis - 0.5 * dis));
          rs.inner_e3.push_back(h * (c_e3 - 0.5 * (f0_e3 + e3)));
          rs.inner_wtwr_weighted.push_back(h * (c_wtwr_w / R + 0.5 * r * wt * wr / R) );
          rs.inner_wtwr.push_back(h * (c_wtwr - 0.5 * (s.w_t(0) * s.w_r(0) + wt * wr)));
          ++next_radius;
        }
        c_wtwr_w += r * wt * wr;
      }
    }
    d.e_minus = M_PI * h * (s_kin_m + pc * s_pot);
    d.e_plus = M_PI * h * (s_kin_p + pc * s_pot);
    d.energy = M_PI * h * (s_kin_m + s_kin_p + 2.0 * pc * s_pot);
    d.potential = h * s_pot;
    d.dissipation = h * s_dis;
    d.e3_total = h * s_e3;
    d.wtwr_total = h * s_wtwr;
    d.u0_est = s.w[1] / h;
    d.u0_richardson = 2.0 * s.w[1] / h - s.w[2] / (2.0 * h);
    d.phi0 = s.phi[0];
    d.origin_gap = std::abs(s.phi[1] - s.psi[1]);
    if (!std::isfinite(d.energy) || d.energy > kOverflow) {
      throw DivergenceError(n, "energy is " + std::to_string(d.energy));
    }
    traj_.steps.push_back(d);

    const bool last = n == g.n_t;
    bool snap = last || (probes_.snapshot_stride > 0 && n % probes_.snapshot_stride == 0);
    for (std::size_t k : snap_steps_) snap = snap || k == n;
    if (snap && !last) traj_.snapshots.push_back(s);
    if (last) {
      traj_.snapshots.push_back(s);
      traj_.final_state = s;
    }

    for (auto& slot : traces_) {
      const long i = slot.trace.kind == TraceKind::outgoing ? static_cast<long>(n) - slot.label_steps
                                                            : slot.label_steps - static_cast<long>(n);
      if (i < 0 || i > static_cast<long>(g.n_r)) continue;
      const auto iu = static_cast<std::size_t>(i);
      TraceSample ts;
      ts.t = s.t;
      ts.r = g.radius(iu);
      ts.w = s.w[iu];
      ts.phi = s.phi[iu];
      ts.psi = s.psi[iu];
      const double nv = nonlinearity(ts.w, ts.r, prm);
      auto& smp = slot.trace.samples;
      if (smp.empty()) {
        ts.source = 0.0;
      } else {
        ts.source = smp.back().source + 0.5 * h * (slot.last_n + nv);
      }
      slot.last_n = nv;
      smp.push_back(ts);
    }

    for (auto& slot : regions_) {
      const long ln = static_cast<long>(n);
      if (ln < slot.n_lo || ln > slot.n_hi) continue;
      double a, b;
      if (!cross_section(slot.integral.region, s.t - traj_.initial.t, a, b)) continue;
      const std::size_t ia = lattice_steps(a, h), ib = lattice_steps(b, h);
      double acc = 0.0;
      for (std::size_t i = ia; i <= ib; ++i) acc += dis_[i];
      acc -= 0.5 * (dis_[ia] + dis_[ib]);
      acc *= h;
      const double tw = (ln == slot.n_lo || ln == slot.n_hi) ? 0.5 : 1.0;
      slot.integral.dissipation += tw * h * acc;
    }

    if (traj_.labels) {
      LabelSums& ls = *traj_.labels;
      const double tw = (n == 0 || last) ? 0.5 * h : h;
      const double qc = 4.0 * M_PI / (prm.p + 1.0);
      for (std::size_t i = 1; i < nn; ++i) {
        if (pot_[i] == 0.0) continue;
        const std::size_t kt = n + g.n_r - i;
        const std::size_t ks = n + i;
        const double r = g.radius(i);
        ls.q_plus_plus[kt] += tw * qc * pot_[i];
        ls.m[kt] += tw * dis_[i];
        ls.k[kt] += tw * source_magnitude(s.w[i], r, prm);
        ls.q_minus_minus[ks] += tw * qc * pot_[i];
      }
    }
  }

  void finish() {
    for (auto& slot : traces_) traj_.traces.push_back(std::move(slot.trace));
    for (auto& rs : radii_) traj_.radii.push_back(std::move(rs));
    for (auto& slot : regions_) traj_.regions.push_back(std::move(slot.integral));
  }

 private:
  Trajectory& traj_;
  const ProbeSet& probes_;
  std::vector<std::size_t> snap_steps_;
  std::vector<TraceSlot> traces_;
  std::vector<RadiusSeries> radii_;
  std::vector<RegionSlot> regions_;
  std::vector<double> pot_, dis_;
};

}  // namespace

std::size_t CharacteristicTrace::index_at(double t) const {
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (std::abs(samples[k].t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  }
  throw ProbeError("trace with label " + std::to_string(label) + " has no sample at t = " + std::to_string(t));
}

Polygon Polygon::rectangle(double r1, double r2, double t1, double t2) {
  return Polygon{{{r1, t1}, {r2, t1}, {r2, t2}, {r1, t2}}};
}

Polygon Polygon::triangle(double t0, double r0) { return Polygon{{{0.0, t0}, {r0, t0}, {0.0, t0 + r0}}}; }

Polygon Polygon::parallelogram(double t0, double s, double s_prime) {
  return Polygon{{{s - t0, t0}, {s_prime - t0, t0}, {s_prime - s, s}, {0.0, s}}};
}

Polygon Polygon::trapezoid(double t1, double t2, double s) {
  return Polygon{{{0.0, t1}, {s - t1, t1}, {s - t2, t2}, {0.0, t2}}};
}

void ProbeSet::add_region(const Polygon& region) {
  const auto& v = region.vertices;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto [r1, t1] = v[k];
    const auto [r2, t2] = v[(k + 1) % v.size()];
    const double dr = r2 - r1, dt = t2 - t1;
    if (dt == 0.0) {
      add_snapshot(t1);
    } else if (dr == 0.0) {
      if (r1 > 0.0) add_radius(r1);
    } else if (std::abs(dr - dt) <= 1e-12 * std::abs(dt)) {
      add_trace(TraceKind::outgoing, t1 - r1);
    } else if (std::abs(dr + dt) <= 1e-12 * std::abs(dt)) {
      add_trace(TraceKind::incoming, t1 + r1);
    }
  }
  regions.push_back(region);
}

void ProbeSet::merge(const ProbeSet& other) {
  snapshot_times.insert(snapshot_times.end(), other.snapshot_times.begin(), other.snapshot_times.end());
  if (other.snapshot_stride != 0) {
    snapshot_stride = snapshot_stride == 0 ? other.snapshot_stride : std::min(snapshot_stride, other.snapshot_stride);
  }
  traces.insert(traces.end(), other.traces.begin(), other.traces.end());
  radii.insert(radii.end(), other.radii.begin(), other.radii.end());
  regions.insert(regions.end(), other.regions.begin(), other.regions.end());
  label_sums = label_sums || other.label_sums;
}

std::size_t Trajectory::step_index(double t) const {
  const double rel = t - initial.t;
  if (rel < -1e-9 || rel > grid.t_end + 1e-9 || !grid.on_lattice(rel)) {
    throw ProbeError("time " + std::to_string(t) + " is not a lattice time of the run");
  }
  return lattice_steps(rel, grid.dr);
}

bool Trajectory::has_snapshot(double t) const {
  for (const auto& s : snapshots) {
    if (same(s.t, t, grid.dr)) return true;
  }
  return false;
}

const FieldState& Trajectory::snapshot_at(double t) const {
  for (const auto& s : snapshots) {
    if (same(s.t, t, grid.dr)) return s;
  }
  throw ProbeError("no snapshot recorded at t = " + std::to_string(t));
}

bool Trajectory::has_trace(TraceKind kind, double label) const {
  for (const auto& tr : traces) {
    if (tr.kind == kind && same(tr.label, label, grid.dr)) return true;
  }
  return false;
}

const CharacteristicTrace& Trajectory::trace(TraceKind kind, double label) const {
  for (const auto& tr : traces) {
    if (tr.kind == kind && same(tr.label, label, grid.dr)) return tr;
  }
  throw ProbeError(std::string("no ") + (kind == TraceKind::outgoing ? "outgoing" : "incoming") +
                   " trace registered with label " + std::to_string(label));
}

const RadiusSeries& Trajectory::radius(double R) const {
  for (const auto& rs : radii) {
    if (same(rs.R, R, grid.dr)) return rs;
  }
  throw ProbeError("no radius probe registered at R = " + std::to_string(R));
}

const RegionIntegral& Trajectory::region(const Polygon& p) const {
  for (const auto& reg : regions) {
    if (reg.region.vertices == p.vertices) return reg;
  }
  throw ProbeError("region was not registered before the run");
}

FieldState step(const FieldState& state, const GridSpec& grid, const ModelParams& params) {
  check_state(state, grid);
  FieldState out = state;
  Integrator integ(grid, params);
  integ.advance(out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out.w[i]) || std::abs(out.w[i]) > kOverflow) {
      throw DivergenceError(1, "non-finite value at r = " + std::to_string(grid.radius(i)));
    }
  }
  return out;
}

Trajectory run(const FieldState& initial, const GridSpec& grid, const ModelParams& params, const ProbeSet& probes) {
  if (!params.linear) validate(params);
  check_state(initial, grid);
  Trajectory traj;
  traj.grid = grid;
  traj.params = params;
  traj.initial = initial;
  traj.steps.reserve(grid.n_t + 1);
  Recorder rec(traj, probes);
  FieldState cur = initial;
  Integrator integ(grid, params);
  rec.record(0, cur);
  for (std::size_t n = 1; n <= grid.n_t; ++n) {
    integ.advance(cur);
    cur.t = initial.t + grid.time(n);
    rec.record(n, cur);
  }
  rec.finish();
  return traj;
}

TwoSidedRun run_two_sided(const FieldState& initial, const GridSpec& grid, const ModelParams& params,
                          const ProbeSet& probes, int threads) {
  TwoSidedRun out;
  const FieldState back = reverse_time(initial);
  parallel_for(2, threads, [&](std::size_t k) {
    if (k == 0) {
      out.forward = run(initial, grid, params, probes);
    } else {
      out.backward = run(back, grid, params, probes);
      out.backward.reversed = true;
    }
  });
  return out;
}

FieldState reverse_time(const FieldState& state) {
  FieldState out = state;
  out.t = 0.0 - state.t;
  out.phi.swap(out.psi);
  out.phi_avg.swap(out.psi_avg);
  return out;
}

LinearSample dalembert_linear(const RadialProfile& profile, double r, double t) {
  const ShapeSpec& u0 = profile.u0;
  const ShapeSpec& u1 = profile.u1;
  auto W0 = [&](double x) { return x * u0.value(std::abs(x)); };
  auto W0p = [&](double x) {
    const double a = std::abs(x);
    return u0.value(a) + a * u0.derivative(a);
  };
  auto W1 = [&](double x) { return x * u1.value(std::abs(x)); };
  LinearSample out;
  const double a = r - t, b = r + t;
  out.w = 0.5 * (W0(b) + W0(a));
  out.w_r = 0.5 * (W0p(b) + W0p(a));
  out.w_t = 0.5 * (W0p(b) - W0p(a));
  if (u1.kind != ProfileKind::zero) {
    auto G = [&](double x) {
      const double y = std::abs(x);
      if (y == 0.0) return 0.0;
      const double top = std::min(y, u1.support_radius() > 0.0 ? u1.support_radius() : y);
      return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double rho) { return rho * u1.value(rho); }, 0.0, top, 15, 1e-12);
    };
    out.w += 0.5 * (G(b) - G(a));
    out.w_r += 0.5 * (W1(b) - W1(a));
    out.w_t += 0.5 * (W1(b) + W1(a));
  }
  return out;
}

double ConvergenceReport::min_w_order() const {
  double m = std::numeric_limits<double>::infinity();
  for (double o : w_orders) m = std::min(m, o);
  return m;
}

double ConvergenceReport::min_drift_order() const {
  double m = std::numeric_limits<double>::infinity();
  for (double o : drift_orders) m = std::min(m, o);
  return m;
}

ConvergenceReport convergence_study(const ConvergenceSetup& setup) {
  if (setup.levels.size() < 3) throw DomainError("convergence study needs at least 3 refinement levels");
  for (std::size_t k = 1; k < setup.levels.size(); ++k) {
    if (std::abs(setup.levels[k] * 2.0 - setup.levels[k - 1]) > 1e-12 * setup.levels[k - 1]) {
      throw DomainError("refinement levels must halve dr at each step (non-nested sequence rejected)");
    }
  }
  ConvergenceReport rep;
  rep.levels = setup.levels;
  rep.reference_dr = setup.reference_dr > 0.0 ? setup.reference_dr : setup.levels.back() / 4.0;
  const double ratio = setup.levels.back() / rep.reference_dr;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0) {
    throw DomainError("reference dr must divide the finest level");
  }
  std::vector<double> checkpoints = setup.checkpoints;
  if (checkpoints.empty()) checkpoints = {setup.t_end / 2.0, setup.t_end};

  std::vector<double> all = setup.levels;
  all.push_back(rep.reference_dr);
  std::vector<Trajectory> runs(all.size());
  parallel_for(all.size(), setup.threads, [&](std::size_t k) {
    const GridSpec g = make_grid(all[k], setup.r_max, setup.t_end);
    ProbeSet probes;
    for (double c : checkpoints) probes.add_snapshot(c);
    runs[k] = run(init_state(setup.profile, g), g, setup.params, probes);
  });

  auto drift_of = [](const Trajectory& tr) {
    const double e0 = tr.steps.front().energy;
    if (e0 == 0.0) return 0.0;
    double m = 0.0;
    for (const auto& d : tr.steps) m = std::max(m, std::abs(d.energy - e0) / e0);
    return m;
  };
  const Trajectory& ref = runs.back();
  rep.reference_drift = drift_of(ref);
  for (std::size_t k = 0; k < setup.levels.size(); ++k) {
    const Trajectory& tr = runs[k];
    const auto stride = static_cast<std::size_t>(std::llround(setup.levels[k] / rep.reference_dr));
    double err = 0.0;
    for (double c : checkpoints) {
      const FieldState& a = tr.snapshot_at(c);
      const FieldState& b = ref.snapshot_at(c);
      for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a.w[i] - b.w[i * stride]));
    }
    rep.w_errors.push_back(err);
    rep.drifts.push_back(drift_of(tr));
  }
  for (std::size_t k = 1; k < rep.w_errors.size(); ++k) {
    rep.w_orders.push_back(std::log2(rep.w_errors[k - 1] / rep.w_errors[k]));
    rep.drift_orders.push_back(std::log2(rep.drifts[k - 1] / rep.drifts[k]));
  }
  rep.exact_transport = setup.params.linear;
  return rep;
}

}  // namespace radwave
