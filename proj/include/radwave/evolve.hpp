#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "radwave/radial_core.hpp"

namespace radwave {

enum class TraceKind { outgoing, incoming };

struct TraceSample {
  double t = 0.0;
  double r = 0.0;
  double w = 0.0;
  double phi = 0.0;
  double psi = 0.0;
  double source = 0.0;  // trapezoid int N dt along the line from the first sample
};

// Outgoing: t - r = label, invariant psi = w_r - w_t.
// Incoming: t + r = label, invariant phi = w_r + w_t.
struct CharacteristicTrace {
  TraceKind kind = TraceKind::outgoing;
  double label = 0.0;
  std::vector<TraceSample> samples;

  double invariant(std::size_t k) const {
    return kind == TraceKind::outgoing ? samples[k].psi : samples[k].phi;
  }
  // Index of the sample at time t; ProbeError if absent.
  std::size_t index_at(double t) const;
};

// Polygon in the (r, t) plane, vertices counterclockwise.
struct Polygon {
  std::vector<std::pair<double, double>> vertices;  // (r, t)

  static Polygon rectangle(double r1, double r2, double t1, double t2);
  // {t > t0, r > 0, r + t < s0} with s0 = t0 + r0
  static Polygon triangle(double t0, double r0);
  // {t0 < t < s, s < r + t < s_prime}
  static Polygon parallelogram(double t0, double s, double s_prime);
  // {r > 0, t1 < t < t2, r + t < s}
  static Polygon trapezoid(double t1, double t2, double s);
};

// Values at a fixed radius R and integrals over [0, R] recorded every step.
struct RadiusSeries {
  double R = 0.0;
  std::size_t index = 0;
  std::vector<double> t, w, phi, psi;
  std::vector<double> inner_kinetic;     // int_0^R (w_r^2 + w_t^2) dr
  std::vector<double> inner_potential;   // int_0^R |w|^{p+1}/r^{p-1} dr
  std::vector<double> inner_dissipation; // int_0^R |w|^{p+1}/r^p dr
  std::vector<double> inner_e3;          // int_0^R e3 dr
  std::vector<double> inner_wtwr_weighted;  // int_0^R (r/R) w_t w_r dr
  std::vector<double> inner_wtwr;        // int_0^R w_t w_r dr
};

// Double integral of |w|^{p+1}/r^p over a lattice polygon, trapezoid in r then t.
struct RegionIntegral {
  Polygon region;
  double dissipation = 0.0;
};

// Sums over every outgoing label tau = t_n - r_i (index k: tau = (k - n_r) dr)
// and incoming label s = t_n + r_i (index k: s = k dr), trapezoid in t.
struct LabelSums {
  std::ptrdiff_t tau_offset = 0;  // tau index k maps to tau = (k - tau_offset) dr
  std::vector<double> q_plus_plus;    // 4pi/(p+1) int |w|^{p+1}/r^{p-1} dt along t - r = tau
  std::vector<double> m;              // int |w|^{p+1}/r^p dt along t - r = tau
  std::vector<double> k;              // int |w|^p/r^{p-1} dt along t - r = tau
  std::vector<double> q_minus_minus;  // 4pi/(p+1) int |w|^{p+1}/r^{p-1} dt along t + r = s
  double dr = 0.0;

  double tau(std::size_t idx) const { return (static_cast<double>(idx) - static_cast<double>(tau_offset)) * dr; }
  double s(std::size_t idx) const { return static_cast<double>(idx) * dr; }
};

struct StepDiagnostics {
  double t = 0.0;
  double energy = 0.0;
  double e_minus = 0.0;
  double e_plus = 0.0;
  double potential = 0.0;     // int |w|^{p+1}/r^{p-1} dr
  double dissipation = 0.0;   // int |w|^{p+1}/r^p dr
  double e3_total = 0.0;      // int e3 dr
  double wtwr_total = 0.0;    // int w_t w_r dr
  double u0_est = 0.0;        // w(dr)/dr
  double u0_richardson = 0.0; // 2 w(dr)/dr - w(2dr)/(2dr)
  double phi0 = 0.0;
  double origin_gap = 0.0;    // |phi(dr) - psi(dr)|
};

struct TraceRequest {
  TraceKind kind = TraceKind::outgoing;
  double label = 0.0;
};

struct ProbeSet {
  std::vector<double> snapshot_times;
  std::size_t snapshot_stride = 0;  // 0: only registered times and the final state
  std::vector<TraceRequest> traces;
  std::vector<double> radii;
  std::vector<Polygon> regions;
  bool label_sums = false;

  void add_snapshot(double t) { snapshot_times.push_back(t); }
  void add_trace(TraceKind kind, double label) { traces.push_back({kind, label}); }
  void add_radius(double R) { radii.push_back(R); }
  // Registers the region plus every snapshot, radius and trace its boundary needs.
  void add_region(const Polygon& region);
  void merge(const ProbeSet& other);
};

struct Trajectory {
  GridSpec grid;
  ModelParams params;
  // True when the run started from reverse_time of the physical data, so that
  // run time t corresponds to physical time -t.
  bool reversed = false;
  FieldState initial;
  FieldState final_state;
  std::vector<StepDiagnostics> steps;  // index n <-> t = n dr
  std::vector<FieldState> snapshots;
  std::vector<CharacteristicTrace> traces;
  std::vector<RadiusSeries> radii;
  std::vector<RegionIntegral> regions;
  std::optional<LabelSums> labels;

  std::size_t step_index(double t) const;
  const FieldState& snapshot_at(double t) const;
  bool has_snapshot(double t) const;
  const CharacteristicTrace& trace(TraceKind kind, double label) const;
  bool has_trace(TraceKind kind, double label) const;
  const RadiusSeries& radius(double R) const;
  const RegionIntegral& region(const Polygon& p) const;
};

// Forward run from the data plus a run from reverse_time of the data.
struct TwoSidedRun {
  Trajectory forward;
  Trajectory backward;
};

FieldState step(const FieldState& state, const GridSpec& grid, const ModelParams& params);

Trajectory run(const FieldState& initial, const GridSpec& grid, const ModelParams& params,
               const ProbeSet& probes = {});

// Runs both time directions; threads > 1 runs them concurrently.
TwoSidedRun run_two_sided(const FieldState& initial, const GridSpec& grid, const ModelParams& params,
                          const ProbeSet& probes = {}, int threads = 1);

FieldState reverse_time(const FieldState& state);

struct LinearSample {
  double w = 0.0;
  double w_r = 0.0;
  double w_t = 0.0;
};

// Free 1D wave with w(0,t) = 0 via odd extension of r u0, r u1.
LinearSample dalembert_linear(const RadialProfile& profile, double r, double t);

struct ConvergenceSetup {
  RadialProfile profile;
  ModelParams params;
  double r_max = 0.0;
  double t_end = 0.0;
  std::vector<double> levels;       // halving sequence of dr
  double reference_dr = 0.0;        // 0: finest / 4
  std::vector<double> checkpoints;  // times; empty: {t_end / 2, t_end}
  int threads = 1;
};

struct ConvergenceReport {
  std::vector<double> levels;
  double reference_dr = 0.0;
  std::vector<double> w_errors;     // max over common nodes and checkpoints vs reference
  std::vector<double> drifts;       // max_t |E(t) - E(0)| / E(0)
  std::vector<double> w_orders;     // log2 ratios of consecutive errors
  std::vector<double> drift_orders;
  double reference_drift = 0.0;
  bool exact_transport = false;
  double min_w_order() const;
  double min_drift_order() const;
};

ConvergenceReport convergence_study(const ConvergenceSetup& setup);

}  // namespace radwave
