#pragma once

#include <string>
#include <utility>
#include <vector>

#include "radwave/evolve.hpp"
#include "radwave/radial_core.hpp"

namespace radwave {

// 2 pi int (w_r^2 + w_t^2 + 2/(p+1)|w|^{p+1}/r^{p-1}) dr, nodal trapezoid.
double energy_of_state(const FieldState& state, const ModelParams& params);

// Nodal 3D energy density 2 pi [(w_r - w/r)^2 + w_t^2 + 2/(p+1)|w|^{p+1}/r^{p-1}],
// i.e. 4 pi r^2 times the energy density of u.
std::vector<double> energy_density_3d(const FieldState& state, const ModelParams& params);

struct EnergyPartition {
  double t = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double E_total = 0.0;   // energy of the whole state
  double E_minus = 0.0;   // pi int_{r1}^{r2} (phi^2 + 2/(p+1) pot)
  double E_plus = 0.0;    // pi int_{r1}^{r2} (psi^2 + 2/(p+1) pot)
  double potential_part = 0.0;  // pi int_{r1}^{r2} 2/(p+1) pot, shared by both halves
};

// r2 beyond the grid is clipped to r_max.
EnergyPartition partition_energies(const FieldState& state, double r1, double r2, const ModelParams& params);

enum class FluxKind { Q_minus_minus, Q_plus_minus, Q_minus_plus, Q_plus_plus };
std::string to_string(FluxKind kind);

struct FluxSegment {
  FluxKind kind = FluxKind::Q_minus_minus;
  double label = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double value = 0.0;
};

// Incoming traces carry Q_minus_minus and Q_plus_minus, outgoing ones Q_minus_plus and Q_plus_plus.
FluxSegment flux_segment(const CharacteristicTrace& trace, double t1, double t2, FluxKind kind,
                         const ModelParams& params);

struct MuAccumulator {
  std::vector<double> t;
  std::vector<double> density;  // |u(0,t)|^2 from the Richardson origin estimate
  std::vector<double> P;        // running trapezoid integral from the first sample
};

MuAccumulator mu_series(const Trajectory& trajectory);
double mu_accumulate(const Trajectory& trajectory, double t1, double t2);

enum class FluxFamily { inward, outward };
std::string to_string(FluxFamily family);

struct EdgeTerm {
  std::string kind;  // horizontal, vertical, axis, incoming, outgoing
  std::pair<double, double> from;
  std::pair<double, double> to;
  double value = 0.0;
};

struct FluxResidual {
  FluxFamily family = FluxFamily::inward;
  std::vector<EdgeTerm> edges;
  double line_sum = 0.0;
  double double_integral = 0.0;  // int int |w|^{p+1}/r^p over the region
  double area_term = 0.0;        // -+ 2 pi (p-1)/(p+1) times the double integral
  double residual = 0.0;         // |line_sum - area_term|
  double scale = 0.0;            // sum of |terms|
};

// Validates a lattice polygon: vertices on the lattice, sides horizontal,
// vertical or characteristic, counterclockwise. Throws ProbeError otherwise.
void validate_region(const Polygon& region, const GridSpec& grid);

FluxResidual flux_identity_residual(const Trajectory& trajectory, const Polygon& region, FluxFamily family,
                                    const ModelParams& params);

struct TriangleLawReport {
  double t0 = 0.0;
  double r0 = 0.0;
  double e_minus = 0.0;        // E_-(t0; 0, r0)
  double mu_term = 0.0;        // pi int_{t0}^{t0+r0} dmu
  double q_minus_minus = 0.0;  // Q_-^-(t0+r0; t0, t0+r0)
  double double_term = 0.0;    // 2 pi (p-1)/(p+1) int int over the triangle
  double residual = 0.0;
};

ProbeSet triangle_law_probes(double t0, double r0);
TriangleLawReport triangle_law_report(const Trajectory& trajectory, double t0, double r0, const ModelParams& params);

struct EnergyIdentityReport {
  double T = 0.0;
  double energy = 0.0;
  double mu_term = 0.0;        // pi int_{-T}^{T} dmu
  double double_term = 0.0;    // 2 pi (p-1)/(p+1) int_{-T}^{T} int |w|^{p+1}/r^p
  double residual = 0.0;       // |mu_term + double_term - energy|
  double tail_estimate = 0.0;  // E_-(T) + E_+(-T)
  bool horizon_sufficient = false;  // tail_estimate <= 1e-2 E
};

EnergyIdentityReport energy_identity_check(const TwoSidedRun& run, double T, const ModelParams& params);

struct MorawetzReport {
  double R = 0.0;
  double T = 0.0;
  double energy = 0.0;
  double terms[4] = {0, 0, 0, 0};  // ball energy, sphere trace, ball potential correction, exterior dissipation
  double sum = 0.0;
  double defect = 0.0;              // energy - sum
  double boundary_past = 0.0;       // B(-T)
  double boundary_future = 0.0;     // B(T)
  double boundary_difference = 0.0; // B(-T) - B(T), equal to sum for exact solutions
  double identity_residual = 0.0;   // |sum - boundary_difference|
  double corollary[4] = {0, 0, 0, 0};        // ball kinetic, ball potential, total dissipation, sphere u^2
  double corollary_bounds[4] = {0, 0, 0, 0};
  double prop_lhs = 0.0;  // int_{R<|t|<=T} int_{|x|<R} e
  double prop_rhs = 0.0;  // int_{-R}^{R} int_{|x|>R} e
  bool horizon_truncated = false;  // T < 2R
};

// Needs a radius probe at R in both runs.
MorawetzReport morawetz_report(const TwoSidedRun& run, double R, double T, const ModelParams& params);

// Integral over [0, t] of a per-step series sampled at t_n = n dr (linear interpolation at t).
double time_integral(const std::vector<double>& series, double dr, double t1, double t2);

}  // namespace radwave
