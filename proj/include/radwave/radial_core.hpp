#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace radwave {

namespace detail {
struct SampleSpline;
}

struct ModelParams {
  double p = 3.0;
  // Disables the source term; the evolution becomes the free 1D wave with w(0,t)=0.
  bool linear = false;
};

// Throws DomainError unless 3 <= p < 5.
void validate(const ModelParams& params);

struct CriticalExponents {
  double s_p = 0.0;
  double beta0 = 0.0;
  double kappa0 = 0.0;
};

CriticalExponents critical_exponents(const ModelParams& params);

// N(w,r) = |w|^{p-1} w / r^{p-1}, zero at the origin and in linear mode.
double nonlinearity(double w, double r, const ModelParams& params);
// |w|^{p+1} / r^{p-1}
double potential_density(double w, double r, const ModelParams& params);
// |w|^{p+1} / r^p
double dissipation_density(double w, double r, const ModelParams& params);
// |w|^p / r^{p-1}
double source_magnitude(double w, double r, const ModelParams& params);

struct GridSpec {
  double dr = 0.0;
  double lambda = 1.0;
  double r_max = 0.0;
  double t_end = 0.0;
  std::size_t n_r = 0;  // r_i = i*dr for i = 0..n_r
  std::size_t n_t = 0;  // number of steps to t_end

  double radius(std::size_t i) const { return static_cast<double>(i) * dr; }
  double time(std::size_t n) const { return static_cast<double>(n) * dr; }
  // Index of a lattice coordinate; ProbeError if x is not a multiple of dr.
  std::size_t index_of(double x, const std::string& what) const;
  bool on_lattice(double x) const;
};

GridSpec make_grid(double dr, double r_max, double t_end);

enum class ProfileKind { zero, gaussian_bump, polynomial_bump, power_tail, custom_samples };

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

// One radial shape. Parameters unused by a kind are ignored.
//   gaussian_bump    A exp(-(r-r_c)^2 / (2 sigma^2))
//   polynomial_bump  A (1 - ((r-r_c)/sigma)^2)^4 on |r-r_c| < sigma
//   power_tail       A (1 + (r/sigma)^2)^{-q/2} times a C2 cutoff on [r_trunc, r_trunc + 2 sigma]
//   custom_samples   cubic B-spline through samples at r = k*spacing, zero past the last sample
struct ShapeSpec {
  ProfileKind kind = ProfileKind::zero;
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;
  double tail_exponent = 0.0;
  double r_trunc = 0.0;
  std::vector<double> samples;
  double sample_spacing = 0.0;
  // Interpolant for custom_samples, built by custom() or prepare().
  std::shared_ptr<const detail::SampleSpline> spline;

  void prepare();

  double value(double r) const;
  double derivative(double r) const;
  bool has_closed_form_derivative() const { return kind != ProfileKind::custom_samples; }
  // Smallest R with value(r) negligible (gaussian: below 3e-18 relative) for r >= R.
  double support_radius() const;
  void check() const;

  static ShapeSpec zero() { return {}; }
  static ShapeSpec gaussian(double A, double r_c, double sigma);
  static ShapeSpec polynomial(double A, double r_c, double sigma);
  static ShapeSpec power_tail(double A, double sigma, double q, double r_trunc);
  static ShapeSpec custom(std::vector<double> samples, double spacing);
};

struct RadialProfile {
  ShapeSpec u0;
  ShapeSpec u1;

  double support_radius() const;
  bool is_zero() const { return u0.kind == ProfileKind::zero && u1.kind == ProfileKind::zero; }
};

// Tail exponent 2(p+4)/(p+1)^2 + eps of the slowly decaying data class.
double remark_tail_exponent(double p, double eps);

// Energy carried by the part of a power_tail shape removed by the cutoff:
// 2 pi int_{r_trunc}^inf r^2 (u0'^2 + 2/(p+1)|u0|^{p+1}) dr for the untruncated shape,
// evaluated by double-exponential quadrature. Infinite when the integral diverges.
double truncation_tail_energy(const ShapeSpec& shape, const ModelParams& params);

struct FieldState {
  double t = 0.0;
  double dr = 0.0;
  std::vector<double> w;
  std::vector<double> phi;  // w_r + w_t at nodes
  std::vector<double> psi;  // w_r - w_t at nodes
  // Cell means (1/dr) int_{r_i}^{r_{i+1}} of phi and psi; carried so that w is
  // rebuilt by exact cumulative sums (lattice-exact free transport).
  std::vector<double> phi_avg;
  std::vector<double> psi_avg;

  std::size_t size() const { return w.size(); }
  double radius(std::size_t i) const { return static_cast<double>(i) * dr; }
  double w_r(std::size_t i) const { return 0.5 * (phi[i] + psi[i]); }
  double w_t(std::size_t i) const { return 0.5 * (phi[i] - psi[i]); }
};

FieldState zero_state(const GridSpec& grid);

// Samples w = r u0, w_t = r u1 on the grid. Throws ConfigError when the data
// support exceeds r_max - t_end.
FieldState init_state(const RadialProfile& profile, const GridSpec& grid);

struct BoundReport {
  double energy_ratio_max = 0.0;   // max |w|/sqrt(E r)
  double lemma_ratio_max = 0.0;    // max |w|/(C_p E^{2/(p+3)} r^{(p-1)/(p+3)})
  double lemma_constant = 0.0;     // C_p = 2^{2p/(p+3)}
  double tolerance = 0.0;
  double argmax_energy_ratio = 0.0;
  bool violation = false;
};

double pointwise_lemma_constant(double p);

BoundReport pointwise_bound_report(const FieldState& state, double E, const ModelParams& params,
                                   double tolerance = 1e-6);

}  // namespace radwave
