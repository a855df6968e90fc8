#include "radwave/radial_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "radwave/errors.hpp"

namespace radwave {

namespace {

bool is_cubic(const ModelParams& params) { return params.p == 3.0; }

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smoothstep_prime(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

Spline make_spline(const std::vector<double>& samples, double h) {
  return Spline(samples.data(), samples.size(), 0.0, h, 0.0, 0.0);
}

}  // namespace

namespace detail {
struct SampleSpline {
  Spline interp;
};
}  // namespace detail

void ShapeSpec::prepare() {
  check();
  if (kind == ProfileKind::custom_samples) {
    spline = std::make_shared<const detail::SampleSpline>(detail::SampleSpline{make_spline(samples, sample_spacing)});
  } else {
    spline.reset();
  }
}

void validate(const ModelParams& params) {
  if (!(params.p >= 3.0 && params.p < 5.0)) {
    throw DomainError("exponent p = " + std::to_string(params.p) + " outside the valid interval [3, 5)");
  }
}

CriticalExponents critical_exponents(const ModelParams& params) {
  validate(params);
  const double p = params.p;
  CriticalExponents c;
  c.s_p = 1.5 - 2.0 / (p - 1.0);
  c.beta0 = 2.0 * (p - 2.0) / (p + 1.0);
  c.kappa0 = 1.0 - c.beta0;
  return c;
}

double nonlinearity(double w, double r, const ModelParams& params) {
  if (params.linear || r <= 0.0 || w == 0.0) return 0.0;
  if (is_cubic(params)) return w * w * w / (r * r);
  return w * std::pow(std::abs(w) / r, params.p - 1.0);
}

double potential_density(double w, double r, const ModelParams& params) {
  if (params.linear || r <= 0.0 || w == 0.0) return 0.0;
  if (is_cubic(params)) {
    const double q = w * w / r;
    return q * q;
  }
  return w * w * std::pow(std::abs(w) / r, params.p - 1.0);
}

double dissipation_density(double w, double r, const ModelParams& params) {
  if (r <= 0.0) return 0.0;
  return potential_density(w, r, params) / r;
}

double source_magnitude(double w, double r, const ModelParams& params) {
  return std::abs(nonlinearity(w, r, params));
}

bool GridSpec::on_lattice(double x) const {
  const double k = x / dr;
  return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k));
}

std::size_t GridSpec::index_of(double x, const std::string& what) const {
  if (x < -1e-12 || !on_lattice(x)) {
    throw ProbeError(what + " = " + std::to_string(x) + " is not a lattice point of spacing " +
                     std::to_string(dr));
  }
  return static_cast<std::size_t>(std::llround(x / dr));
}

GridSpec make_grid(double dr, double r_max, double t_end) {
  if (!(dr > 0.0) || !std::isfinite(dr)) throw ConfigError("grid.dr must be positive");
  if (!(r_max > 0.0)) throw ConfigError("grid.r_max must be positive");
  if (!(t_end >= 0.0)) throw ConfigError("grid.t_end must be nonnegative");
  GridSpec g;
  g.dr = dr;
  g.r_max = r_max;
  g.t_end = t_end;
  if (!g.on_lattice(r_max)) throw ConfigError("grid.r_max is not a multiple of grid.dr");
  if (!g.on_lattice(t_end)) throw ConfigError("grid.t_end is not a multiple of grid.dr");
  g.n_r = static_cast<std::size_t>(std::llround(r_max / dr));
  g.n_t = static_cast<std::size_t>(std::llround(t_end / dr));
  if (g.n_r < 4) throw ConfigError("grid needs at least 4 cells");
  return g;
}

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::zero: return "zero";
    case ProfileKind::gaussian_bump: return "gaussian_bump";
    case ProfileKind::polynomial_bump: return "polynomial_bump";
    case ProfileKind::power_tail: return "power_tail";
    case ProfileKind::custom_samples: return "custom_samples";
  }
  return "zero";
}

ProfileKind profile_kind_from_string(const std::string& name) {
  for (auto k : {ProfileKind::zero, ProfileKind::gaussian_bump, ProfileKind::polynomial_bump,
                 ProfileKind::power_tail, ProfileKind::custom_samples}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown profile kind '" + name + "'");
}

ShapeSpec ShapeSpec::gaussian(double A, double r_c, double sigma) {
  ShapeSpec s;
  s.kind = ProfileKind::gaussian_bump;
  s.amplitude = A;
  s.center = r_c;
  s.width = sigma;
  s.check();
  return s;
}

ShapeSpec ShapeSpec::polynomial(double A, double r_c, double sigma) {
  ShapeSpec s;
  s.kind = ProfileKind::polynomial_bump;
  s.amplitude = A;
  s.center = r_c;
  s.width = sigma;
  s.check();
  return s;
}

ShapeSpec ShapeSpec::power_tail(double A, double sigma, double q, double r_trunc) {
  ShapeSpec s;
  s.kind = ProfileKind::power_tail;
  s.amplitude = A;
  s.width = sigma;
  s.tail_exponent = q;
  s.r_trunc = r_trunc;
  s.check();
  return s;
}

ShapeSpec ShapeSpec::custom(std::vector<double> samples, double spacing) {
  ShapeSpec s;
  s.kind = ProfileKind::custom_samples;
  s.samples = std::move(samples);
  s.sample_spacing = spacing;
  s.prepare();
  return s;
}

void ShapeSpec::check() const {
  switch (kind) {
    case ProfileKind::zero: return;
    case ProfileKind::gaussian_bump:
    case ProfileKind::polynomial_bump:
      if (!(width > 0.0)) throw ConfigError("profile width must be positive");
      if (center < 0.0) throw ConfigError("profile center must be nonnegative");
      return;
    case ProfileKind::power_tail:
      if (!(width > 0.0)) throw ConfigError("profile width must be positive");
      if (!(tail_exponent > 0.0)) throw ConfigError("power_tail exponent must be positive");
      if (!(r_trunc > 0.0)) throw ConfigError("power_tail truncation radius must be positive");
      return;
    case ProfileKind::custom_samples:
      if (samples.size() < 5) throw ConfigError("custom_samples needs at least 5 samples");
      if (!(sample_spacing > 0.0)) throw ConfigError("custom_samples spacing must be positive");
      for (double v : samples) {
        if (!std::isfinite(v)) throw ConfigError("custom_samples contains a non-finite value");
      }
      return;
  }
}

double ShapeSpec::value(double r) const {
  switch (kind) {
    case ProfileKind::zero: return 0.0;
    case ProfileKind::gaussian_bump: {
      const double x = (r - center) / width;
      return amplitude * std::exp(-0.5 * x * x);
    }
    case ProfileKind::polynomial_bump: {
      const double x = (r - center) / width;
      if (std::abs(x) >= 1.0) return 0.0;
      const double b = 1.0 - x * x;
      return amplitude * b * b * b * b;
    }
    case ProfileKind::power_tail: {
      const double x = r / width;
      const double chi = 1.0 - smoothstep((r - r_trunc) / (2.0 * width));
      if (chi == 0.0) return 0.0;
      return amplitude * std::pow(1.0 + x * x, -0.5 * tail_exponent) * chi;
    }
    case ProfileKind::custom_samples: {
      const double last = sample_spacing * static_cast<double>(samples.size() - 1);
      if (r > last) return 0.0;
      if (!spline) return make_spline(samples, sample_spacing)(std::abs(r));
      return spline->interp(std::abs(r));
    }
  }
  return 0.0;
}

double ShapeSpec::derivative(double r) const {
  switch (kind) {
    case ProfileKind::zero: return 0.0;
    case ProfileKind::gaussian_bump: {
      const double x = (r - center) / width;
      return -amplitude * x / width * std::exp(-0.5 * x * x);
    }
    case ProfileKind::polynomial_bump: {
      const double x = (r - center) / width;
      if (std::abs(x) >= 1.0) return 0.0;
      const double b = 1.0 - x * x;
      return -8.0 * amplitude * x / width * b * b * b;
    }
    case ProfileKind::power_tail: {
      const double x = r / width;
      const double s = (r - r_trunc) / (2.0 * width);
      const double chi = 1.0 - smoothstep(s);
      const double dchi = -smoothstep_prime(s) / (2.0 * width);
      const double f = amplitude * std::pow(1.0 + x * x, -0.5 * tail_exponent);
      const double df = -amplitude * tail_exponent * r / (width * width) *
                        std::pow(1.0 + x * x, -0.5 * tail_exponent - 1.0);
      return df * chi + f * dchi;
    }
    case ProfileKind::custom_samples: {
      const double last = sample_spacing * static_cast<double>(samples.size() - 1);
      if (r > last) return 0.0;
      if (!spline) return make_spline(samples, sample_spacing).prime(r);
      return spline->interp.prime(r);
    }
  }
  return 0.0;
}

double ShapeSpec::support_radius() const {
  switch (kind) {
    case ProfileKind::zero: return 0.0;
    case ProfileKind::gaussian_bump: return center + 9.0 * width;
    case ProfileKind::polynomial_bump: return center + width;
    case ProfileKind::power_tail: return r_trunc + 2.0 * width;
    case ProfileKind::custom_samples: {
      std::size_t k = samples.size();
      while (k > 0 && samples[k - 1] == 0.0) --k;
      if (k == 0) return 0.0;
      return sample_spacing * static_cast<double>(std::min(k, samples.size() - 1));
    }
  }
  return 0.0;
}

double RadialProfile::support_radius() const { return std::max(u0.support_radius(), u1.support_radius()); }

double remark_tail_exponent(double p, double eps) { return 2.0 * (p + 4.0) / ((p + 1.0) * (p + 1.0)) + eps; }

double truncation_tail_energy(const ShapeSpec& shape, const ModelParams& params) {
  if (shape.kind != ProfileKind::power_tail) return 0.0;
  const double A = shape.amplitude;
  const double s = shape.width;
  const double q = shape.tail_exponent;
  const double p = params.p;
  auto f = [&](double r) { return A * std::pow(1.0 + (r / s) * (r / s), -0.5 * q); };
  auto df = [&](double r) { return -A * q * r / (s * s) * std::pow(1.0 + (r / s) * (r / s), -0.5 * q - 1.0); };
  // r^2 f'^2 ~ r^{-2q} and r^2 |f|^{p+1} ~ r^{2-q(p+1)}; both must be integrable.
  const bool pot = !params.linear;
  if (2.0 * q <= 1.0 || (pot && q * (p + 1.0) - 2.0 <= 1.0)) return std::numeric_limits<double>::infinity();
  auto integrand = [&](double r) {
    const double g = df(r);
    double v = r * r * g * g;
    if (pot) v += 2.0 / (p + 1.0) * r * r * std::pow(std::abs(f(r)), p + 1.0);
    return v;
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double I = integrator.integrate([&](double x) { return integrand(shape.r_trunc + x); });
  return 2.0 * M_PI * I;
}

FieldState zero_state(const GridSpec& grid) {
  FieldState s;
  s.t = 0.0;
  s.dr = grid.dr;
  const std::size_t n = grid.n_r + 1;
  s.w.assign(n, 0.0);
  s.phi.assign(n, 0.0);
  s.psi.assign(n, 0.0);
  s.phi_avg.assign(grid.n_r, 0.0);
  s.psi_avg.assign(grid.n_r, 0.0);
  return s;
}

FieldState init_state(const RadialProfile& profile, const GridSpec& grid) {
  profile.u0.check();
  profile.u1.check();
  const double support = profile.support_radius();
  if (support > grid.r_max - grid.t_end + 1e-12) {
    throw ConfigError("profile support radius " + std::to_string(support) + " exceeds r_max - t_end = " +
                      std::to_string(grid.r_max - grid.t_end) + "; outer boundary would reflect");
  }
  FieldState s = zero_state(grid);
  const std::size_t n = grid.n_r + 1;
  const double h = grid.dr;
  for (std::size_t i = 0; i < n; ++i) s.w[i] = grid.radius(i) * profile.u0.value(grid.radius(i));
  s.w[0] = 0.0;

  std::vector<double> wr(n), wt(n);
  if (profile.u0.has_closed_form_derivative()) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = grid.radius(i);
      wr[i] = profile.u0.value(r) + r * profile.u0.derivative(r);
    }
  } else {
    auto wat = [&](long k) -> double {
      if (k < 0) return -s.w[static_cast<std::size_t>(-k)];
      if (k >= static_cast<long>(n)) return 0.0;
      return s.w[static_cast<std::size_t>(k)];
    };
    for (std::size_t i = 0; i < n; ++i) {
      const long k = static_cast<long>(i);
      wr[i] = (-wat(k + 2) + 8.0 * wat(k + 1) - 8.0 * wat(k - 1) + wat(k - 2)) / (12.0 * h);
    }
  }
  for (std::size_t i = 0; i < n; ++i) wt[i] = grid.radius(i) * profile.u1.value(grid.radius(i));
  wt[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.phi[i] = wr[i] + wt[i];
    s.psi[i] = wr[i] - wt[i];
  }

  const bool has_velocity = profile.u1.kind != ProfileKind::zero;
  for (std::size_t i = 0; i < grid.n_r; ++i) {
    const double slope = (s.w[i + 1] - s.w[i]) / h;
    double vel = 0.0;
    if (has_velocity) {
      const double a = grid.radius(i);
      vel = boost::math::quadrature::gauss<double, 10>::integrate(
                [&](double r) { return r * profile.u1.value(r); }, a, a + h) /
            h;
    }
    s.phi_avg[i] = slope + vel;
    s.psi_avg[i] = slope - vel;
  }
  return s;
}

double pointwise_lemma_constant(double p) { return std::pow(2.0, 2.0 * p / (p + 3.0)); }

BoundReport pointwise_bound_report(const FieldState& state, double E, const ModelParams& params,
                                   double tolerance) {
  BoundReport rep;
  rep.tolerance = tolerance;
  rep.lemma_constant = pointwise_lemma_constant(params.p);
  const bool nonzero = std::any_of(state.w.begin(), state.w.end(), [](double v) { return v != 0.0; });
  if (!nonzero) return rep;
  if (!(E > 0.0)) throw InconsistencyError("nonpositive energy supplied for a nonzero state");
  const double p = params.p;
  const double scale = rep.lemma_constant * std::pow(E, 2.0 / (p + 3.0));
  const double expo = (p - 1.0) / (p + 3.0);
  for (std::size_t i = 1; i < state.size(); ++i) {
    const double r = state.radius(i);
    const double a = std::abs(state.w[i]);
    const double r1 = a / std::sqrt(E * r);
    const double r2 = a / (scale * std::pow(r, expo));
    if (r1 > rep.energy_ratio_max) {
      rep.energy_ratio_max = r1;
      rep.argmax_energy_ratio = r;
    }
    rep.lemma_ratio_max = std::max(rep.lemma_ratio_max, r2);
  }
  rep.violation = rep.energy_ratio_max > 1.0 + tolerance || rep.lemma_ratio_max > 1.0 + tolerance;
  return rep;
}

}  // namespace radwave
