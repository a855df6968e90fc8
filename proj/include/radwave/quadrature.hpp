#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace radwave {

// Trapezoid sum of f over nodes [i0, i1] with spacing h.
inline double trapezoid(const std::vector<double>& f, double h, std::size_t i0, std::size_t i1) {
  if (i1 <= i0) return 0.0;
  double s = 0.5 * (f[i0] + f[i1]);
  for (std::size_t i = i0 + 1; i < i1; ++i) s += f[i];
  return h * s;
}

// Integral over [a, b] of the piecewise-linear interpolant of nodal samples
// f_i at x_i = x0 + i h. Interval-additive; [a, b] is clipped to the node range.
inline double clipped_trapezoid(const std::vector<double>& f, double h, double a, double b, double x0 = 0.0) {
  if (f.size() < 2) return 0.0;
  const double lo_x = x0, hi_x = x0 + h * static_cast<double>(f.size() - 1);
  a = std::max(a, lo_x);
  b = std::min(b, hi_x);
  if (!(b > a)) return 0.0;
  auto value = [&](double x) {
    const double u = (x - x0) / h;
    auto k = static_cast<std::size_t>(std::floor(u));
    if (k >= f.size() - 1) k = f.size() - 2;
    const double th = u - static_cast<double>(k);
    return f[k] * (1.0 - th) + f[k + 1] * th;
  };
  const double ua = (a - x0) / h, ub = (b - x0) / h;
  auto ka = static_cast<std::size_t>(std::ceil(ua - 1e-12));
  auto kb = static_cast<std::size_t>(std::floor(ub + 1e-12));
  ka = std::min(ka, f.size() - 1);
  kb = std::min(kb, f.size() - 1);
  const double xa = x0 + h * static_cast<double>(ka);
  const double xb = x0 + h * static_cast<double>(kb);
  if (ka > kb) return 0.5 * (value(a) + value(b)) * (b - a);
  double s = 0.0;
  if (xa > a) s += 0.5 * (value(a) + f[ka]) * (xa - a);
  s += trapezoid(f, h, ka, kb);
  if (b > xb) s += 0.5 * (f[kb] + value(b)) * (b - xb);
  return s;
}

}  // namespace radwave
