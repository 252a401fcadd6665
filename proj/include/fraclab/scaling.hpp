#pragma once

// Power-law fits of neighborhood volumes: |A_r| ~ prefactor * r^(d - s).

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "fraclab/distance_field.hpp"
#include "fraclab/error.hpp"

namespace fraclab {

struct ScalingFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  std::pair<double, double> r_range{0.0, 0.0};
  double residual = 0.0;  // RMS of the log-log fit
  double slope = 0.0;     // raw log-log slope
};

/// n geometrically spaced points from lo to hi inclusive.
inline std::vector<double> geometric_points(double lo, double hi, int n) {
  require(lo > 0.0 && hi > lo && n >= 2, "geometric range needs 0 < lo < hi and n >= 2");
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return r;
}

/// Least-squares line through (log x, log y). Returns slope in `slope` and
/// `exponent`; the caller reinterprets the exponent.
inline ScalingFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "log-log fit needs matching samples, at least two");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  bool varies = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail(ErrorKind::DegenerateFit, "log-log fit needs positive samples");
    if (y[i] != y[0]) varies = true;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  if (!varies) fail(ErrorKind::DegenerateFit, "all sampled values are equal");
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) fail(ErrorKind::DegenerateFit, "abscissae do not vary");
  ScalingFit f;
  f.slope = (n * sxy - sx * sy) / den;
  const double icpt = (sy - f.slope * sx) / n;
  f.prefactor = std::exp(icpt);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::log(y[i]) - (icpt + f.slope * std::log(x[i]));
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  f.exponent = f.slope;
  f.r_range = {x.front(), x.back()};
  return f;
}

/// Log-log slope of the neighborhood volume |A_r| over geometric radii.
template <int Dim>
ScalingFit volume_scaling(const DistanceField<Dim>& df, double r_min, double r_max, int n_points) {
  const VolumeProfile prof(df);
  const auto r = geometric_points(r_min, r_max, n_points);
  std::vector<double> v;
  v.reserve(r.size());
  for (double x : r) v.push_back(prof.volume(x));
  return loglog_fit(r, v);
}

/// Minkowski dimension d - slope of log|A_r| against log r.
///
/// Requires 4h <= r_min < r_max <= diam/4, where diam is the grid diagonal.
template <int Dim>
ScalingFit minkowski_dimension(const DistanceField<Dim>& df, double r_min, double r_max, int n_points) {
  const double h = df.grid.h;
  require(r_min >= 4.0 * h * (1.0 - 1e-12), "r_min must be at least 4h");
  require(r_max > r_min, "r_max must exceed r_min");
  require(r_max <= df.grid.diameter() / 4.0, "r_max must not exceed diam/4");
  require(n_points >= 4, "at least four radii are needed");
  auto fit = volume_scaling(df, r_min, r_max, n_points);
  fit.exponent = Dim - fit.slope;
  return fit;
}

}  // namespace fraclab
