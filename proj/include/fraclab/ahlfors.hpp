#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "fraclab/error.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/scaling.hpp"

namespace fraclab {

struct AhlforsBounds {
  double c_lo = 0.0;
  double c_hi = 0.0;
  double ratio() const { return c_hi / c_lo; }
};

namespace detail {

template <int Dim>
struct MassPoint {
  Vec<Dim> p;
  double mass;
};

/// Empirical self-similar measure: every primitive carries (size/unit)^s,
/// spread evenly over sub-pieces no larger than `spacing`.
template <int Dim>
std::vector<MassPoint<Dim>> measure_samples(const BoundaryGeometry<Dim>& g, double s, double spacing) {
  std::vector<MassPoint<Dim>> pts;
  for (const auto& seg : g.segments) {
    const double len = seg.length();
    const double mass = std::pow(len / g.unit, s);
    const int k = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int i = 0; i < k; ++i) {
      const double t = (i + 0.5) / k;
      Vec<Dim> p{};
      for (int a = 0; a < Dim; ++a) p[a] = seg.a[a] + t * (seg.b[a] - seg.a[a]);
      pts.push_back({p, mass / k});
    }
  }
  for (const auto& box : g.boxes) {
    const double side = box.side();
    const double mass = std::pow(side / g.unit, s);
    const int k = std::max(1, static_cast<int>(std::ceil(side / spacing)));
    const double per = mass / std::pow(double(k), Dim);
    std::array<int, Dim> c{};
    while (true) {
      Vec<Dim> p{};
      for (int a = 0; a < Dim; ++a) p[a] = box.lo[a] + (c[a] + 0.5) / k * (box.hi[a] - box.lo[a]);
      pts.push_back({p, per});
      int a = Dim - 1;
      while (a >= 0 && ++c[a] == k) c[a--] = 0;
      if (a < 0) break;
    }
  }
  return pts;
}

}  // namespace detail

/// Empirical Ahlfors-regularity constants: min and max over sampled centers
/// x (drawn from the self-similar piece measure) and radii r of mu(B(x,r))/r^s.
template <int Dim>
AhlforsBounds ahlfors_check(const BoundaryGeometry<Dim>& g, double s, int n_centers,
                            std::pair<double, double> r_range, std::uint64_t seed = 1, int n_radii = 8) {
  require(s >= 0.0 && s <= Dim, "s must lie in [0, d]");
  require(n_centers >= 1 && n_radii >= 2, "need at least one center and two radii");
  require(r_range.first > 0.0 && r_range.second > r_range.first, "bad radius range");
  require(!g.empty(), "geometry has no primitives");
  auto pts = detail::measure_samples(g, s, r_range.first / 16.0);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.p[0] < b.p[0]; });

  // centers: pick a primitive by mass, then a uniform point on it
  std::vector<double> piece_mass;
  for (const auto& seg : g.segments) piece_mass.push_back(std::pow(seg.length() / g.unit, s));
  for (const auto& box : g.boxes) piece_mass.push_back(std::pow(box.side() / g.unit, s));
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(piece_mass.begin(), piece_mass.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto radii = geometric_points(r_range.first, r_range.second, n_radii);

  AhlforsBounds out{std::numeric_limits<double>::infinity(), 0.0};
  for (int c = 0; c < n_centers; ++c) {
    const std::size_t id = pick(rng);
    Vec<Dim> x{};
    if (id < g.segments.size()) {
      const auto& seg = g.segments[id];
      const double t = unit(rng);
      for (int a = 0; a < Dim; ++a) x[a] = seg.a[a] + t * (seg.b[a] - seg.a[a]);
    } else {
      const auto& box = g.boxes[id - g.segments.size()];
      for (int a = 0; a < Dim; ++a) x[a] = box.lo[a] + unit(rng) * (box.hi[a] - box.lo[a]);
    }
    for (double r : radii) {
      const auto first = std::lower_bound(pts.begin(), pts.end(), x[0] - r,
                                          [](const auto& m, double v) { return m.p[0] < v; });
      double mu = 0.0;
      std::size_t hits = 0;
      for (auto it = first; it != pts.end() && it->p[0] <= x[0] + r; ++it)
        if (dist2<Dim>(it->p, x) <= r * r) {
          mu += it->mass;
          ++hits;
        }
      if (hits == 0) fail(ErrorKind::InsufficientSamples, "a sampled ball contains no boundary mass");
      const double q = mu / std::pow(r, s);
      out.c_lo = std::min(out.c_lo, q);
      out.c_hi = std::max(out.c_hi, q);
    }
  }
  return out;
}

}  // namespace fraclab
