#pragma once

// Finite-depth realizations of self-similar boundaries: segment polygons
// (Koch snowflake) and unions of axis-aligned boxes (Vicsek, Cantor dust).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "fraclab/error.hpp"
#include "fraclab/simsys.hpp"

namespace fraclab {

template <int Dim>
using Vec = std::array<double, Dim>;

template <int Dim>
inline double dist2(const Vec<Dim>& a, const Vec<Dim>& b) {
  double s = 0.0;
  for (int k = 0; k < Dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

template <int Dim>
struct Segment {
  Vec<Dim> a{}, b{};
  double length() const { return std::sqrt(dist2<Dim>(a, b)); }
};

template <int Dim>
struct Box {
  Vec<Dim> lo{}, hi{};
  double side() const { return hi[0] - lo[0]; }
  Vec<Dim> center() const {
    Vec<Dim> c{};
    for (int k = 0; k < Dim; ++k) c[k] = 0.5 * (lo[k] + hi[k]);
    return c;
  }
  bool contains(const Vec<Dim>& p) const {
    for (int k = 0; k < Dim; ++k)
      if (p[k] < lo[k] || p[k] > hi[k]) return false;
    return true;
  }
};

/// Squared distance from p to the segment [a, b].
template <int Dim>
inline double point_segment_dist2(const Vec<Dim>& p, const Segment<Dim>& s) {
  double uu = 0.0, up = 0.0;
  for (int k = 0; k < Dim; ++k) {
    const double u = s.b[k] - s.a[k];
    uu += u * u;
    up += u * (p[k] - s.a[k]);
  }
  double t = uu > 0.0 ? std::clamp(up / uu, 0.0, 1.0) : 0.0;
  double d = 0.0;
  for (int k = 0; k < Dim; ++k) {
    const double q = s.a[k] + t * (s.b[k] - s.a[k]) - p[k];
    d += q * q;
  }
  return d;
}

/// Squared distance from p to the boundary of the box; for exterior points
/// this is the distance to the box itself.
template <int Dim>
inline double point_box_dist2(const Vec<Dim>& p, const Box<Dim>& b) {
  double out = 0.0;
  bool inside = true;
  double inner = std::numeric_limits<double>::infinity();
  for (int k = 0; k < Dim; ++k) {
    if (p[k] < b.lo[k]) {
      out += (b.lo[k] - p[k]) * (b.lo[k] - p[k]);
      inside = false;
    } else if (p[k] > b.hi[k]) {
      out += (p[k] - b.hi[k]) * (p[k] - b.hi[k]);
      inside = false;
    } else {
      inner = std::min({inner, p[k] - b.lo[k], b.hi[k] - p[k]});
    }
  }
  return inside ? inner * inner : out;
}

enum class DomainRule { InteriorOfPolygon, ComplementOfPrimitives };

constexpr std::string_view to_string(DomainRule r) {
  return r == DomainRule::InteriorOfPolygon ? "interior" : "complement";
}

/// Depth-K realization of a boundary Gamma plus the rule that defines Omega.
///
/// Segments of an InteriorOfPolygon geometry are stored in path order and
/// form a closed counterclockwise polygon. `unit` is the length scale of the
/// depth-0 pieces, so a primitive of size L carries self-similar mass
/// (L / unit)^s.
template <int Dim>
struct BoundaryGeometry {
  std::vector<Segment<Dim>> segments;
  std::vector<Box<Dim>> boxes;
  int depth = 0;
  double approx_error = 0.0;
  DomainRule domain_rule = DomainRule::ComplementOfPrimitives;
  FamilyTag tag{};
  double unit = 1.0;

  std::size_t size() const { return segments.size() + boxes.size(); }
  bool empty() const { return size() == 0; }

  /// Axis-aligned bounding box of all primitives.
  Box<Dim> bounds() const {
    Box<Dim> b;
    b.lo.fill(std::numeric_limits<double>::infinity());
    b.hi.fill(-std::numeric_limits<double>::infinity());
    auto grow = [&](const Vec<Dim>& p) {
      for (int k = 0; k < Dim; ++k) {
        b.lo[k] = std::min(b.lo[k], p[k]);
        b.hi[k] = std::max(b.hi[k], p[k]);
      }
    };
    for (const auto& s : segments) {
      grow(s.a);
      grow(s.b);
    }
    for (const auto& x : boxes) {
      grow(x.lo);
      grow(x.hi);
    }
    return b;
  }

  double diameter_bound() const {
    const auto b = bounds();
    return std::sqrt(dist2<Dim>(b.lo, b.hi));
  }

  /// Exact squared distance to the nearest primitive by linear scan.
  double brute_force_dist2(const Vec<Dim>& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : segments) best = std::min(best, point_segment_dist2<Dim>(p, s));
    for (const auto& x : boxes) best = std::min(best, point_box_dist2<Dim>(p, x));
    return best;
  }
};

/// Maximum generation depth per family and dimension.
inline int default_depth_cap(Family f, int d) {
  if (f == Family::Koch) return 10;
  if (d >= 3) return 6;
  if (d == 2) return 10;
  return 20;
}

namespace detail {

template <int Dim>
Eigen::VectorXd to_eigen(const Vec<Dim>& v) {
  Eigen::VectorXd e(Dim);
  for (int k = 0; k < Dim; ++k) e[k] = v[k];
  return e;
}

template <int Dim>
Vec<Dim> from_eigen(const Eigen::VectorXd& e) {
  Vec<Dim> v{};
  for (int k = 0; k < Dim; ++k) v[k] = e[k];
  return v;
}

inline void check_depth(int depth, int cap) {
  require(depth >= 0, "depth must be non-negative");
  if (depth > cap)
    fail(ErrorKind::DepthOverflow, "depth " + std::to_string(depth) + " exceeds the cap " + std::to_string(cap));
}

}  // namespace detail

/// Images of a segment list under every map of the system, in map order.
template <int Dim>
std::vector<Segment<Dim>> apply_system(const SimilaritySystem& sys, const std::vector<Segment<Dim>>& in) {
  require(sys.ambient_dim() == Dim, "system dimension mismatch");
  std::vector<Segment<Dim>> out;
  out.reserve(in.size() * sys.maps().size());
  for (const auto& m : sys.maps())
    for (const auto& s : in)
      out.push_back({detail::from_eigen<Dim>(m.apply(detail::to_eigen<Dim>(s.a))),
                     detail::from_eigen<Dim>(m.apply(detail::to_eigen<Dim>(s.b)))});
  return out;
}

/// Images of a box list under every map of the system, in map order.
template <int Dim>
std::vector<Box<Dim>> apply_system(const SimilaritySystem& sys, const std::vector<Box<Dim>>& in) {
  require(sys.ambient_dim() == Dim, "system dimension mismatch");
  for (const auto& m : sys.maps()) require(m.axis_aligned(), "box iteration needs axis-aligned maps");
  std::vector<Box<Dim>> out;
  out.reserve(in.size() * sys.maps().size());
  for (const auto& m : sys.maps())
    for (const auto& b : in) {
      const auto p = m.apply(detail::to_eigen<Dim>(b.lo));
      const auto q = m.apply(detail::to_eigen<Dim>(b.hi));
      Box<Dim> img;
      for (int k = 0; k < Dim; ++k) {
        img.lo[k] = std::min(p[k], q[k]);
        img.hi[k] = std::max(p[k], q[k]);
      }
      out.push_back(img);
    }
  return out;
}

/// Depth-K Koch curve on the unit segment [0,1]x{0}.
inline std::vector<Segment<2>> koch_curve(const SimilaritySystem& sys, int depth) {
  std::vector<Segment<2>> curve{{{0.0, 0.0}, {1.0, 0.0}}};
  for (int k = 0; k < depth; ++k) curve = apply_system<2>(sys, curve);
  return curve;
}

/// Koch snowflake on a unit equilateral triangle, counterclockwise, curves
/// pointing outward; Omega is the polygon interior.
inline BoundaryGeometry<2> koch_snowflake(double lambda, int depth, int depth_cap = -1) {
  const auto sys = koch_system(lambda);
  detail::check_depth(depth, depth_cap < 0 ? default_depth_cap(Family::Koch, 2) : depth_cap);
  const auto curve = koch_curve(sys, depth);
  const std::array<Vec<2>, 3> tri{{{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}}};
  BoundaryGeometry<2> g;
  g.segments.reserve(3 * curve.size());
  for (int side = 0; side < 3; ++side) {
    const auto& p = tri[side];
    const auto& q = tri[(side + 1) % 3];
    const double c = q[0] - p[0], s = q[1] - p[1];  // rotation+scale taking (1,0) to q-p
    for (const auto& seg : curve) {
      auto place = [&](const Vec<2>& x) { return Vec<2>{p[0] + c * x[0] - s * x[1], p[1] + s * x[0] + c * x[1]}; };
      g.segments.push_back({place(seg.a), place(seg.b)});
    }
  }
  g.depth = depth;
  g.approx_error = std::pow(sys.max_ratio(), depth);  // unit sides, curve diameter 1
  g.domain_rule = DomainRule::InteriorOfPolygon;
  g.tag = sys.tag();
  g.unit = 1.0;
  return g;
}

/// Depth-K box realization of the attractor of an axis-aligned system.
template <int Dim>
BoundaryGeometry<Dim> box_attractor(const SimilaritySystem& sys, const Box<Dim>& seed, int depth, int depth_cap) {
  detail::check_depth(depth, depth_cap);
  std::vector<Box<Dim>> boxes{seed};
  for (int k = 0; k < depth; ++k) boxes = apply_system<Dim>(sys, boxes);
  BoundaryGeometry<Dim> g;
  g.boxes = std::move(boxes);
  g.depth = depth;
  g.unit = seed.side();
  g.approx_error = std::sqrt(static_cast<double>(Dim)) * g.unit * std::pow(sys.max_ratio(), depth);
  g.domain_rule = DomainRule::ComplementOfPrimitives;
  g.tag = sys.tag();
  return g;
}

/// Vicsek snowflake on [-1/2, 1/2]^d; Omega is the complement.
template <int Dim>
BoundaryGeometry<Dim> vicsek(double lambda, int depth, int depth_cap = -1) {
  static_assert(Dim == 2 || Dim == 3, "Vicsek realizations are built for d = 2 and d = 3");
  Box<Dim> seed;
  seed.lo.fill(-0.5);
  seed.hi.fill(0.5);
  return box_attractor<Dim>(vicsek_system(lambda, Dim), seed, depth,
                            depth_cap < 0 ? default_depth_cap(Family::Vicsek, Dim) : depth_cap);
}

/// Cantor dust on [0,1]^d; Omega is the complement.
template <int Dim>
BoundaryGeometry<Dim> cantor_dust(double lambda, int depth, int depth_cap = -1) {
  Box<Dim> seed;
  seed.lo.fill(0.0);
  seed.hi.fill(1.0);
  return box_attractor<Dim>(cantor_system(lambda, Dim), seed, depth,
                            depth_cap < 0 ? default_depth_cap(Family::CantorDust, Dim) : depth_cap);
}

/// Smallest depth whose approximation error is at most h / 10. Throws
/// DepthOverflow when that depth exceeds the family's cap.
inline int depth_for_spacing(Family f, double lambda, int d, double h) {
  require(h > 0.0, "grid spacing must be positive");
  const auto sys = family_system(f, lambda, d);
  const double lead = f == Family::Koch ? 1.0 : std::sqrt(static_cast<double>(d));
  const int cap = default_depth_cap(f, d);
  int k = 0;
  while (lead * std::pow(sys.max_ratio(), k) > h / 10.0) {
    if (++k > cap)
      fail(ErrorKind::DepthOverflow, "resolving h = " + std::to_string(h) + " needs a depth above the cap");
  }
  return k;
}

/// Closed polygon through the given vertices (counterclockwise expected).
inline BoundaryGeometry<2> polygon(const std::vector<Vec<2>>& vertices) {
  require(vertices.size() >= 3, "a polygon needs at least three vertices");
  BoundaryGeometry<2> g;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    g.segments.push_back({vertices[i], vertices[(i + 1) % vertices.size()]});
  g.domain_rule = DomainRule::InteriorOfPolygon;
  return g;
}

/// Regular n-gon inscribed in the circle of the given radius.
inline BoundaryGeometry<2> disk(Vec<2> center, double radius, int n) {
  require(n >= 3 && radius > 0.0, "disk needs n >= 3 and a positive radius");
  std::vector<Vec<2>> v;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    v.push_back({center[0] + radius * std::cos(t), center[1] + radius * std::sin(t)});
  }
  auto g = polygon(v);
  g.approx_error = radius * (1.0 - std::cos(std::numbers::pi / n));
  return g;
}

/// Open segment set; Omega is its complement.
template <int Dim>
BoundaryGeometry<Dim> segment_set(std::vector<Segment<Dim>> segs) {
  BoundaryGeometry<Dim> g;
  g.segments = std::move(segs);
  g.domain_rule = DomainRule::ComplementOfPrimitives;
  return g;
}

// ---------------------------------------------------------------------------
// Text export
//
//   G <dim> <depth> <family> <lambda> <domain_rule> <approx_error> <unit>
//   S a1 .. ad b1 .. bd
//   B lo1 .. lod hi1 .. hid

template <int Dim>
void write_geometry(std::ostream& os, const BoundaryGeometry<Dim>& g) {
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  os << "G " << Dim << ' ' << g.depth << ' ' << to_string(g.tag.family) << ' ' << num(g.tag.lambda) << ' '
     << to_string(g.domain_rule) << ' ' << num(g.approx_error) << ' ' << num(g.unit) << '\n';
  for (const auto& s : g.segments) {
    os << 'S';
    for (int k = 0; k < Dim; ++k) os << ' ' << num(s.a[k]);
    for (int k = 0; k < Dim; ++k) os << ' ' << num(s.b[k]);
    os << '\n';
  }
  for (const auto& b : g.boxes) {
    os << 'B';
    for (int k = 0; k < Dim; ++k) os << ' ' << num(b.lo[k]);
    for (int k = 0; k < Dim; ++k) os << ' ' << num(b.hi[k]);
    os << '\n';
  }
}

template <int Dim>
BoundaryGeometry<Dim> read_geometry(std::istream& is) {
  BoundaryGeometry<Dim> g;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    char kind = 0;
    ls >> kind;
    if (kind == 'G') {
      int dim = 0;
      std::string fam, rule;
      ls >> dim >> g.depth >> fam >> g.tag.lambda >> rule >> g.approx_error >> g.unit;
      if (!ls || dim != Dim) fail(ErrorKind::ConfigError, "bad geometry header: " + line);
      g.tag.family = family_from_string(fam);
      g.domain_rule = rule == "interior" ? DomainRule::InteriorOfPolygon : DomainRule::ComplementOfPrimitives;
      header = true;
    } else if (kind == 'S') {
      Segment<Dim> s;
      for (int k = 0; k < Dim; ++k) ls >> s.a[k];
      for (int k = 0; k < Dim; ++k) ls >> s.b[k];
      if (!ls) fail(ErrorKind::ConfigError, "bad segment line: " + line);
      g.segments.push_back(s);
    } else if (kind == 'B') {
      Box<Dim> b;
      for (int k = 0; k < Dim; ++k) ls >> b.lo[k];
      for (int k = 0; k < Dim; ++k) ls >> b.hi[k];
      if (!ls) fail(ErrorKind::ConfigError, "bad box line: " + line);
      g.boxes.push_back(b);
    } else {
      fail(ErrorKind::ConfigError, "unknown geometry record: " + line);
    }
  }
  if (!header) fail(ErrorKind::ConfigError, "geometry stream has no header");
  return g;
}

}  // namespace fraclab
