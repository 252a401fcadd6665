#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fraclab/error.hpp"
#include "fraclab/geometry.hpp"

namespace fraclab {

/// Uniform cell-centered grid with an Omega-membership mask.
///
/// Cells are stored row-major with the last axis fastest. The mask is true
/// exactly where the cell center lies in Omega.
template <int Dim>
struct Grid {
  Vec<Dim> origin{};  // lower corner of cell 0
  double h = 1.0;
  std::array<int, Dim> dims{};
  std::vector<std::uint8_t> mask;

  std::size_t size() const {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
  }

  double cell_volume() const { return std::pow(h, Dim); }

  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int k = Dim - 1; k > axis; --k) s *= static_cast<std::size_t>(dims[k]);
    return s;
  }

  std::array<int, Dim> coords(std::size_t i) const {
    std::array<int, Dim> c{};
    for (int k = Dim - 1; k >= 0; --k) {
      c[k] = static_cast<int>(i % static_cast<std::size_t>(dims[k]));
      i /= static_cast<std::size_t>(dims[k]);
    }
    return c;
  }

  std::size_t index(const std::array<int, Dim>& c) const {
    std::size_t i = 0;
    for (int k = 0; k < Dim; ++k) i = i * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(c[k]);
    return i;
  }

  Vec<Dim> center(std::size_t i) const {
    const auto c = coords(i);
    Vec<Dim> p{};
    for (int k = 0; k < Dim; ++k) p[k] = origin[k] + (c[k] + 0.5) * h;
    return p;
  }

  Box<Dim> bounds() const {
    Box<Dim> b;
    for (int k = 0; k < Dim; ++k) {
      b.lo[k] = origin[k];
      b.hi[k] = origin[k] + dims[k] * h;
    }
    return b;
  }

  double diameter() const {
    const auto b = bounds();
    return std::sqrt(dist2<Dim>(b.lo, b.hi));
  }

  bool inside(std::size_t i) const { return mask[i] != 0; }

  std::size_t masked_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
  }

  /// Calls fn(j) for every axis neighbor j of cell i with j > i (each
  /// unordered axis pair is visited once when iterating over all i).
  template <class Fn>
  void for_each_forward_neighbor(std::size_t i, Fn&& fn) const {
    const auto c = coords(i);
    for (int k = 0; k < Dim; ++k)
      if (c[k] + 1 < dims[k]) fn(i + stride(k));
  }

  /// Calls fn(j, on_grid) for all 2*Dim axis neighbors; off-grid neighbors
  /// report on_grid = false and j = i.
  template <class Fn>
  void for_each_axis_neighbor(std::size_t i, Fn&& fn) const {
    const auto c = coords(i);
    for (int k = 0; k < Dim; ++k) {
      const std::size_t s = stride(k);
      if (c[k] > 0) fn(i - s, true); else fn(i, false);
      if (c[k] + 1 < dims[k]) fn(i + s, true); else fn(i, false);
    }
  }
};

/// Grid with every cell masked in; the caller restricts it afterwards.
template <int Dim>
Grid<Dim> make_grid(const Vec<Dim>& origin, double h, const std::array<int, Dim>& dims) {
  require(h > 0.0, "grid spacing must be positive");
  Grid<Dim> g;
  g.origin = origin;
  g.h = h;
  g.dims = dims;
  for (int d : dims) require(d >= 1, "grid dimensions must be positive");
  g.mask.assign(g.size(), 1);
  return g;
}

/// Sets the mask from the geometry's domain rule: even-odd ray casting for
/// polygons, outside-all-boxes for complements. Segments of a complement
/// geometry have zero volume and mask nothing out.
template <int Dim>
void apply_domain_mask(Grid<Dim>& grid, const BoundaryGeometry<Dim>& geom) {
  std::fill(grid.mask.begin(), grid.mask.end(), std::uint8_t{1});
  if (geom.domain_rule == DomainRule::InteriorOfPolygon) {
    if constexpr (Dim == 2) {
      const int nx = grid.dims[0], ny = grid.dims[1];
      std::fill(grid.mask.begin(), grid.mask.end(), std::uint8_t{0});
      // crossings of the horizontal line through each row of centers (axis 1 = y)
      std::vector<std::vector<double>> cross(static_cast<std::size_t>(ny));
      const double y0 = grid.origin[1], x0 = grid.origin[0], h = grid.h;
      for (const auto& s : geom.segments) {
        const double ya = s.a[1], yb = s.b[1];
        if (ya == yb) continue;
        const double lo = std::min(ya, yb), hi = std::max(ya, yb);
        // rows with center y in [lo, hi)
        int j0 = static_cast<int>(std::ceil((lo - y0) / h - 0.5));
        int j1 = static_cast<int>(std::ceil((hi - y0) / h - 0.5)) - 1;
        j0 = std::max(j0, 0);
        j1 = std::min(j1, ny - 1);
        for (int j = j0; j <= j1; ++j) {
          const double y = y0 + (j + 0.5) * h;
          if (y < lo || y >= hi) continue;
          const double t = (y - ya) / (yb - ya);
          cross[static_cast<std::size_t>(j)].push_back(s.a[0] + t * (s.b[0] - s.a[0]));
        }
      }
      for (int j = 0; j < ny; ++j) {
        auto& xs = cross[static_cast<std::size_t>(j)];
        std::sort(xs.begin(), xs.end());
        for (std::size_t p = 0; p + 1 < xs.size(); p += 2) {
          // centers x with xs[p] < x < xs[p+1]
          int i0 = static_cast<int>(std::floor((xs[p] - x0) / h - 0.5)) + 1;
          int i1 = static_cast<int>(std::ceil((xs[p + 1] - x0) / h - 0.5)) - 1;
          i0 = std::max(i0, 0);
          i1 = std::min(i1, nx - 1);
          for (int i = i0; i <= i1; ++i) grid.mask[grid.index({i, j})] = 1;
        }
      }
    } else {
      fail(ErrorKind::InvalidArgument, "polygon interiors are only defined in d = 2");
    }
    return;
  }
  for (const auto& b : geom.boxes) {
    std::array<int, Dim> lo{}, hi{};
    bool empty = false;
    for (int k = 0; k < Dim; ++k) {
      lo[k] = std::max(0, static_cast<int>(std::ceil((b.lo[k] - grid.origin[k]) / grid.h - 0.5)));
      hi[k] = std::min(grid.dims[k] - 1, static_cast<int>(std::floor((b.hi[k] - grid.origin[k]) / grid.h - 0.5)));
      if (lo[k] > hi[k]) empty = true;
    }
    if (empty) continue;
    std::array<int, Dim> c = lo;
    while (true) {
      grid.mask[grid.index(c)] = 0;
      int k = Dim - 1;
      while (k >= 0 && ++c[k] > hi[k]) {
        c[k] = lo[k];
        --k;
      }
      if (k < 0) break;
    }
  }
}

/// Grid over the geometry's bounding box inflated by `margin`, with
/// `resolution` cells along the longest axis.
template <int Dim>
Grid<Dim> build_grid(const BoundaryGeometry<Dim>& geom, int resolution, double margin) {
  require(resolution >= 2, "resolution must be at least 2");
  require(margin >= 0.0, "margin must be non-negative");
  require(!geom.empty(), "geometry has no primitives");
  auto b = geom.bounds();
  double extent = 0.0;
  for (int k = 0; k < Dim; ++k) {
    b.lo[k] -= margin;
    b.hi[k] += margin;
    extent = std::max(extent, b.hi[k] - b.lo[k]);
  }
  require(extent > 0.0, "degenerate bounding box");
  const double h = extent / resolution;
  std::array<int, Dim> dims{};
  for (int k = 0; k < Dim; ++k)
    dims[k] = std::max(1, static_cast<int>(std::ceil((b.hi[k] - b.lo[k]) / h - 1e-9)));
  auto grid = make_grid<Dim>(b.lo, h, dims);
  apply_domain_mask(grid, geom);
  if (grid.masked_count() == 0) fail(ErrorKind::EmptyDomain, "no cell center lies in the domain");
  return grid;
}

}  // namespace fraclab
