#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

#include "fraclab/error.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/spatial_index.hpp"

namespace fraclab {

/// Distance from every cell center to the depth-K boundary realization.
/// Values are +inf when the geometry has no primitives.
template <int Dim>
struct DistanceField {
  Grid<Dim> grid;
  std::vector<double> values;
  double depth_error = 0.0;

  double h() const { return grid.h; }
  std::size_t size() const { return values.size(); }
};

/// Exact Euclidean distance field. Cells are processed along rows so each
/// query is seeded with the 1-Lipschitz bound from its predecessor.
template <int Dim>
DistanceField<Dim> distance_field(const BoundaryGeometry<Dim>& geom, const Grid<Dim>& grid) {
  DistanceField<Dim> df;
  df.grid = grid;
  df.depth_error = geom.approx_error;
  df.values.assign(grid.size(), std::numeric_limits<double>::infinity());
  if (geom.empty()) return df;
  const PrimitiveIndex<Dim> index(geom);
  const std::size_t row = static_cast<std::size_t>(grid.dims[Dim - 1]);
  const std::size_t rows = grid.size() / row;
  const double step = grid.h * (1.0 + 1e-9) + 1e-300;
  parallel_chunks(0, rows, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      double prev = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < row; ++c) {
        const std::size_t i = r * row + c;
        const double bound = prev + step;
        const double d2 = index.nearest_dist2(grid.center(i), bound * bound);
        const double d = std::sqrt(d2);
        df.values[i] = d;
        prev = d;
      }
    }
  });
  return df;
}

/// h^d times the number of masked-in cells with d_Gamma < r.
template <int Dim>
double neighborhood_volume(const DistanceField<Dim>& df, double r) {
  require(r > 0.0, "radius must be positive");
  std::size_t n = 0;
  for (std::size_t i = 0; i < df.values.size(); ++i)
    if (df.grid.mask[i] && df.values[i] < r) ++n;
  return static_cast<double>(n) * df.grid.cell_volume();
}

/// Sorted masked-in distances for repeated neighborhood-volume queries.
class VolumeProfile {
 public:
  template <int Dim>
  explicit VolumeProfile(const DistanceField<Dim>& df) : cell_volume_(df.grid.cell_volume()) {
    for (std::size_t i = 0; i < df.values.size(); ++i)
      if (df.grid.mask[i]) sorted_.push_back(df.values[i]);
    std::sort(sorted_.begin(), sorted_.end());
  }

  double volume(double r) const {
    const auto n = std::lower_bound(sorted_.begin(), sorted_.end(), r) - sorted_.begin();
    return static_cast<double>(n) * cell_volume_;
  }

 private:
  double cell_volume_;
  std::vector<double> sorted_;
};

// ---------------------------------------------------------------------------
// Export
//
// Binary layout (little-endian host order):
//   char[8]  "FLDIST01"
//   int32    dim
//   int32    dims[dim]
//   float64  h
//   float64  origin[dim]
//   float64  depth_error
//   uint8    mask[n]
//   float64  values[n]     row-major, last axis fastest

template <int Dim>
void write_distance_binary(std::ostream& os, const DistanceField<Dim>& df) {
  os.write("FLDIST01", 8);
  const std::int32_t dim = Dim;
  os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  for (int k = 0; k < Dim; ++k) {
    const std::int32_t n = df.grid.dims[k];
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
  }
  os.write(reinterpret_cast<const char*>(&df.grid.h), sizeof(double));
  os.write(reinterpret_cast<const char*>(df.grid.origin.data()), sizeof(double) * Dim);
  os.write(reinterpret_cast<const char*>(&df.depth_error), sizeof(double));
  os.write(reinterpret_cast<const char*>(df.grid.mask.data()), static_cast<std::streamsize>(df.grid.mask.size()));
  os.write(reinterpret_cast<const char*>(df.values.data()),
           static_cast<std::streamsize>(sizeof(double) * df.values.size()));
  if (!os) fail(ErrorKind::IoError, "failed writing distance field");
}

template <int Dim>
DistanceField<Dim> read_distance_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "FLDIST01", 8) != 0) fail(ErrorKind::IoError, "not a distance-field file");
  std::int32_t dim = 0;
  is.read(reinterpret_cast<char*>(&dim), sizeof dim);
  if (dim != Dim) fail(ErrorKind::IoError, "distance-field dimension mismatch");
  DistanceField<Dim> df;
  for (int k = 0; k < Dim; ++k) {
    std::int32_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    df.grid.dims[k] = n;
  }
  is.read(reinterpret_cast<char*>(&df.grid.h), sizeof(double));
  is.read(reinterpret_cast<char*>(df.grid.origin.data()), sizeof(double) * Dim);
  is.read(reinterpret_cast<char*>(&df.depth_error), sizeof(double));
  df.grid.mask.resize(df.grid.size());
  df.values.resize(df.grid.size());
  is.read(reinterpret_cast<char*>(df.grid.mask.data()), static_cast<std::streamsize>(df.grid.mask.size()));
  is.read(reinterpret_cast<char*>(df.values.data()), static_cast<std::streamsize>(sizeof(double) * df.values.size()));
  if (!is) fail(ErrorKind::IoError, "truncated distance-field file");
  return df;
}

/// One row per cell: center coordinates, mask, distance.
template <int Dim>
void write_distance_csv(std::ostream& os, const DistanceField<Dim>& df) {
  static const char* axis[] = {"x", "y", "z"};
  for (int k = 0; k < Dim; ++k) os << (k < 3 ? axis[k] : "c") << ',';
  os << "in_domain,distance\n";
  os.precision(17);
  for (std::size_t i = 0; i < df.values.size(); ++i) {
    const auto p = df.grid.center(i);
    for (int k = 0; k < Dim; ++k) os << p[k] << ',';
    os << int(df.grid.mask[i]) << ',' << df.values[i] << '\n';
  }
}

}  // namespace fraclab
