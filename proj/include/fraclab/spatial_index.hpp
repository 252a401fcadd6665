#pragma once

// Bounding-volume hierarchy over the primitives of a BoundaryGeometry, used
// for exact nearest-primitive distance queries.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "fraclab/geometry.hpp"

namespace fraclab {

template <int Dim>
class PrimitiveIndex {
 public:
  explicit PrimitiveIndex(const BoundaryGeometry<Dim>& g) : geom_(&g) {
    const std::size_t n = g.size();
    items_.resize(n);
    std::iota(items_.begin(), items_.end(), std::uint32_t{0});
    lo_.resize(n);
    hi_.resize(n);
    centroid_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Box<Dim> b = item_bounds(static_cast<std::uint32_t>(i));
      lo_[i] = b.lo;
      hi_[i] = b.hi;
      centroid_[i] = b.center();
    }
    if (n > 0) {
      nodes_.reserve(2 * n / kLeafSize + 2);
      nodes_.emplace_back();
      fill(0, 0, static_cast<std::uint32_t>(n));
    }
    lo_.clear();
    hi_.clear();
    centroid_.clear();
    lo_.shrink_to_fit();
    hi_.shrink_to_fit();
    centroid_.shrink_to_fit();
  }

  bool empty() const { return nodes_.empty(); }

  /// Squared distance to the nearest primitive, or `bound2` if every
  /// primitive is farther than sqrt(bound2).
  double nearest_dist2(const Vec<Dim>& p, double bound2 = std::numeric_limits<double>::infinity()) const {
    if (nodes_.empty()) return bound2;
    double best = bound2;
    std::uint32_t stack[96];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& nd = nodes_[stack[--top]];
      if (box_dist2(p, nd) >= best) continue;
      if (nd.count > 0) {
        for (std::uint32_t k = nd.first; k < nd.first + nd.count; ++k)
          best = std::min(best, item_dist2(p, items_[k]));
        continue;
      }
      const std::uint32_t l = nd.first, r = nd.first + 1;
      const double dl = box_dist2(p, nodes_[l]);
      const double dr = box_dist2(p, nodes_[r]);
      // nearer child popped first
      if (dl <= dr) {
        if (dr < best) stack[top++] = r;
        if (dl < best) stack[top++] = l;
      } else {
        if (dl < best) stack[top++] = l;
        if (dr < best) stack[top++] = r;
      }
    }
    return best;
  }

 private:
  static constexpr std::uint32_t kLeafSize = 4;

  struct Node {
    Vec<Dim> lo, hi;
    std::uint32_t first = 0;  // leaf: first item; inner: index of left child (right = first + 1)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  Box<Dim> item_bounds(std::uint32_t id) const {
    const auto& g = *geom_;
    if (id < g.segments.size()) {
      const auto& s = g.segments[id];
      Box<Dim> b;
      for (int k = 0; k < Dim; ++k) {
        b.lo[k] = std::min(s.a[k], s.b[k]);
        b.hi[k] = std::max(s.a[k], s.b[k]);
      }
      return b;
    }
    return g.boxes[id - g.segments.size()];
  }

  double item_dist2(const Vec<Dim>& p, std::uint32_t id) const {
    const auto& g = *geom_;
    if (id < g.segments.size()) return point_segment_dist2<Dim>(p, g.segments[id]);
    return point_box_dist2<Dim>(p, g.boxes[id - g.segments.size()]);
  }

  static double box_dist2(const Vec<Dim>& p, const Node& nd) {
    double d = 0.0;
    for (int k = 0; k < Dim; ++k) {
      const double e = std::max({nd.lo[k] - p[k], 0.0, p[k] - nd.hi[k]});
      d += e * e;
    }
    return d;
  }

  void build_pair(std::uint32_t begin, std::uint32_t mid, std::uint32_t end) {
    // children are adjacent so one index addresses both
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    fill(left, begin, mid);
    fill(left + 1, mid, end);
  }

  void fill(std::uint32_t slot, std::uint32_t begin, std::uint32_t end) {
    Node nd;
    nd.lo.fill(std::numeric_limits<double>::infinity());
    nd.hi.fill(-std::numeric_limits<double>::infinity());
    Vec<Dim> clo = nd.lo, chi = nd.hi;
    for (std::uint32_t i = begin; i < end; ++i) {
      const auto it = items_[i];
      for (int k = 0; k < Dim; ++k) {
        nd.lo[k] = std::min(nd.lo[k], lo_[it][k]);
        nd.hi[k] = std::max(nd.hi[k], hi_[it][k]);
        clo[k] = std::min(clo[k], centroid_[it][k]);
        chi[k] = std::max(chi[k], centroid_[it][k]);
      }
    }
    if (end - begin <= kLeafSize) {
      nd.first = begin;
      nd.count = end - begin;
      nodes_[slot] = nd;
      return;
    }
    int axis = 0;
    for (int k = 1; k < Dim; ++k)
      if (chi[k] - clo[k] > chi[axis] - clo[axis]) axis = k;
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(items_.begin() + begin, items_.begin() + mid, items_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return centroid_[a][axis] < centroid_[b][axis]; });
    nd.first = static_cast<std::uint32_t>(nodes_.size());
    nd.count = 0;
    nodes_[slot] = nd;
    build_pair(begin, mid, end);
  }

  const BoundaryGeometry<Dim>* geom_;
  std::vector<std::uint32_t> items_;
  std::vector<Node> nodes_;
  std::vector<Vec<Dim>> lo_, hi_, centroid_;
};

}  // namespace fraclab
