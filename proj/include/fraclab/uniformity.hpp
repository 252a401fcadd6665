#pragma once

// Heuristic estimate of the local uniformity constant sigma: for sampled
// pairs (x, y) in Omega_{z,R}, the smallest sigma for which a grid path
// exists with length <= sigma d(x;y) and d_Gamma(w) >= min(d(x;w), d(w;y)) / sigma
// at every path cell w. The result is an upper-bound witness on the sample,
// not a certificate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "fraclab/distance_field.hpp"
#include "fraclab/error.hpp"

namespace fraclab {

namespace detail {

template <int Dim>
struct KingMoves {
  std::vector<std::array<int, Dim>> offsets;
  std::vector<double> lengths;  // in units of h
  KingMoves() {
    std::array<int, Dim> o{};
    o.fill(-1);
    while (true) {
      int nz = 0;
      for (int v : o) nz += v != 0;
      if (nz > 0) {
        offsets.push_back(o);
        lengths.push_back(std::sqrt(double(nz)));
      }
      int k = Dim - 1;
      while (k >= 0 && ++o[k] > 1) o[k--] = -1;
      if (k < 0) break;
    }
  }
};

/// Connected-component labels of masked-in cells under king moves.
template <int Dim>
std::vector<std::int32_t> component_labels(const Grid<Dim>& grid) {
  const KingMoves<Dim> moves;
  std::vector<std::int32_t> label(grid.size(), -1);
  std::int32_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (!grid.mask[s] || label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const auto c = grid.coords(i);
      for (const auto& o : moves.offsets) {
        std::array<int, Dim> q{};
        bool ok = true;
        for (int k = 0; k < Dim; ++k) {
          q[k] = c[k] + o[k];
          if (q[k] < 0 || q[k] >= grid.dims[k]) ok = false;
        }
        if (!ok) continue;
        const std::size_t j = grid.index(q);
        if (grid.mask[j] && label[j] < 0) {
          label[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  return label;
}

}  // namespace detail

template <int Dim>
class UniformityProbe {
 public:
  explicit UniformityProbe(const DistanceField<Dim>& df)
      : df_(df), labels_(detail::component_labels(df.grid)),
        dist_(df.grid.size(), std::numeric_limits<double>::infinity()) {}

  bool connected(std::size_t x, std::size_t y) const { return labels_[x] >= 0 && labels_[x] == labels_[y]; }

  /// Whether a sigma-admissible path joins cells x and y.
  bool feasible(std::size_t x, std::size_t y, double sigma) {
    const auto& g = df_.grid;
    const auto px = g.center(x), py = g.center(y);
    const double dxy = std::sqrt(dist2<Dim>(px, py));
    const double budget = sigma * dxy;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    touched_.clear();
    dist_[x] = 0.0;
    touched_.push_back(x);
    pq.push({0.0, x});
    bool found = false;
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (du > dist_[u]) continue;
      if (u == y) {
        found = true;
        break;
      }
      const auto c = g.coords(u);
      for (std::size_t m = 0; m < moves_.offsets.size(); ++m) {
        std::array<int, Dim> q{};
        bool ok = true;
        for (int k = 0; k < Dim; ++k) {
          q[k] = c[k] + moves_.offsets[m][k];
          if (q[k] < 0 || q[k] >= g.dims[k]) ok = false;
        }
        if (!ok) continue;
        const std::size_t v = g.index(q);
        if (!g.mask[v]) continue;
        const double nd = du + moves_.lengths[m] * g.h;
        if (nd >= dist_[v] || nd > budget * (1.0 + 1e-12)) continue;
        const auto pv = g.center(v);
        const double ax = std::sqrt(dist2<Dim>(px, pv)), ay = std::sqrt(dist2<Dim>(pv, py));
        if (ax + ay > budget * (1.0 + 1e-12)) continue;  // outside the reachable ellipse
        if (v != y && sigma * df_.values[v] < std::min(ax, ay)) continue;
        if (dist_[v] == std::numeric_limits<double>::infinity()) touched_.push_back(v);
        dist_[v] = nd;
        pq.push({nd, v});
      }
    }
    for (std::size_t t : touched_) dist_[t] = std::numeric_limits<double>::infinity();
    return found;
  }

  /// Smallest admissible sigma for the pair, to relative precision rel_tol.
  double pair_sigma(std::size_t x, std::size_t y, double rel_tol = 1e-3) {
    if (!connected(x, y)) fail(ErrorKind::Disconnected, "no grid path joins a sampled pair");
    double lo = 1.0, hi = 2.0;
    if (feasible(x, y, lo)) return lo;
    while (!feasible(x, y, hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e9) fail(ErrorKind::Disconnected, "no admissible path below sigma = 1e9");
    }
    while (hi - lo > rel_tol * lo) {
      const double mid = 0.5 * (lo + hi);
      (feasible(x, y, mid) ? hi : lo) = mid;
    }
    return hi;
  }

 private:
  const DistanceField<Dim>& df_;
  std::vector<std::int32_t> labels_;
  std::vector<double> dist_;
  std::vector<std::size_t> touched_;
  detail::KingMoves<Dim> moves_;
};

/// Max over n_pairs random pairs from Omega_{z,R} of the pair's minimal sigma.
template <int Dim>
double uniformity_estimate(const DistanceField<Dim>& df, const std::type_identity_t<Vec<Dim>>& z, double R, int n_pairs,
                           std::uint64_t seed) {
  require(R > 0.0 && n_pairs >= 1, "need R > 0 and at least one pair");
  std::vector<std::size_t> region;
  for (std::size_t i = 0; i < df.grid.size(); ++i)
    if (df.grid.mask[i] && dist2<Dim>(df.grid.center(i), z) < R * R) region.push_back(i);
  if (region.size() < 2) fail(ErrorKind::InsufficientSamples, "Omega_{z,R} holds fewer than two cells");
  UniformityProbe<Dim> probe(df);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, region.size() - 1);
  double sigma = 1.0;
  for (int p = 0; p < n_pairs; ++p) {
    std::size_t x = region[pick(rng)], y = region[pick(rng)];
    while (y == x) y = region[pick(rng)];
    sigma = std::max(sigma, probe.pair_sigma(x, y));
  }
  return sigma;
}

}  // namespace fraclab
