#pragma once

// Continuous-time random walk driven by the discrete generator of a
// SparseForm: jump rate i -> j is w_ij / h^d, holding times are exponential
// with the total exit rate.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fraclab/distance_field.hpp"
#include "fraclab/error.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/parallel.hpp"

namespace fraclab {

struct WalkConfig {
  std::size_t start = 0;     // cell index
  double horizon = 1.0;      // diffusion time T
  int trials = 1000;
  std::uint64_t seed = 0;
  double absorb_eps = 0.0;   // walk is killed on entering {d_Gamma < absorb_eps}
  double max_rate = 1e8;     // holding-rate clamp
};

struct WalkResult {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t clamp_events = 0;
  std::uint64_t jumps = 0;
};

/// SplitMix64: per-trial streams come from hashing (seed, trial index).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t s) : state_(s) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in (0, 1].
  double uniform() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (trial + 1)));
  mix.next();
  return mix.next();
}

/// Per-cell neighbor lists with cumulative jump rates.
struct JumpTable {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> target;
  std::vector<double> cumulative;  // running sum of rates within each cell
  std::vector<double> total;

  JumpTable(const SparseForm& form) {
    const std::size_t n = form.n_cells;
    std::vector<std::size_t> count(n + 1, 0);
    for (const auto& e : form.edges) {
      ++count[e.i];
      ++count[e.j];
    }
    offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + count[i];
    target.resize(offsets[n]);
    cumulative.resize(offsets[n]);
    total.assign(n, 0.0);
    std::vector<std::size_t> fillp(offsets.begin(), offsets.end() - 1);
    const double inv_vol = 1.0 / form.cell_volume;
    for (const auto& e : form.edges) {
      target[fillp[e.i]] = e.j;
      cumulative[fillp[e.i]++] = e.w * inv_vol;
      target[fillp[e.j]] = e.i;
      cumulative[fillp[e.j]++] = e.w * inv_vol;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) cumulative[k] = (s += cumulative[k]);
      total[i] = s;
    }
  }
};

/// Fraction of trials absorbed before time T, with binomial standard error.
template <int Dim>
WalkResult walk_absorption(const SparseForm& form, const DistanceField<Dim>& df, const WalkConfig& cfg) {
  const auto& g = df.grid;
  require(cfg.trials >= 1, "need at least one trial");
  require(cfg.horizon > 0.0, "horizon must be positive");
  require(cfg.absorb_eps >= 2.0 * g.h * (1.0 - 1e-12), "absorb_eps must be at least 2h");
  require(cfg.start < g.size() && g.mask[cfg.start], "start cell must lie in Omega");
  require(df.values[cfg.start] >= cfg.absorb_eps, "start cell lies inside the absorbing collar");
  require(form.n_cells == g.size(), "form and field grids differ");
  const JumpTable table(form);

  std::atomic<std::uint64_t> hits{0}, clamps{0}, jumps{0};
  parallel_chunks(0, static_cast<std::size_t>(cfg.trials), [&](std::size_t lo, std::size_t hi) {
    std::uint64_t h_local = 0, c_local = 0, j_local = 0;
    for (std::size_t t = lo; t < hi; ++t) {
      SplitMix64 rng(trial_seed(cfg.seed, t));
      std::size_t cell = cfg.start;
      double time = 0.0;
      while (true) {
        double rate = table.total[cell];
        if (rate <= 0.0) break;  // isolated cell: the walk never moves
        if (rate > cfg.max_rate) {
          rate = cfg.max_rate;
          ++c_local;
        }
        time += -std::log(rng.uniform()) / rate;
        if (time > cfg.horizon) break;
        const double u = rng.uniform() * table.total[cell];
        const auto first = table.cumulative.begin() + static_cast<std::ptrdiff_t>(table.offsets[cell]);
        const auto last = table.cumulative.begin() + static_cast<std::ptrdiff_t>(table.offsets[cell + 1]);
        auto it = std::lower_bound(first, last, u);
        if (it == last) --it;
        cell = table.target[static_cast<std::size_t>(it - table.cumulative.begin())];
        ++j_local;
        if (df.values[cell] < cfg.absorb_eps) {
          ++h_local;
          break;
        }
      }
    }
    hits += h_local;
    clamps += c_local;
    jumps += j_local;
  });
  WalkResult r;
  r.hits = hits.load();
  r.clamp_events = clamps.load();
  r.jumps = jumps.load();
  r.p_hat = static_cast<double>(r.hits) / cfg.trials;
  r.std_error = std::sqrt(std::max(r.p_hat * (1.0 - r.p_hat), 0.0) / cfg.trials);
  return r;
}

}  // namespace fraclab
