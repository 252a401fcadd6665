#include <gtest/gtest.h>

#include "fraclab/distance_field.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/stochastic.hpp"

using namespace fraclab;

namespace {

struct Interval {
  DistanceField<1> df;
  SparseForm form;
  std::size_t mid;
};

// Omega = (0,1), Gamma = {0, 1}
Interval interval(int n, double delta) {
  const auto g = segment_set<1>({{{0.0}, {0.0}}, {{1.0}, {1.0}}});
  Interval out{distance_field(g, make_grid<1>({0.0}, 1.0 / n, {n})), {}, static_cast<std::size_t>(n / 2)};
  out.form = assemble_form(out.df, delta);
  return out;
}

struct Dust {
  DistanceField<2> df;
  SparseForm form;
  std::size_t start;
};

Dust dust(int n, double delta) {
  const auto g = cantor_dust<2>(0.25, 5);
  Dust out{distance_field(g, build_grid(g, n, 0.25)), {}, 0};
  out.form = assemble_form(out.df, delta);
  double best = 1e9;
  for (std::size_t i = 0; i < out.df.size(); ++i) {
    const auto c = out.df.grid.center(i);
    const double d = std::hypot(c[0] - 0.5, c[1] - 0.5);
    if (out.df.grid.mask[i] && d < best) {
      best = d;
      out.start = i;
    }
  }
  return out;
}

}  // namespace

TEST(SplitMix, UniformInUnitInterval) {
  SplitMix64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
  EXPECT_NE(trial_seed(1, 0), trial_seed(1, 1));
  EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
}

TEST(Walk, TinyHorizonNeverAbsorbs) {
  const auto iv = interval(200, 0.0);
  WalkConfig cfg{iv.mid, 1e-12, 500, 3, 0.02};
  EXPECT_EQ(walk_absorption(iv.form, iv.df, cfg).p_hat, 0.0);
}

TEST(Walk, IntervalAbsorbsByLongHorizon) {
  const auto iv = interval(100, 0.0);
  WalkConfig cfg{iv.mid, 10.0, 2000, 5, 0.02};
  const auto r = walk_absorption(iv.form, iv.df, cfg);
  EXPECT_GE(r.p_hat, 0.99);
  EXPECT_EQ(r.clamp_events, 0u);
}

TEST(Walk, IntervalMatchesBrownianExitProbability) {
  // exit of standard-generator Brownian motion (dX = sqrt(2) dB) from (a, 1-a)
  // started at 1/2: P(tau <= T) from the sine series
  const auto iv = interval(200, 0.0);
  const double a = 0.1, T = 0.05, len = 1.0 - 2 * a;
  double survive = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int m = 2 * k + 1;
    survive += 4.0 / (m * std::numbers::pi) * std::sin(m * std::numbers::pi * 0.5) *
               std::exp(-std::pow(m * std::numbers::pi / len, 2) * T);
  }
  WalkConfig cfg{iv.mid, T, 20000, 9, a};
  const auto r = walk_absorption(iv.form, iv.df, cfg);
  EXPECT_NEAR(r.p_hat, 1.0 - survive, 4 * r.std_error + 0.02);
}

TEST(Walk, ReproducibleBitForBit) {
  const auto d = dust(64, 2.0);
  WalkConfig cfg{d.start, 2.0, 300, 42, 0.05};
  const auto a = walk_absorption(d.form, d.df, cfg), b = walk_absorption(d.form, d.df, cfg);
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.jumps, b.jumps);
  EXPECT_EQ(a.p_hat, b.p_hat);
  cfg.seed = 43;
  EXPECT_NE(walk_absorption(d.form, d.df, cfg).jumps, a.jumps);
}

TEST(Walk, CoupledMonotoneInHorizonAndCollar) {
  const auto d = dust(64, 0.0);
  WalkConfig cfg{d.start, 0.02, 1000, 8, 0.05};
  double prev = -1.0;
  for (double T : {0.005, 0.01, 0.02, 0.04}) {
    cfg.horizon = T;
    const double p = walk_absorption(d.form, d.df, cfg).p_hat;
    EXPECT_GE(p, prev);
    prev = p;
  }
  cfg.horizon = 0.02;
  prev = -1.0;
  for (double eps : {0.05, 0.08, 0.12}) {
    cfg.absorb_eps = eps;
    const double p = walk_absorption(d.form, d.df, cfg).p_hat;
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(Walk, StandardErrorIsBinomial) {
  const auto d = dust(64, 0.0);
  WalkConfig cfg{d.start, 0.02, 800, 1, 0.05};
  const auto r = walk_absorption(d.form, d.df, cfg);
  EXPECT_NEAR(r.std_error, std::sqrt(r.p_hat * (1 - r.p_hat) / 800), 1e-15);
}

TEST(Walk, RateClampCounted) {
  const auto iv = interval(100, 0.0);
  WalkConfig cfg{iv.mid, 1e-3, 50, 2, 0.02, 1.0};
  EXPECT_GT(walk_absorption(iv.form, iv.df, cfg).clamp_events, 0u);
}

TEST(Walk, RejectsBadConfig) {
  const auto iv = interval(100, 0.0);
  EXPECT_THROW(walk_absorption(iv.form, iv.df, WalkConfig{iv.mid, 1.0, 10, 1, 0.001}), Error);
  EXPECT_THROW(walk_absorption(iv.form, iv.df, WalkConfig{0, 1.0, 10, 1, 0.02}), Error);
  EXPECT_THROW(walk_absorption(iv.form, iv.df, WalkConfig{iv.mid, 1.0, 0, 1, 0.02}), Error);
  EXPECT_THROW(walk_absorption(iv.form, iv.df, WalkConfig{iv.mid, -1.0, 10, 1, 0.02}), Error);
}
