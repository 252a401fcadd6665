#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fraclab/geometry.hpp"
#include "fraclab/simsys.hpp"

using namespace fraclab;

namespace {

double moran_residual(const SimilaritySystem& sys, double s) {
  double sum = 0.0;
  for (double r : sys.ratios()) sum += std::pow(r, s);
  return std::abs(sum - 1.0);
}

SimilaritySystem ratios_system(const std::vector<double>& ratios, int d = 1) {
  std::vector<Similarity> maps;
  for (double r : ratios) maps.push_back(Similarity::scaling(d, r, Eigen::VectorXd::Zero(d)));
  return SimilaritySystem(d, maps, {}, true);
}

}  // namespace

TEST(SimilarityDimension, SingleHalfMapIsZero) {
  EXPECT_EQ(similarity_dimension(ratios_system({0.5})), 0.0);
}

TEST(SimilarityDimension, CantorDustClosedForm) {
  for (int d = 1; d <= 3; ++d)
    for (double lam : {1.0 / 8, 1.0 / 4, 1.0 / 3, 0.4}) {
      const double s = similarity_dimension(cantor_system(lam, d));
      EXPECT_NEAR(s, d * std::log(2.0) / std::log(1.0 / lam), 1e-10) << "d=" << d << " lambda=" << lam;
    }
  EXPECT_NEAR(similarity_dimension(cantor_system(0.25, 2)), 1.0, 1e-12);
}

TEST(SimilarityDimension, KochThird) {
  EXPECT_NEAR(similarity_dimension(koch_system(1.0 / 3)), std::log(4.0) / std::log(3.0), 1e-10);
  EXPECT_NEAR(similarity_dimension(koch_system(1.0 / 3)), 1.2618595071429148, 1e-12);
}

TEST(SimilarityDimension, VicsekThirdInThreeDimensions) {
  EXPECT_NEAR(similarity_dimension(vicsek_system(1.0 / 3, 3)), 2.0, 1e-10);
}

TEST(SimilarityDimension, VicsekLambda4GivesCodimensionOne) {
  // the Vicsek parameter at which s = d - 1 in four dimensions
  const double lam4 = (std::sqrt(21.0) - 3.0) / 4.0;
  EXPECT_NEAR(similarity_dimension(vicsek_system(lam4, 4)), 3.0, 1e-10);
}

TEST(SimilarityDimension, OverfullSystemHasNoSolution) {
  try {
    similarity_dimension(ratios_system({0.9, 0.9, 0.9}));
    FAIL() << "expected NoSolutionInRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoSolutionInRange);
  }
}

TEST(SimilarityDimension, ResidualBelowToleranceOnRandomSystems) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 0.6);
  for (int t = 0; t < 200; ++t) {
    const int m = 2 + static_cast<int>(rng() % 6);
    std::vector<double> r;
    double sum = 0.0;
    for (int k = 0; k < m; ++k) sum += r.emplace_back(u(rng));
    if (sum > 1.0)  // keep sum r <= 1 so the root lies in [0, 1]
      for (auto& x : r) x *= 0.99 / sum;
    const auto sys = ratios_system(r);
    const double s = similarity_dimension(sys);
    EXPECT_LE(moran_residual(sys, s), 1e-12);
  }
}

TEST(SimilarityDimension, MonotoneInEachRatio) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r{u(rng), u(rng), u(rng)};
    const double s0 = similarity_dimension(ratios_system(r));
    r[t % 3] *= 1.1;
    EXPECT_GT(similarity_dimension(ratios_system(r)), s0);
  }
}

TEST(CriticalDelta, PaperCases) {
  for (int d = 1; d <= 4; ++d) EXPECT_DOUBLE_EQ(critical_delta(d - 1, d), 1.0);
  for (int d = 2; d <= 4; ++d) EXPECT_DOUBLE_EQ(critical_delta(d - 2, d), 0.0);
  const double s = std::log(4.0) / std::log(3.0);
  EXPECT_DOUBLE_EQ(critical_delta(s, 2), s);
  EXPECT_THROW(critical_delta(3.5, 3), Error);
}

TEST(Similarity, RejectsBadMaps) {
  EXPECT_THROW(Similarity::scaling(2, 1.0, Eigen::VectorXd::Zero(2)), Error);
  Eigen::MatrixXd skew(2, 2);
  skew << 1, 0.1, 0, 1;
  EXPECT_THROW(Similarity(0.5, skew, Eigen::VectorXd::Zero(2)), Error);
  EXPECT_THROW(koch_system(0.4), Error);
  EXPECT_THROW(cantor_system(0.5, 2), Error);
}

TEST(Koch, DepthZeroIsTriangle) {
  const auto g = koch_snowflake(1.0 / 3, 0);
  ASSERT_EQ(g.segments.size(), 3u);
  for (const auto& s : g.segments) EXPECT_NEAR(s.length(), 1.0, 1e-14);
  EXPECT_EQ(g.domain_rule, DomainRule::InteriorOfPolygon);
}

TEST(Koch, DepthOneThird) {
  const auto g = koch_snowflake(1.0 / 3, 1);
  ASSERT_EQ(g.segments.size(), 12u);
  for (const auto& s : g.segments) EXPECT_NEAR(s.length(), 1.0 / 3, 1e-14);
}

TEST(Koch, DepthTwoQuarterLengths) {
  const auto g = koch_snowflake(0.25, 2);
  ASSERT_EQ(g.segments.size(), 48u);
  const double a = 3.0 / 8, l = 0.25;
  const std::vector<double> allowed{a * a, a * l, l * l};
  for (const auto& s : g.segments) {
    const double len = s.length();
    EXPECT_TRUE(std::any_of(allowed.begin(), allowed.end(), [&](double v) { return std::abs(v - len) < 1e-14; }))
        << len;
  }
}

TEST(Koch, ClosedCounterclockwiseAndBumpsOutward) {
  const auto g = koch_snowflake(1.0 / 3, 3);
  double area2 = 0.0;
  for (std::size_t i = 0; i < g.segments.size(); ++i) {
    const auto& s = g.segments[i];
    const auto& next = g.segments[(i + 1) % g.segments.size()];
    EXPECT_NEAR(s.b[0], next.a[0], 1e-12);
    EXPECT_NEAR(s.b[1], next.a[1], 1e-12);
    area2 += s.a[0] * s.b[1] - s.b[0] * s.a[1];
  }
  // snowflake area with unit triangle is (2 sqrt 3 / 5) in the limit; depth 3 is a bit less
  EXPECT_GT(area2 / 2, std::sqrt(3.0) / 4);
  EXPECT_LT(area2 / 2, 2.0 * std::sqrt(3.0) / 5);
}

TEST(Koch, RecursionMatchesMapImages) {
  const auto sys = koch_system(0.3);
  const auto c2 = koch_curve(sys, 2);
  const auto c3 = koch_curve(sys, 3);
  const auto images = apply_system<2>(sys, c2);
  ASSERT_EQ(images.size(), c3.size());
  auto key = [](const Segment<2>& s) { return std::array<double, 4>{s.a[0], s.a[1], s.b[0], s.b[1]}; };
  std::vector<std::array<double, 4>> x, y;
  for (const auto& s : images) x.push_back(key(s));
  for (const auto& s : c3) y.push_back(key(s));
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(x[i][k], y[i][k], 1e-12);
}

TEST(Koch, ApproxErrorContracts) {
  const auto sys = koch_system(0.25);
  for (int k = 0; k < 8; ++k) {
    const auto a = koch_snowflake(0.25, k), b = koch_snowflake(0.25, k + 1);
    EXPECT_LE(b.approx_error, sys.max_ratio() * a.approx_error * (1 + 1e-12));
    EXPECT_LE(a.approx_error, a.diameter_bound() * std::pow(sys.max_ratio(), k) + 1e-15);
  }
}

TEST(Koch, DepthCap) {
  try {
    koch_snowflake(1.0 / 3, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DepthOverflow);
  }
}

TEST(Vicsek, DepthZeroAndOne) {
  const auto g0 = vicsek<2>(0.25, 0);
  ASSERT_EQ(g0.boxes.size(), 1u);
  EXPECT_DOUBLE_EQ(g0.boxes[0].side(), 1.0);
  const auto g1 = vicsek<2>(0.25, 1);
  ASSERT_EQ(g1.boxes.size(), 5u);
  int corners = 0, centers = 0;
  for (const auto& b : g1.boxes) {
    if (std::abs(b.side() - 0.25) < 1e-14) ++corners;
    if (std::abs(b.side() - 0.5) < 1e-14) {
      ++centers;
      EXPECT_NEAR(b.center()[0], 0.0, 1e-14);
      EXPECT_NEAR(b.center()[1], 0.0, 1e-14);
    }
  }
  EXPECT_EQ(corners, 4);
  EXPECT_EQ(centers, 1);
}

TEST(Vicsek, ThreeDimensionalDepthTwo) {
  const auto g = vicsek<3>(1.0 / 3, 2);
  ASSERT_EQ(g.boxes.size(), 81u);
  for (const auto& b : g.boxes) EXPECT_NEAR(b.side(), 1.0 / 9, 1e-14);
  EXPECT_THROW(vicsek<3>(1.0 / 3, 7), Error);
}

TEST(CantorDust, Counts) {
  EXPECT_EQ(cantor_dust<2>(0.25, 0).boxes.size(), 1u);
  const auto g1 = cantor_dust<2>(0.25, 1);
  ASSERT_EQ(g1.boxes.size(), 4u);
  for (const auto& b : g1.boxes) {
    EXPECT_DOUBLE_EQ(b.side(), 0.25);
    for (int k = 0; k < 2; ++k) EXPECT_TRUE(b.lo[k] == 0.0 || b.hi[k] == 1.0);
  }
  const auto g3 = cantor_dust<2>(0.25, 3);
  ASSERT_EQ(g3.boxes.size(), 64u);
  for (const auto& b : g3.boxes) EXPECT_NEAR(b.side(), 1.0 / 64, 1e-15);
}

TEST(CantorDust, RecursionMatchesMapImages) {
  const auto sys = cantor_system(0.3, 2);
  const auto a = cantor_dust<2>(0.3, 3), b = cantor_dust<2>(0.3, 4);
  const auto images = apply_system<2>(sys, a.boxes);
  ASSERT_EQ(images.size(), b.boxes.size());
  for (std::size_t i = 0; i < images.size(); ++i)
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(images[i].lo[k], b.boxes[i].lo[k], 1e-12);
      EXPECT_NEAR(images[i].hi[k], b.boxes[i].hi[k], 1e-12);
    }
  EXPECT_LE(b.approx_error, sys.max_ratio() * a.approx_error * (1 + 1e-12));
}

TEST(GeometryText, RoundTrip) {
  for (const auto& g : {koch_snowflake(0.3, 2), polygon({{0, 0}, {1, 0}, {0, 1}})}) {
    std::stringstream ss;
    write_geometry(ss, g);
    const auto back = read_geometry<2>(ss);
    ASSERT_EQ(back.segments.size(), g.segments.size());
    for (std::size_t i = 0; i < g.segments.size(); ++i) {
      EXPECT_EQ(back.segments[i].a, g.segments[i].a);
      EXPECT_EQ(back.segments[i].b, g.segments[i].b);
    }
    EXPECT_EQ(back.domain_rule, g.domain_rule);
    EXPECT_EQ(back.tag.family, g.tag.family);
    EXPECT_EQ(back.approx_error, g.approx_error);
  }
  const auto c = cantor_dust<3>(0.25, 2);
  std::stringstream ss;
  write_geometry(ss, c);
  const auto back = read_geometry<3>(ss);
  ASSERT_EQ(back.boxes.size(), c.boxes.size());
  EXPECT_EQ(back.boxes.back().hi, c.boxes.back().hi);
  std::stringstream bad("G 2 0 koch 0.3 interior 0 1\nQ 1 2\n");
  EXPECT_THROW(read_geometry<2>(bad), Error);
}
