#pragma once

// Self-similar systems: contracting similarities, the Moran dimension
// equation and the critical degeneracy exponent.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "fraclab/error.hpp"

namespace fraclab {

enum class Family { Koch, Vicsek, CantorDust, Custom };

constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::Koch: return "koch";
    case Family::Vicsek: return "vicsek";
    case Family::CantorDust: return "cantor";
    case Family::Custom: return "custom";
  }
  return "custom";
}

inline Family family_from_string(std::string_view s) {
  if (s == "koch") return Family::Koch;
  if (s == "vicsek") return Family::Vicsek;
  if (s == "cantor" || s == "cantor_dust" || s == "cantordust") return Family::CantorDust;
  if (s == "custom") return Family::Custom;
  fail(ErrorKind::ConfigError, "unknown family '" + std::string(s) + "'");
}

struct FamilyTag {
  Family family = Family::Custom;
  double lambda = 0.0;  // unused for Custom
};

/// x -> ratio * rotation * x + translation.
struct Similarity {
  double ratio = 0.5;
  Eigen::MatrixXd rotation;
  Eigen::VectorXd translation;

  Similarity() = default;
  Similarity(double r, Eigen::MatrixXd rot, Eigen::VectorXd t)
      : ratio(r), rotation(std::move(rot)), translation(std::move(t)) {
    require(ratio > 0.0 && ratio < 1.0, "similarity ratio must lie in (0,1)");
    require(rotation.rows() == rotation.cols() && rotation.rows() == translation.size(),
            "similarity rotation/translation dimension mismatch");
    const Eigen::MatrixXd gram = rotation.transpose() * rotation;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(rotation.rows(), rotation.cols());
    require((gram - id).cwiseAbs().maxCoeff() <= 1e-12, "similarity rotation must be orthogonal");
  }

  static Similarity scaling(int dim, double r, Eigen::VectorXd t) {
    return Similarity(r, Eigen::MatrixXd::Identity(dim, dim), std::move(t));
  }

  int dim() const { return static_cast<int>(translation.size()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return ratio * (rotation * x) + translation; }

  /// True when the rotation is a signed permutation, so boxes stay axis-aligned.
  bool axis_aligned() const {
    for (Eigen::Index i = 0; i < rotation.rows(); ++i)
      for (Eigen::Index j = 0; j < rotation.cols(); ++j) {
        const double v = std::abs(rotation(i, j));
        if (v > 1e-12 && std::abs(v - 1.0) > 1e-12) return false;
      }
    return true;
  }
};

class SimilaritySystem {
 public:
  SimilaritySystem(int ambient_dim, std::vector<Similarity> maps, FamilyTag tag = {},
                   bool open_set_condition_declared = false)
      : dim_(ambient_dim), maps_(std::move(maps)), tag_(tag), osc_declared_(open_set_condition_declared) {
    require(dim_ >= 1, "ambient dimension must be >= 1");
    require(!maps_.empty(), "a similarity system needs at least one map");
    for (const auto& m : maps_) require(m.dim() == dim_, "all maps must share the ambient dimension");
    switch (tag_.family) {
      case Family::Koch:
        require(tag_.lambda > 0.0 && tag_.lambda <= 1.0 / 3.0, "Koch lambda must lie in (0, 1/3]");
        osc_declared_ = true;
        break;
      case Family::Vicsek:
      case Family::CantorDust:
        require(tag_.lambda > 0.0 && tag_.lambda < 0.5, "Vicsek/Cantor lambda must lie in (0, 1/2)");
        osc_declared_ = true;
        break;
      case Family::Custom:
        break;
    }
  }

  int ambient_dim() const { return dim_; }
  const std::vector<Similarity>& maps() const { return maps_; }
  const FamilyTag& tag() const { return tag_; }
  bool open_set_condition_declared() const { return osc_declared_; }

  std::vector<double> ratios() const {
    std::vector<double> r;
    r.reserve(maps_.size());
    for (const auto& m : maps_) r.push_back(m.ratio);
    return r;
  }

  double max_ratio() const {
    double r = 0.0;
    for (const auto& m : maps_) r = std::max(r, m.ratio);
    return r;
  }

 private:
  int dim_;
  std::vector<Similarity> maps_;
  FamilyTag tag_;
  bool osc_declared_;
};

/// Koch curve substitution on the unit segment [0,1]x{0}. The bump points
/// toward -y, i.e. to the right of the direction of travel, so images of a
/// counterclockwise polygon's sides point outward.
inline SimilaritySystem koch_system(double lambda) {
  require(lambda > 0.0 && lambda <= 1.0 / 3.0, "Koch lambda must lie in (0, 1/3]");
  const double a = (1.0 - lambda) / 2.0;
  auto rot = [](double angle) {
    Eigen::MatrixXd r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
  };
  const double third = std::numbers::pi / 3.0;
  Eigen::VectorXd t1(2), t2(2), t3(2), t4(2);
  t1 << 0.0, 0.0;
  t2 << a, 0.0;
  t3 << a + lambda / 2.0, -std::sqrt(3.0) / 2.0 * lambda;
  t4 << a + lambda, 0.0;
  std::vector<Similarity> maps{
      Similarity(a, rot(0.0), t1),
      Similarity(lambda, rot(-third), t2),
      Similarity(lambda, rot(third), t3),
      Similarity(a, rot(0.0), t4),
  };
  return SimilaritySystem(2, std::move(maps), {Family::Koch, lambda});
}

/// Vicsek snowflake on the cube [-1/2, 1/2]^d: 2^d corner cubes of edge
/// lambda plus the central cube of edge 1 - 2 lambda.
inline SimilaritySystem vicsek_system(double lambda, int d) {
  require(lambda > 0.0 && lambda < 0.5, "Vicsek lambda must lie in (0, 1/2)");
  require(d >= 1 && d <= 16, "Vicsek dimension out of range");
  std::vector<Similarity> maps;
  const double offset = (1.0 - lambda) / 2.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    Eigen::VectorXd t(d);
    for (int k = 0; k < d; ++k) t[k] = (corner >> k & 1) ? offset : -offset;
    maps.push_back(Similarity::scaling(d, lambda, t));
  }
  maps.push_back(Similarity::scaling(d, 1.0 - 2.0 * lambda, Eigen::VectorXd::Zero(d)));
  return SimilaritySystem(d, std::move(maps), {Family::Vicsek, lambda});
}

/// Cantor dust on the cube [0,1]^d: the 2^d corner cubes of edge lambda.
inline SimilaritySystem cantor_system(double lambda, int d) {
  require(lambda > 0.0 && lambda < 0.5, "Cantor lambda must lie in (0, 1/2)");
  require(d >= 1 && d <= 16, "Cantor dimension out of range");
  std::vector<Similarity> maps;
  for (int corner = 0; corner < (1 << d); ++corner) {
    Eigen::VectorXd t(d);
    for (int k = 0; k < d; ++k) t[k] = (corner >> k & 1) ? 1.0 - lambda : 0.0;
    maps.push_back(Similarity::scaling(d, lambda, t));
  }
  return SimilaritySystem(d, std::move(maps), {Family::CantorDust, lambda});
}

inline SimilaritySystem family_system(Family f, double lambda, int d) {
  switch (f) {
    case Family::Koch:
      require(d == 2, "Koch family lives in d = 2");
      return koch_system(lambda);
    case Family::Vicsek: return vicsek_system(lambda, d);
    case Family::CantorDust: return cantor_system(lambda, d);
    case Family::Custom: break;
  }
  fail(ErrorKind::ConfigError, "custom systems have no parametric constructor");
}

/// Solves sum_k r_k^s = 1 for s in [0, d] by bisection.
///
/// The map s -> sum r_k^s is strictly decreasing, so the bracket [0, d] is
/// safe whenever sum r_k^d <= 1. Bisection runs to machine resolution (at
/// most 200 halvings); the residual at the returned s is checked against tol.
inline double similarity_dimension(const SimilaritySystem& system, double tol = 1e-12) {
  require(tol > 0.0, "tolerance must be positive");
  const auto ratios = system.ratios();
  auto excess = [&](double s) {
    double sum = 0.0;
    for (double r : ratios) sum += std::pow(r, s);
    return sum - 1.0;
  };
  const double d = system.ambient_dim();
  const double at_top = excess(d);
  if (at_top > tol)
    fail(ErrorKind::NoSolutionInRange,
         "sum of r_k^d exceeds 1 (overlapping system beyond the ambient dimension)");
  if (std::abs(at_top) <= 0.0) return d;
  double lo = 0.0, hi = d;
  if (excess(lo) <= 0.0) return 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = excess(mid);
    if (f == 0.0) return mid;
    (f > 0.0 ? lo : hi) = mid;
  }
  const double s = std::abs(excess(lo)) <= std::abs(excess(hi)) ? lo : hi;
  if (std::abs(excess(s)) > tol)
    fail(ErrorKind::NoSolutionInRange, "Moran residual above tolerance at machine resolution");
  return s;
}

/// delta_c = 1 + (s - (d - 1)).
inline double critical_delta(double s, int d) {
  require(d >= 1, "ambient dimension must be >= 1");
  require(s >= 0.0 && s <= d, "similarity dimension must lie in [0, d]");
  return 1.0 + (s - (d - 1));
}

}  // namespace fraclab
