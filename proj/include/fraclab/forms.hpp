#pragma once

// Discrete degenerate form h(phi) = sum_edges w_ij (phi_i - phi_j)^2 with
// cell weights c(x) = min(d_Gamma, 1)^delta, plus the capacity, Hardy and
// collar estimators built on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "fraclab/cg.hpp"
#include "fraclab/distance_field.hpp"
#include "fraclab/error.hpp"

namespace fraclab {

enum class EdgeAverage { Arithmetic, Harmonic };

/// Distance clamped to [h/2, 1] and raised to `exponent`; the h/2 floor keeps
/// negative exponents finite next to Gamma.
inline double clamped_power(double dist, double h, double exponent) {
  const double d = std::clamp(dist, 0.5 * h, std::max(1.0, 0.5 * h));
  return std::pow(d, exponent);
}

/// c(x) per cell; zero on cells outside Omega.
struct WeightField {
  double delta = 0.0;
  std::vector<double> values;
};

template <int Dim>
WeightField weight_field(const DistanceField<Dim>& df, double delta) {
  require(delta >= 0.0, "delta must be non-negative");
  WeightField wf;
  wf.delta = delta;
  wf.values.assign(df.size(), 0.0);
  for (std::size_t i = 0; i < df.size(); ++i)
    if (df.grid.mask[i]) wf.values[i] = clamped_power(df.values[i], df.grid.h, delta);
  return wf;
}

struct Edge {
  std::uint32_t i = 0, j = 0;
  double w = 0.0;
};

/// Each unordered axis-neighbor pair of cells in Omega appears once, so the
/// form is symmetric by construction.
struct SparseForm {
  std::vector<Edge> edges;
  double cell_volume = 0.0;
  std::size_t n_cells = 0;

  double value(std::span<const double> phi) const {
    double s = 0.0;
    for (const auto& e : edges) {
      const double d = phi[e.i] - phi[e.j];
      s += e.w * d * d;
    }
    return s;
  }

  /// Polarized bilinear form h(phi, psi).
  double bilinear(std::span<const double> phi, std::span<const double> psi) const {
    double s = 0.0;
    for (const auto& e : edges) s += e.w * (phi[e.i] - phi[e.j]) * (psi[e.i] - psi[e.j]);
    return s;
  }
};

inline double edge_weight(double ci, double cj, double scale, EdgeAverage avg) {
  if (avg == EdgeAverage::Harmonic) return ci + cj > 0.0 ? scale * 2.0 * ci * cj / (ci + cj) : 0.0;
  return scale * 0.5 * (ci + cj);
}

template <int Dim>
SparseForm assemble_form(const DistanceField<Dim>& df, double delta, EdgeAverage avg = EdgeAverage::Arithmetic) {
  const auto wf = weight_field(df, delta);
  const auto& g = df.grid;
  const double scale = std::pow(g.h, Dim - 2);
  SparseForm f;
  f.cell_volume = g.cell_volume();
  f.n_cells = g.size();
  f.edges.reserve(Dim * g.masked_count());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.mask[i]) continue;
    g.for_each_forward_neighbor(i, [&](std::size_t j) {
      if (g.mask[j])
        f.edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           edge_weight(wf.values[i], wf.values[j], scale, avg)});
    });
  }
  return f;
}

/// h^d * sum of phi^2 over cells in Omega.
template <int Dim>
double l2_mass(const Grid<Dim>& g, std::span<const double> phi) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.mask[i]) s += phi[i] * phi[i];
  return s * g.cell_volume();
}

// ---------------------------------------------------------------------------
// Capacity test functions

/// rho_n(d_A / r): 1 inside d_A <= r/n, -log(d_A/r)/log n on (r/n, r], 0 beyond.
inline double eta_value(double dA, double r, int n) {
  if (dA <= r / n) return 1.0;
  if (dA > r) return 0.0;
  return -std::log(dA / r) / std::log(static_cast<double>(n));
}

template <int Dim>
std::vector<double> eta_rn(const DistanceField<Dim>& dA, double r, int n) {
  require(n >= 2, "n must be at least 2");
  require(r > 0.0, "r must be positive");
  std::vector<double> eta(dA.size(), 0.0);
  for (std::size_t i = 0; i < dA.size(); ++i)
    if (dA.grid.mask[i]) eta[i] = eta_value(dA.values[i], r, n);
  return eta;
}

struct EtaBound {
  double value = 0.0;  // h(eta) + ||eta||^2 at the minimizing (r, n)
  double energy = 0.0;
  double mass = 0.0;
  double r = 0.0;
  int n = 0;
};

/// min over (r, n) of h(eta_{r,n}) + ||eta_{r,n}||_2^2; ties go to the
/// smaller r, then the larger n.
template <int Dim>
EtaBound capacity_upper_eta(const DistanceField<Dim>& df, double delta, const DistanceField<Dim>& dA,
                            std::vector<double> r_list, std::vector<int> n_list,
                            EdgeAverage avg = EdgeAverage::Arithmetic) {
  require(!r_list.empty() && !n_list.empty(), "candidate lists must be nonempty");
  require(dA.size() == df.size(), "d_A must live on the same grid");
  std::sort(r_list.begin(), r_list.end());
  std::sort(n_list.begin(), n_list.end(), std::greater<>());
  const auto form = assemble_form(df, delta, avg);
  EtaBound best;
  best.value = std::numeric_limits<double>::infinity();
  for (double r : r_list)
    for (int n : n_list) {
      const auto eta = eta_rn(dA, r, n);
      const double e = form.value(eta), m = l2_mass(df.grid, eta);
      if (e + m < best.value) best = {e + m, e, m, r, n};
    }
  return best;
}

struct SolverOptions {
  EdgeAverage average = EdgeAverage::Arithmetic;
  std::ostream* trace = nullptr;  // CSV iteration,residual rows when set
  int max_iter = 0;               // 0: 50 * largest grid extent
  const std::vector<double>* warm_start = nullptr;  // per-cell initial guess
};

struct CapacityResult {
  double value = 0.0;
  double collar_eps = 0.0;
  int solver_iters = 0;
  double residual = 0.0;
  std::size_t collar_cells = 0;
  std::size_t free_cells = 0;
  double psi_min = 0.0;
  double psi_max = 0.0;
  std::vector<double> psi;  // per-cell minimizer
};

namespace detail {

template <int Dim>
int default_cg_cap(const Grid<Dim>& g) {
  int m = 1;
  for (int d : g.dims) m = std::max(m, d);
  return 50 * m;
}

}  // namespace detail

/// Minimizes h(psi) + ||psi||^2 with psi = 1 on the collar {d_A < eps}.
///
/// The free cells solve (L_FF + h^d I) psi_F = -L_FC 1 by Jacobi-preconditioned
/// CG. The discrete maximum principle keeps psi in [0, 1]; the observed range
/// is reported in psi_min / psi_max rather than enforced.
template <int Dim>
CapacityResult capacity_relaxed(const DistanceField<Dim>& df, double delta, const DistanceField<Dim>& dA, double eps,
                                double cg_tol = 1e-8, const SolverOptions& opt = {}) {
  const auto& g = df.grid;
  require(eps >= 2.0 * g.h * (1.0 - 1e-12), "collar width must be at least 2h");
  require(dA.size() == df.size(), "d_A must live on the same grid");
  const auto form = assemble_form(df, delta, opt.average);
  const std::size_t n = g.size();
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> free_id(n, kNone);
  std::vector<std::uint8_t> collar(n, 0);
  CapacityResult res;
  res.collar_eps = eps;
  std::uint32_t nf = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.mask[i]) continue;
    if (dA.values[i] < eps) {
      collar[i] = 1;
      ++res.collar_cells;
    } else {
      free_id[i] = nf++;
    }
  }
  if (res.collar_cells == 0) fail(ErrorKind::EmptyRegion, "the collar {d_A < eps} holds no cell");
  res.free_cells = nf;

  CsrMatrix a;
  a.n = nf;
  a.diag.assign(nf, g.cell_volume());
  std::vector<double> rhs(nf, 0.0);
  std::vector<std::uint32_t> count(nf + 1, 0);
  for (const auto& e : form.edges) {
    const auto fi = free_id[e.i], fj = free_id[e.j];
    if (fi != kNone && fj != kNone) {
      ++count[fi];
      ++count[fj];
    }
  }
  a.offsets.assign(nf + 1, 0);
  for (std::uint32_t f = 0; f < nf; ++f) a.offsets[f + 1] = a.offsets[f] + count[f];
  a.cols.resize(a.offsets[nf]);
  a.vals.resize(a.offsets[nf]);
  std::vector<std::size_t> fillp(a.offsets.begin(), a.offsets.end() - 1);
  for (const auto& e : form.edges) {
    const auto fi = free_id[e.i], fj = free_id[e.j];
    if (fi != kNone) a.diag[fi] += e.w;
    if (fj != kNone) a.diag[fj] += e.w;
    if (fi != kNone && fj != kNone) {
      a.cols[fillp[fi]] = fj;
      a.vals[fillp[fi]++] = -e.w;
      a.cols[fillp[fj]] = fi;
      a.vals[fillp[fj]++] = -e.w;
    } else if (fi != kNone && collar[e.j]) {
      rhs[fi] += e.w;
    } else if (fj != kNone && collar[e.i]) {
      rhs[fj] += e.w;
    }
  }

  std::vector<double> x(nf, 0.0);
  if (opt.warm_start)
    for (std::size_t i = 0; i < n; ++i)
      if (free_id[i] != kNone) x[free_id[i]] = (*opt.warm_start)[i];
  if (nf > 0) {
    const int cap = opt.max_iter > 0 ? opt.max_iter : detail::default_cg_cap(g);
    const auto cg = conjugate_gradient(a, rhs, x, cg_tol, cap, opt.trace);
    res.solver_iters = cg.iterations;
    res.residual = cg.residual;
    if (!cg.converged) fail(ErrorKind::SolverDiverged, "CG did not reach the requested residual");
  }

  res.psi.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (collar[i]) res.psi[i] = 1.0;
    else if (free_id[i] != kNone) res.psi[i] = x[free_id[i]];
  }
  res.psi_min = std::numeric_limits<double>::infinity();
  res.psi_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (g.mask[i]) {
      res.psi_min = std::min(res.psi_min, res.psi[i]);
      res.psi_max = std::max(res.psi_max, res.psi[i]);
    }
  res.value = form.value(res.psi) + l2_mass(g, res.psi);
  return res;
}

// ---------------------------------------------------------------------------
// Local Hardy quotient

namespace detail {

/// Edge from a support cell across Gamma or the grid border: phi vanishes on
/// the shared face, half a cell away, so the difference quotient doubles the
/// conductance of the mean weight between the cell and the face.
inline double face_weight(double ci, double h, double delta, double scale) {
  return scale * (ci + std::pow(0.5 * h, delta));
}

}  // namespace detail

struct HardyResult {
  double value = 0.0;
  int outer_iters = 0;
  int inner_iters = 0;
  std::size_t support_cells = 0;
  std::vector<double> vector;  // per cell, M-normalized, zero off the support
};

/// Smallest generalized Rayleigh quotient int d^delta |grad phi|^2 / int d^(delta-2) phi^2
/// over grid functions supported in the cells of Omega_{z,r}.
///
/// Functions vanish off the support, so every edge from a support cell to a
/// cell outside it (another Omega cell, a cell outside Omega, or off the grid)
/// contributes to the diagonal. Inverse power iteration with warm-started CG.
template <int Dim>
HardyResult hardy_quotient(const DistanceField<Dim>& df, double delta, const std::type_identity_t<Vec<Dim>>& z, double r, double tol = 1e-8,
                           const SolverOptions& opt = {}) {
  require(r > 0.0 && tol > 0.0, "need r > 0 and tol > 0");
  require(delta >= 0.0, "delta must be non-negative");
  const auto& g = df.grid;
  const auto wf = weight_field(df, delta);
  const double scale = std::pow(g.h, Dim - 2);
  const std::size_t n = g.size();
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> sid(n, kNone);
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < n; ++i)
    if (g.mask[i] && dist2<Dim>(g.center(i), z) < r * r) {
      sid[i] = static_cast<std::uint32_t>(cells.size());
      cells.push_back(i);
    }
  if (cells.empty()) fail(ErrorKind::EmptyRegion, "Omega_{z,r} holds no cell");
  const std::size_t m = cells.size();

  CsrMatrix k;
  k.n = m;
  k.diag.assign(m, 0.0);
  k.offsets.assign(m + 1, 0);
  std::vector<double> mass(m);
  for (std::size_t s = 0; s < m; ++s) {
    const std::size_t i = cells[s];
    mass[s] = g.cell_volume() * clamped_power(df.values[i], g.h, delta - 2.0);
    g.for_each_axis_neighbor(i, [&](std::size_t j, bool on_grid) {
      const bool omega = on_grid && g.mask[j];
      const double w = omega ? edge_weight(wf.values[i], wf.values[j], scale, opt.average)
                             : detail::face_weight(wf.values[i], g.h, delta, scale);
      k.diag[s] += w;
      if (on_grid && sid[j] != kNone) {
        k.cols.push_back(sid[j]);
        k.vals.push_back(-w);
      }
    });
    k.offsets[s + 1] = k.cols.size();
  }

  auto m_norm = [&](const std::vector<double>& v) {
    double q = 0.0;
    for (std::size_t s = 0; s < m; ++s) q += mass[s] * v[s] * v[s];
    return std::sqrt(q);
  };
  std::vector<double> x(m, 1.0), y(m, 0.0), b(m);
  {
    const double nx = m_norm(x);
    for (auto& v : x) v /= nx;
  }
  HardyResult res;
  res.support_cells = m;
  const int cap = opt.max_iter > 0 ? opt.max_iter : detail::default_cg_cap(g);
  double lambda = k.quadratic(x);
  for (int it = 0; it < 200; ++it) {
    for (std::size_t s = 0; s < m; ++s) {
      b[s] = mass[s] * x[s];
      y[s] = x[s] / lambda;
    }
    const auto cg = conjugate_gradient(k, b, y, tol, cap, opt.trace);
    res.inner_iters += cg.iterations;
    if (!cg.converged) fail(ErrorKind::SolverDiverged, "inner CG did not converge");
    const double ny = m_norm(y);
    for (std::size_t s = 0; s < m; ++s) x[s] = y[s] / ny;
    const double next = k.quadratic(x);  // x is M-normalized
    res.outer_iters = it + 1;
    const bool done = std::abs(next - lambda) < tol * std::abs(next);
    lambda = next;
    if (done) break;
    if (it == 199) fail(ErrorKind::SolverDiverged, "inverse iteration did not settle in 200 steps");
  }
  res.value = lambda;
  res.vector.assign(n, 0.0);
  for (std::size_t s = 0; s < m; ++s) res.vector[cells[s]] = x[s];
  return res;
}

/// Discrete Rayleigh quotient of a per-cell function for the Hardy pair
/// (Dirichlet form restricted to the support, d^(delta-2) mass). Used to
/// cross-check hardy_quotient.
template <int Dim>
double hardy_rayleigh(const DistanceField<Dim>& df, double delta, std::span<const double> phi,
                      EdgeAverage avg = EdgeAverage::Arithmetic) {
  const auto& g = df.grid;
  const auto wf = weight_field(df, delta);
  const double scale = std::pow(g.h, Dim - 2);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (phi[i] == 0.0) continue;
    den += g.cell_volume() * clamped_power(df.values[i], g.h, delta - 2.0) * phi[i] * phi[i];
    g.for_each_axis_neighbor(i, [&](std::size_t j, bool on_grid) {
      const bool omega = on_grid && g.mask[j];
      const double w =
          omega ? edge_weight(wf.values[i], wf.values[j], scale, avg) : detail::face_weight(wf.values[i], g.h, delta, scale);
      const double pj = on_grid ? phi[j] : 0.0;
      // each support-support edge is seen from both ends
      num += (on_grid && pj != 0.0) ? 0.5 * w * (phi[i] - pj) * (phi[i] - pj) : w * phi[i] * phi[i];
    });
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Collar integrals

namespace detail {

template <int Dim, class Pred>
double region_integral(const DistanceField<Dim>& df, double delta, const std::type_identity_t<Vec<Dim>>& z, double rho, Pred&& keep) {
  const auto& g = df.grid;
  double s = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.mask[i] || dist2<Dim>(g.center(i), z) >= rho * rho) continue;
    any = true;
    if (keep(df.values[i])) s += std::pow(std::max(df.values[i], 0.5 * g.h), delta - 2.0);
  }
  if (!any) fail(ErrorKind::EmptyRegion, "Omega_{z,rho} holds no cell");
  return s * g.cell_volume();
}

}  // namespace detail

/// h^d * sum of d_Gamma^(delta-2) over cells of Omega_{z,rho} with d_Gamma < tau.
template <int Dim>
double collar_integral(const DistanceField<Dim>& df, double delta, const std::type_identity_t<Vec<Dim>>& z, double rho, double tau) {
  require(tau > 0.0 && tau < rho, "tau must lie in (0, rho)");
  return detail::region_integral<Dim>(df, delta, z, rho, [tau](double d) { return d < tau; });
}

/// h^d * sum of d_Gamma^(delta-2) over cells of Omega_{z,rho} with d_Gamma >= tau:
/// the tau-truncation of int_{Omega_{z,rho}} d^(delta-2), which diverges like
/// tau^-(2+s-d-delta) below the critical exponent and converges above it.
template <int Dim>
double truncated_integral(const DistanceField<Dim>& df, double delta, const std::type_identity_t<Vec<Dim>>& z, double rho, double tau) {
  require(tau > 0.0 && tau < rho, "tau must lie in (0, rho)");
  return detail::region_integral<Dim>(df, delta, z, rho, [tau](double d) { return d >= tau; });
}

}  // namespace fraclab
