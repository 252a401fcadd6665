#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "fraclab/parallel.hpp"

namespace fraclab {

/// Symmetric matrix as diagonal plus off-diagonal CSR.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<double> diag;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;

  void multiply(std::span<const double> x, std::span<double> y) const {
    parallel_chunks(0, n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        double s = diag[i] * x[i];
        for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) s += vals[k] * x[cols[k]];
        y[i] = s;
      }
    });
  }

  double quadratic(std::span<const double> x) const {
    std::vector<double> y(n);
    multiply(x, y);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
  }
};

struct CgResult {
  int iterations = 0;
  double residual = 0.0;  // ||b - A x|| / ||b||
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient; x holds the initial guess on
/// entry. Writes "iteration,residual" rows to `trace` when given.
inline CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x, double tol,
                                   int max_iter, std::ostream* trace = nullptr) {
  const std::size_t n = a.n;
  CgResult res;
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    for (auto& v : x) v = 0.0;
    res.converged = true;
    return res;
  }
  std::vector<double> r(n), z(n), p(n), q(n);
  a.multiply(x, q);
  double rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - q[i];
    rr += r[i] * r[i];
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / a.diag[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
  res.residual = std::sqrt(rr) / bnorm;
  if (trace) *trace << "iteration,residual\n0," << res.residual << '\n';
  while (res.residual > tol && res.iterations < max_iter) {
    a.multiply(p, q);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    if (!(pq > 0.0)) break;  // lost positive definiteness numerically
    const double alpha = rz / pq;
    rr = 0.0;
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = r[i] / a.diag[i];
      rr += r[i] * r[i];
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++res.iterations;
    res.residual = std::sqrt(rr) / bnorm;
    if (trace) *trace << res.iterations << ',' << res.residual << '\n';
  }
  res.converged = res.residual <= tol;
  return res;
}

}  // namespace fraclab
