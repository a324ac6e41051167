#pragma once

#include <cmath>
#include <vector>

#include "sentrep/rng.hpp"
#include "sentrep/util.hpp"

namespace sentrep {

// Small dense routines in double precision, used for initialization and for
// closed-form least squares. Row-major throughout.

// Haar-distributed n x n orthogonal matrix: Householder QR of a Gaussian
// matrix, with column signs fixed so R's diagonal is positive.
inline std::vector<double> random_orthogonal(size_t n, Rng& rng) {
  if (n == 0) throw ValueError("orthogonal matrix of size 0");
  std::vector<double> a(n * n);
  for (auto& x : a) x = rng.gauss();
  std::vector<double> q(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
  std::vector<double> v(n);
  for (size_t k = 0; k < n; ++k) {
    double norm2 = 0.0;
    for (size_t i = k; i < n; ++i) norm2 += a[i * n + k] * a[i * n + k];
    double norm = std::sqrt(norm2);
    if (norm == 0.0) continue;
    double alpha = a[k * n + k] >= 0.0 ? -norm : norm;
    for (size_t i = k; i < n; ++i) v[i] = a[i * n + k];
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    double beta = 2.0 / vnorm2;
    // A[k:, k:] <- H A, H = I - beta v v^T
    for (size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (size_t i = k; i < n; ++i) s += v[i] * a[i * n + j];
      s *= beta;
      for (size_t i = k; i < n; ++i) a[i * n + j] -= s * v[i];
    }
    // Q <- Q H accumulates Q = H_0 H_1 ... H_{n-1}
    for (size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (size_t t = k; t < n; ++t) s += q[i * n + t] * v[t];
      s *= beta;
      for (size_t t = k; t < n; ++t) q[i * n + t] -= s * v[t];
    }
  }
  for (size_t k = 0; k < n; ++k) {
    if (a[k * n + k] < 0.0) {
      for (size_t i = 0; i < n; ++i) q[i * n + k] = -q[i * n + k];
    }
  }
  return q;
}

// Max abs entry of Q^T Q - I; the orthogonality defect.
inline double gram_defect(const std::vector<double>& q, size_t n) {
  double worst = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (size_t k = 0; k < n; ++k) s += q[k * n + i] * q[k * n + j];
      double d = std::fabs(s - (i == j ? 1.0 : 0.0));
      if (d > worst) worst = d;
    }
  }
  return worst;
}

// In-place Cholesky factorization of an SPD matrix; A becomes L (lower).
inline void cholesky(std::vector<double>& a, size_t n) {
  for (size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) throw NumericError("matrix not positive definite");
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
}

// Solves L L^T x = b given the Cholesky factor L; b is overwritten with x.
inline void cholesky_solve(const std::vector<double>& l, size_t n,
                           std::vector<double>& b) {
  for (size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
  for (size_t ii = n; ii > 0; --ii) {
    size_t i = ii - 1;
    double s = b[i];
    for (size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
    b[i] = s / l[i * n + i];
  }
}

}  // namespace sentrep
