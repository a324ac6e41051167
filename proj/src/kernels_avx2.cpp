#include <immintrin.h>

#include <cmath>

#include "kernels_detail.hpp"

// AVX2 variants. Elementwise kernels use separate mul and add so results stay
// bitwise equal to the scalar reference (built with -ffp-contract=off).
// dot and sum use FMA accumulators and only agree to tolerance.

namespace sentrep::kernels::avx2 {

namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x1);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

inline double hsum4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  lo = _mm_add_sd(lo, sh);
  return _mm_cvtsd_f64(lo);
}

inline float hmax8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_max_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_max_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x1);
  lo = _mm_max_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

inline double hmax4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  lo = _mm_max_sd(lo, sh);
  return _mm_cvtsd_f64(lo);
}

}  // namespace

float dot(const float* a, const float* b, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
  }
  float r = hsum8(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double dot(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double r = hsum4(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void axpy(float* y, float alpha, const float* x, size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 p = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), p));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy(double* y, double alpha, const double* x, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void add(float* out, const float* a, const float* b, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(
        out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void add(double* out, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(float* out, const float* a, const float* b, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(
        out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul(double* out, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void madd(float* y, const float* a, const float* b, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 p = _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), p));
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

void madd(double* y, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

void scale(float* y, float alpha, size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(y + i), va));
  }
  for (; i < n; ++i) y[i] *= alpha;
}

void scale(double* y, double alpha, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), va));
  }
  for (; i < n; ++i) y[i] *= alpha;
}

float sum(const float* a, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(a + i));
  float r = hsum8(acc);
  for (; i < n; ++i) r += a[i];
  return r;
}

double sum(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double r = hsum4(acc);
  for (; i < n; ++i) r += a[i];
  return r;
}

size_t argmax(const float* a, size_t n) {
  if (n < 8) {
    size_t best = 0;
    for (size_t i = 1; i < n; ++i) {
      if (a[i] > a[best]) best = i;
    }
    return best;
  }
  __m256 vmax = _mm256_loadu_ps(a);
  size_t i = 8;
  for (; i + 8 <= n; i += 8) {
    vmax = _mm256_max_ps(vmax, _mm256_loadu_ps(a + i));
  }
  float best = hmax8(vmax);
  for (size_t j = i; j < n; ++j) {
    if (a[j] > best) best = a[j];
  }
  const __m256 vb = _mm256_set1_ps(best);
  size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    int mask = _mm256_movemask_ps(
        _mm256_cmp_ps(_mm256_loadu_ps(a + j), vb, _CMP_EQ_OQ));
    if (mask) return j + static_cast<size_t>(__builtin_ctz(mask));
  }
  for (; j < n; ++j) {
    if (a[j] == best) return j;
  }
  return 0;
}

size_t argmax(const double* a, size_t n) {
  if (n < 4) {
    size_t best = 0;
    for (size_t i = 1; i < n; ++i) {
      if (a[i] > a[best]) best = i;
    }
    return best;
  }
  __m256d vmax = _mm256_loadu_pd(a);
  size_t i = 4;
  for (; i + 4 <= n; i += 4) {
    vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(a + i));
  }
  double best = hmax4(vmax);
  for (size_t j = i; j < n; ++j) {
    if (a[j] > best) best = a[j];
  }
  const __m256d vb = _mm256_set1_pd(best);
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    int mask = _mm256_movemask_pd(
        _mm256_cmp_pd(_mm256_loadu_pd(a + j), vb, _CMP_EQ_OQ));
    if (mask) return j + static_cast<size_t>(__builtin_ctz(mask));
  }
  for (; j < n; ++j) {
    if (a[j] == best) return j;
  }
  return 0;
}

void adam_update(float* w, const float* g, float* m, float* v, size_t n,
                 float lr, float beta1, float beta2, float eps, float bias1,
                 float bias2) {
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 vc1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 vc2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 vbias1 = _mm256_set1_ps(bias1);
  const __m256 vbias2 = _mm256_set1_ps(bias2);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 gi = _mm256_loadu_ps(g + i);
    __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)),
                              _mm256_mul_ps(vc1, gi));
    __m256 vi = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                              _mm256_mul_ps(vc2, _mm256_mul_ps(gi, gi)));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    __m256 mhat = _mm256_div_ps(mi, vbias1);
    __m256 vhat = _mm256_div_ps(vi, vbias2);
    __m256 step = _mm256_div_ps(_mm256_mul_ps(vlr, mhat),
                                _mm256_add_ps(_mm256_sqrt_ps(vhat), veps));
    _mm256_storeu_ps(w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * (g[i] * g[i]);
    float mhat = m[i] / bias1;
    float vhat = v[i] / bias2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void adam_update(double* w, const double* g, double* m, double* v, size_t n,
                 double lr, double beta1, double beta2, double eps,
                 double bias1, double bias2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vc1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vc2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vbias1 = _mm256_set1_pd(bias1);
  const __m256d vbias2 = _mm256_set1_pd(bias2);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                               _mm256_mul_pd(vc1, gi));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(vc2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    __m256d mhat = _mm256_div_pd(mi, vbias1);
    __m256d vhat = _mm256_div_pd(vi, vbias2);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat),
                                 _mm256_add_pd(_mm256_sqrt_pd(vhat), veps));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    double mhat = m[i] / bias1;
    double vhat = v[i] / bias2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace sentrep::kernels::avx2
