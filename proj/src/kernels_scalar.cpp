#include <cmath>

#include "kernels_detail.hpp"

namespace sentrep::kernels::scalar {

template <class T>
T dot(const T* a, const T* b, size_t n) {
  T acc = T(0);
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
void axpy(T* y, T alpha, const T* x, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void add(T* out, const T* a, const T* b, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <class T>
void mul(T* out, const T* a, const T* b, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <class T>
void madd(T* y, const T* a, const T* b, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

template <class T>
void scale(T* y, T alpha, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] *= alpha;
}

template <class T>
T sum(const T* a, size_t n) {
  T acc = T(0);
  for (size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

template <class T>
size_t argmax(const T* a, size_t n) {
  size_t best = 0;
  for (size_t i = 1; i < n; ++i) {
    if (a[i] > a[best]) best = i;
  }
  return best;
}

template <class T>
void adam_update(T* w, const T* g, T* m, T* v, size_t n, T lr, T beta1,
                 T beta2, T eps, T bias1, T bias2) {
  const T one = T(1);
  for (size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (one - beta1) * g[i];
    v[i] = beta2 * v[i] + (one - beta2) * (g[i] * g[i]);
    T mhat = m[i] / bias1;
    T vhat = v[i] / bias2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template float dot<float>(const float*, const float*, size_t);
template double dot<double>(const double*, const double*, size_t);
template void axpy<float>(float*, float, const float*, size_t);
template void axpy<double>(double*, double, const double*, size_t);
template void add<float>(float*, const float*, const float*, size_t);
template void add<double>(double*, const double*, const double*, size_t);
template void mul<float>(float*, const float*, const float*, size_t);
template void mul<double>(double*, const double*, const double*, size_t);
template void madd<float>(float*, const float*, const float*, size_t);
template void madd<double>(double*, const double*, const double*, size_t);
template void scale<float>(float*, float, size_t);
template void scale<double>(double*, double, size_t);
template float sum<float>(const float*, size_t);
template double sum<double>(const double*, size_t);
template size_t argmax<float>(const float*, size_t);
template size_t argmax<double>(const double*, size_t);
template void adam_update<float>(float*, const float*, float*, float*, size_t,
                                 float, float, float, float, float, float);
template void adam_update<double>(double*, const double*, double*, double*,
                                  size_t, double, double, double, double,
                                  double, double);

}  // namespace sentrep::kernels::scalar
