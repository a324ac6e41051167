#include "sentrep/kernels.hpp"

#include "kernels_detail.hpp"
#include "sentrep/util.hpp"

namespace sentrep::kernels {

namespace {

Isa detect() {
#if SENTREP_HAVE_AVX2_BUILD
  if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa g_isa = detect();

}  // namespace

bool avx2_supported() {
#if SENTREP_HAVE_AVX2_BUILD
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Isa active_isa() { return g_isa; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_supported()) {
    throw ValueError("avx2 not available on this host");
  }
  g_isa = isa;
}

void reset_isa() { g_isa = detect(); }

#if SENTREP_HAVE_AVX2_BUILD
#define SENTREP_DISPATCH(call_scalar, call_avx2) \
  if (g_isa == Isa::avx2) {                      \
    return call_avx2;                            \
  }                                              \
  return call_scalar
#else
#define SENTREP_DISPATCH(call_scalar, call_avx2) return call_scalar
#endif

template <class T>
T dot(const T* a, const T* b, size_t n) {
  SENTREP_DISPATCH(scalar::dot(a, b, n), avx2::dot(a, b, n));
}

template <class T>
void axpy(T* y, T alpha, const T* x, size_t n) {
  SENTREP_DISPATCH(scalar::axpy(y, alpha, x, n), avx2::axpy(y, alpha, x, n));
}

template <class T>
void add(T* out, const T* a, const T* b, size_t n) {
  SENTREP_DISPATCH(scalar::add(out, a, b, n), avx2::add(out, a, b, n));
}

template <class T>
void mul(T* out, const T* a, const T* b, size_t n) {
  SENTREP_DISPATCH(scalar::mul(out, a, b, n), avx2::mul(out, a, b, n));
}

template <class T>
void madd(T* y, const T* a, const T* b, size_t n) {
  SENTREP_DISPATCH(scalar::madd(y, a, b, n), avx2::madd(y, a, b, n));
}

template <class T>
void scale(T* y, T alpha, size_t n) {
  SENTREP_DISPATCH(scalar::scale(y, alpha, n), avx2::scale(y, alpha, n));
}

template <class T>
T sum(const T* a, size_t n) {
  SENTREP_DISPATCH(scalar::sum(a, n), avx2::sum(a, n));
}

template <class T>
size_t argmax(const T* a, size_t n) {
  if (n == 0) throw ValueError("argmax over empty range");
  SENTREP_DISPATCH(scalar::argmax(a, n), avx2::argmax(a, n));
}

template <class T>
void adam_update(T* w, const T* g, T* m, T* v, size_t n, T lr, T beta1, T beta2,
                 T eps, T bias1, T bias2) {
  SENTREP_DISPATCH(
      scalar::adam_update(w, g, m, v, n, lr, beta1, beta2, eps, bias1, bias2),
      avx2::adam_update(w, g, m, v, n, lr, beta1, beta2, eps, bias1, bias2));
}

#undef SENTREP_DISPATCH

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

}  // namespace sentrep::kernels
