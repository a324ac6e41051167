#pragma once

#include <cstddef>

namespace sentrep::kernels::scalar {

template <class T>
T dot(const T* a, const T* b, size_t n);
template <class T>
void axpy(T* y, T alpha, const T* x, size_t n);
template <class T>
void add(T* out, const T* a, const T* b, size_t n);
template <class T>
void mul(T* out, const T* a, const T* b, size_t n);
template <class T>
void madd(T* y, const T* a, const T* b, size_t n);
template <class T>
void scale(T* y, T alpha, size_t n);
template <class T>
T sum(const T* a, size_t n);
template <class T>
size_t argmax(const T* a, size_t n);
template <class T>
void adam_update(T* w, const T* g, T* m, T* v, size_t n, T lr, T beta1, T beta2,
                 T eps, T bias1, T bias2);

}  // namespace sentrep::kernels::scalar

#if SENTREP_HAVE_AVX2_BUILD
namespace sentrep::kernels::avx2 {

float dot(const float* a, const float* b, size_t n);
double dot(const double* a, const double* b, size_t n);
void axpy(float* y, float alpha, const float* x, size_t n);
void axpy(double* y, double alpha, const double* x, size_t n);
void add(float* out, const float* a, const float* b, size_t n);
void add(double* out, const double* a, const double* b, size_t n);
void mul(float* out, const float* a, const float* b, size_t n);
void mul(double* out, const double* a, const double* b, size_t n);
void madd(float* y, const float* a, const float* b, size_t n);
void madd(double* y, const double* a, const double* b, size_t n);
void scale(float* y, float alpha, size_t n);
void scale(double* y, double alpha, size_t n);
float sum(const float* a, size_t n);
double sum(const double* a, size_t n);
size_t argmax(const float* a, size_t n);
size_t argmax(const double* a, size_t n);
void adam_update(float* w, const float* g, float* m, float* v, size_t n,
                 float lr, float beta1, float beta2, float eps, float bias1,
                 float bias2);
void adam_update(double* w, const double* g, double* m, double* v, size_t n,
                 double lr, double beta1, double beta2, double eps,
                 double bias1, double bias2);

}  // namespace sentrep::kernels::avx2
#endif
